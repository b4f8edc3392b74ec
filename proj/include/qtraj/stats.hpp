#pragma once

// Summary statistics and Kolmogorov-Smirnov distances used by the
// Monte Carlo validation harnesses.

#include <cstddef>
#include <vector>

namespace qtraj {

double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);        // unbiased, needs size >= 2
double standard_error(const std::vector<double>& x);  // sqrt(variance / n)

// Two-sample KS statistic sup_x |F_a(x) - F_b(x)|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS statistic against Exponential(rate).
double ks_exponential(std::vector<double> sample, double rate);

}  // namespace qtraj
