#pragma once

// The sqrt(n)-scaled interaction unitary and empirical verification of its
// first-order block expansion
//
//   U^0_0 = I + (1/n)(-iH - i gamma0 I - C^dag C / 2) + o(1/n)
//   U^0_1 = -i C / sqrt(n) + O(n^{-3/2})
//   U^1_0 = -i C^dag / sqrt(n) + O(n^{-3/2})
//   U^1_1 = I + (1/n)(-iH - i gamma1 I - C C^dag / 2) + o(1/n)
//
// together with the first-order expansions of the one-step outcome
// probabilities in the two detection schemes.

#include <string>
#include <vector>

#include "qtraj/discrete.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qmath.hpp"

namespace qtraj {

struct AsymptoticBlocks {
    CMat2 u00, u01, u10, u11;
};

struct ResidualEntry {
    double n = 0;
    double r00 = 0, r01 = 0, r10 = 0, r11 = 0;  // spectral-norm residuals per block
    double n_r00 = 0, n32_r01 = 0;              // n * r00 and n^{3/2} * r01
};

struct ResidualReport {
    std::vector<ResidualEntry> entries;
    std::string to_csv() const;  // header: n,r00,r01,r10,r11,n_r00,n32_r01
};

struct ProbabilityExpansion {
    double p_exact = 0, q_exact = 0;  // Born probabilities at interaction count n
    double p_asym = 0, q_asym = 0;    // first-order asymptotics
};

// U(n) = exp(-i (1/n) H_tot(sqrt(n))).
InteractionUnitary build_scaled_unitary(const CMat2& H, const CMat2& C,
                                        double gamma0, double gamma1, double n);

AsymptoticBlocks asymptotic_blocks(const CMat2& H, const CMat2& C,
                                   double gamma0, double gamma1, double n);

// Per-n residuals between the exact blocks of U(n) and the first-order
// approximants, in the spectral norm. n_list must be strictly increasing
// with at least 2 entries.
ResidualReport residual_scan(const CMat2& H, const CMat2& C, double gamma0, double gamma1,
                             const std::vector<double>& n_list);

// Exact outcome probabilities for one interaction step against their
// first-order laws: counting scheme (A = a^1_1) has q ~ mu/n with
// mu = <psi, C^dag C psi>; quadrature scheme (A = sigma_x) has
// p ~ 1/2 + nu/sqrt(n) with nu = Re<psi, C psi>.
ProbabilityExpansion discrete_probability_expansion(const CMat2& H, const CMat2& C,
                                                    double gamma0, double gamma1,
                                                    const CVec2& psi, DetectionScheme kind,
                                                    double n);

// mu = <psi, C^dag C psi> (counting intensity), nu = Re <psi, C psi>
// (quadrature signal); both bounded by the operator norm of C.
double intensity_mu(const CVec2& psi, const CMat2& C);
double quadrature_nu(const CVec2& psi, const CMat2& C);

}  // namespace qtraj
