#pragma once

// The physics claims as executable experiments: Lindblad oracle and
// unravelling checks, discrete-to-continuous convergence harness for both
// detection schemes, the return-to-equilibrium decay suite, noise-increment
// statistics, and the supermartingale property of |y_t|^2.

#include <cstdint>
#include <vector>

#include "qtraj/belavkin_diffusive.hpp"
#include "qtraj/belavkin_jump.hpp"
#include "qtraj/discrete.hpp"
#include "qtraj/model.hpp"
#include "qtraj/qmath.hpp"

namespace qtraj {

// L(rho) = -i[H,rho] - {Cdag C, rho}/2 + C rho Cdag; traceless Hermitian.
CMat2 lindblad(const CMat2& rho, const CMat2& H, const CMat2& C);

// e^{tL}(rho0) through the 4x4 superoperator exponential; the unravelled
// ensembles must average to this flow.
CMat2 master_flow(const CMat2& rho0, double t, const CMat2& H, const CMat2& C);

struct EnsembleDistance {
    double distance = 0;   // trace distance of the mean dyad to the master flow
    double stderr_f = 0;   // Frobenius standard error of the mean dyad
    std::size_t paths = 0;
};

// Mean dyad over M trajectories of the chosen unravelling at time t,
// compared against master_flow(dyad(psi0), t).
EnsembleDistance unravelling_check(DetectionScheme kind, const ModelSpec& spec,
                                   const CVec2& psi0, double t, std::size_t M, double dt,
                                   std::uint64_t seed, int threads = 0);

// Trace distance between the Monte Carlo mean of rho_n and Phi^n(rho0).
double discrete_expectation_check(const ModelSpec& spec, const CMat2& rho0,
                                  std::size_t n_steps, std::size_t M, std::uint64_t seed,
                                  int threads = 0);

// Centered, unit-conditional-variance outcome noise of the quadrature chain:
// X_{k+1} = -(1{outcome_{k+1} = 1} - q_{k+1}) / sqrt(p_{k+1} q_{k+1}).
struct NoiseIncrement {
    std::size_t k = 0;  // increment index, 1-based like the outcome it uses
    int indicator = 0;
    double p = 0, q = 0;
    double value = 0;
};

std::vector<NoiseIncrement> noise_increments(const ModelSpec& spec, const DiscreteTrajectory& tr);

// W_n(t) = n^{-1/2} sum of the first floor(n t) increments.
double noise_partial_sum(const ModelSpec& spec, const DiscreteTrajectory& tr, double t);

struct ConvergenceEntry {
    double n = 0;
    double mean_state_distance = 0;  // trace distance of mean discrete state to the flow
    double mean_state_se = 0;        // Frobenius standard error of that mean state
    double ks_y2 = 0;                // two-sample KS on |y|^2 vs the continuous solver
    std::size_t samples = 0;
};

struct ConvergenceReport {
    std::vector<ConvergenceEntry> entries;
    double ks_se = 0;  // sqrt(2/M), the KS sampling scale used by the slack rule
};

// For each n: M discrete trajectories over floor(n t) steps with the scaled
// unitary; reports per-n distances against master_flow and a continuous
// reference ensemble of the matching solver.
ConvergenceReport convergence_harness(DetectionScheme kind, const CMat2& H, const CMat2& C,
                                      double gamma0, double gamma1, const CVec2& psi0, double t,
                                      const std::vector<double>& n_list, std::size_t M,
                                      double dt, std::uint64_t seed, int threads = 0);

struct DecayReport {
    std::vector<double> t_grid;
    std::vector<double> mean_y2, stderr_y2;
    std::vector<double> reference;  // |y_0|^2 e^{-t}
    double max_abs_deviation = 0;
    double frac_below_1e1 = 0, frac_below_1e2 = 0;  // |y_T|^2 thresholds at the horizon
    // Counting-scheme extras.
    std::vector<double> first_jump_times;  // one entry per path that jumped
    double absorbed_fraction = 0;          // |y| <= 1e-12 at every grid point after T_1
    double prejump_monotone_fraction = 0;  // |y|^2 non-increasing before T_1 (tol 1e-9)
};

// Return-to-equilibrium suite; requires the equilibrium model (C = a^1_0,
// H = diag(1,0)).
DecayReport decay_experiment(DetectionScheme kind, const ModelSpec& spec, const CVec2& psi0,
                             const std::vector<double>& t_grid, std::size_t M, double dt,
                             std::uint64_t seed, int threads = 0);

struct SupermartingaleReport {
    struct Bin {
        double mean_s = 0, mean_t = 0, se_t = 0;
        std::size_t count = 0;
        bool pass = false;
    };
    std::vector<Bin> bins;
    bool all_pass = false;
};

// Bins paths by |y_s|^2 decile and verifies the conditional mean of |y_t|^2
// does not exceed the bin mean at s (3 SE slack). Needs >= 1000 paths.
SupermartingaleReport supermartingale_check(const std::vector<double>& y2_s,
                                            const std::vector<double>& y2_t, double s, double t);

}  // namespace qtraj
