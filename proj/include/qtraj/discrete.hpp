#pragma once

// Discrete repeated-interaction dynamics with indirect probe measurement:
// the interaction unitary and its probe-sector blocks, the unconditioned
// Kraus channel, the two measurement superoperators, and the Markov-chain
// trajectory engine in density-matrix and pure-state form.

#include <cstdint>
#include <functional>
#include <vector>

#include "qtraj/model.hpp"
#include "qtraj/qmath.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

// Blocks of U = exp(-i tau H_tot) in the ordered product basis
// Omega(x)X_0, X(x)X_0, Omega(x)X_1, X(x)X_1 (system index fast).
// u(i, j) maps the X_i probe sector to the X_j sector, so the first
// column of blocks {u(0,0), u(0,1)} are the Kraus operators for a probe
// prepared in X_0.
struct InteractionUnitary {
    CMat4 full;
    CMat2 block[2][2];  // block[i][j] = U^i_j

    const CMat2& u(int i, int j) const { return block[i][j]; }
};

// Measurement superoperators L_0, L_1 for the probe observable A with
// spectral projectors P_0 (eigenvalue lambda0 <= lambda1) and P_1:
//
//   L_i(rho) = sum_{j,l} (P_i)_{l,j} [ eta0 U^0_j rho (U^0_l)^dag
//                                    + eta1 U^1_j rho (U^1_l)^dag ]
//
// For eta0 = 1 the pure-state Kraus vectors are F_i = sum_k conj(alpha_i[k]) U^0_k
// with alpha_0 = (mu, nu) and alpha_1 = (conj(nu), -conj(mu)), so that
// L_i(|psi><psi|) = |F_i psi><F_i psi|.
struct MeasurementSuperops {
    SpectralPair spectral;  // of the observable A
    CMat2 kraus[2][2];      // kraus[i][j] = U^i_j (copied for the channel)
    double eta0 = 1.0, eta1 = 0.0;
    CMat2 F0, F1;           // valid when eta0 == 1
    bool pure_ok = false;   // eta0 == 1, F0/F1 usable

    CMat2 apply(int outcome, const CMat2& rho) const;  // L_i(rho), unnormalized
    double branch_probability(int outcome, const CMat2& rho) const;  // Tr L_i(rho)
};

struct DiscreteTrajectory {
    std::vector<int> outcomes;          // omega in {0,1}^k
    std::vector<CVec2> pure_states;     // psi_0..psi_k (pure run)
    std::vector<CMat2> density_states;  // rho_0..rho_k (density run)
    std::vector<double> p, q;           // per-step branch probabilities, p+q = 1
    double max_norm_deviation = 0.0;    // worst pre-renormalization |norm - 1|
    std::uint64_t seed = 0, stream = 0;
};

// H_tot = H(x)I + I(x)diag(gamma0, gamma1) + scale (C(x)a^0_1 + C^dag(x)a^1_0).
CMat4 build_total_hamiltonian(const ModelSpec& spec, double coupling_scale);

// U = exp(-i tau H_tot) with coupling scale sqrt(1/tau); blocks by basis slicing.
InteractionUnitary build_unitary(const ModelSpec& spec);

// Unconditioned one-step channel Phi(rho) = sum_{i,j} eta_i U^i_j rho (U^i_j)^dag.
std::function<CMat2(const CMat2&)> kraus_channel(const InteractionUnitary& u,
                                                 double eta0, double eta1);

MeasurementSuperops measurement_superops(const InteractionUnitary& u,
                                         double eta0, double eta1, const CMat2& A);

// One von Neumann step: draw outcome i with probability Tr L_i(rho) from a
// single uniform (outcome 0 iff u < p), update rho -> L_i(rho)/Tr L_i(rho).
std::pair<int, CMat2> step_density(const CMat2& rho, const MeasurementSuperops& sup,
                                   RngStream& rng, double* norm_dev = nullptr);

// Pure-state form, requires eta0 = 1: outcome i with probability ||F_i psi||^2,
// psi -> F_i psi / ||F_i psi||. Consumes the same single uniform as
// step_density, so coupled runs branch identically.
std::pair<int, CVec2> step_pure(const CVec2& psi, const MeasurementSuperops& sup,
                                RngStream& rng, double* norm_dev = nullptr);

DiscreteTrajectory run_discrete(const ModelSpec& spec, const CVec2& psi0,
                                std::size_t steps, std::uint64_t seed, std::uint64_t stream);
DiscreteTrajectory run_discrete(const ModelSpec& spec, const CMat2& rho0,
                                std::size_t steps, std::uint64_t seed, std::uint64_t stream);

}  // namespace qtraj
