#pragma once

// Diffusive Belavkin equation
//
//   dpsi = (-iH - (Cdag C - 2 nu C + nu^2)/2) psi dt + (C - nu) psi dW,
//   nu = Re<psi, C psi>,
//
// solved by Euler-Maruyama with renormalization, and its density-matrix
// counterpart d rho = L(rho) dt + (C rho + rho Cdag - Tr[(C+Cdag)rho] rho) dW.
// The drift and diffusion satisfy 2 Re<psi, drift> + ||diffusion||^2 = 0 and
// Re<psi, diffusion> = 0, so the exact flow keeps ||psi|| = 1; the recorded
// pre-renormalization deviation measures pure scheme error.

#include <cstdint>
#include <vector>

#include "qtraj/model.hpp"
#include "qtraj/qmath.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

struct DiffusivePath {
    std::vector<double> times;          // uniform grid, step dt
    std::vector<CVec2> pure_states;     // wave form
    std::vector<CMat2> density_states;  // density form
    std::vector<double> dW;             // per-step increments, variance dt
    std::vector<double> nu_path;        // Re<psi,C psi> (Re Tr[C rho] for densities)
    double max_norm_deviation = 0.0;    // pre-renormalization, per step
    std::uint64_t seed = 0, stream = 0;
};

double nu(const CVec2& psi, const CMat2& C);

CVec2 drift_diffusive(const CVec2& psi, const CMat2& H, const CMat2& C);
CVec2 diffusion_diffusive(const CVec2& psi, const CMat2& C);

// One Euler-Maruyama step followed by renormalization; *norm_dev (optional)
// receives the pre-renormalization deviation |  ||psi'|| - 1 |.
CVec2 em_step(const CVec2& psi, double dt, double dW, const CMat2& H, const CMat2& C,
              double* norm_dev = nullptr);

DiffusivePath solve_diffusive_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                                  std::uint64_t seed, std::uint64_t stream);
DiffusivePath solve_diffusive_density(const ModelSpec& spec, const CMat2& rho0, double T,
                                      double dt, std::uint64_t seed, std::uint64_t stream);

// Same solvers on caller-supplied increments (size = number of steps);
// used to couple runs and for step-halving self-consistency checks.
DiffusivePath solve_diffusive_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                                  const std::vector<double>& increments);
DiffusivePath solve_diffusive_density(const ModelSpec& spec, const CMat2& rho0, double T,
                                      double dt, const std::vector<double>& increments);

}  // namespace qtraj
