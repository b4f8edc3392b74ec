#pragma once

// Jump-type Belavkin equation driven by a thinned Poisson random measure.
//
// Between events the wave function follows the nonlinear drift
//   dpsi/dt = (-iH - (Cdag C - mu)/2) psi,   mu = <psi, Cdag C psi>,
// and at an accepted event it jumps to C psi / sqrt(mu). Candidates arrive
// at the dominating rate Lambda = ||C||_op^2 with marks uniform on
// [0, Lambda]; a candidate is accepted iff its mark is below mu at the
// left limit. The counting process N_t then has stochastic intensity mu_t.

#include <cstdint>
#include <vector>

#include "qtraj/model.hpp"
#include "qtraj/qmath.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

struct CandidateEvent {
    double time = 0;
    double mark = 0;  // uniform on [0, Lambda]
    bool accepted = false;
};

// Homogeneous Poisson candidate stream of rate Lambda with uniform marks.
// Consumes exactly two uniforms per candidate, so coupled solvers sharing
// a seed see identical streams.
class PoissonMeasureSampler {
  public:
    PoissonMeasureSampler(double rate, std::uint64_t seed, std::uint64_t stream);

    double rate() const { return rate_; }
    CandidateEvent next();  // strictly increasing times

  private:
    double rate_;
    double t_ = 0.0;
    RngStream rng_;
};

struct JumpTrajectory {
    std::vector<double> times;           // uniform grid, step dt
    std::vector<CVec2> pure_states;      // wave form
    std::vector<CMat2> density_states;   // density form
    std::vector<double> intensity_path;  // mu_t (or Tr[C rho Cdag]) on the grid
    std::vector<int> counts;             // N_t on the grid
    std::vector<double> jump_times;      // accepted events
    std::vector<CandidateEvent> events;  // every candidate seen before T
    double max_norm_deviation = 0.0;     // pre-renormalization, per inner step
    std::uint64_t seed = 0, stream = 0;
};

// mu = <psi, Cdag C psi> in [0, ||C||_op^2].
double intensity(const CVec2& psi, const CMat2& C);

// (-iH - (Cdag C - mu)/2) psi; tangent to the unit sphere.
CVec2 drift_no_jump(const CVec2& psi, const CMat2& H, const CMat2& C);

// C psi / sqrt(mu). Throws std::logic_error when mu < 1e-12: thinning can
// never accept such a jump, so reaching it signals a solver bug.
CVec2 apply_jump(const CVec2& psi, const CMat2& C);

JumpTrajectory solve_jump_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                              std::uint64_t seed, std::uint64_t stream);

// Density form: d rho = (L(rho) - C rho Cdag + Tr[C rho Cdag] rho) dt between
// events; an accepted event sets rho -> C rho Cdag / Tr[C rho Cdag]. Shares
// the candidate stream with solve_jump_sde under the same (seed, stream).
JumpTrajectory solve_jump_density(const ModelSpec& spec, const CMat2& rho0, double T, double dt,
                                  std::uint64_t seed, std::uint64_t stream);

}  // namespace qtraj
