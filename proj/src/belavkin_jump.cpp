#include "qtraj/belavkin_jump.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qtraj {

PoissonMeasureSampler::PoissonMeasureSampler(double rate, std::uint64_t seed,
                                             std::uint64_t stream)
    : rate_(rate), rng_(seed, stream) {
    if (!(rate > 0.0)) throw std::invalid_argument("PoissonMeasureSampler: rate must be > 0");
}

CandidateEvent PoissonMeasureSampler::next() {
    t_ += rng_.exponential(rate_);
    CandidateEvent ev;
    ev.time = t_;
    ev.mark = rate_ * rng_.uniform();
    return ev;
}

double intensity(const CVec2& psi, const CMat2& C) {
    const double mu = norm_sq(C * psi);
    const double bound = op_norm(C);
    if (mu > bound * bound * norm_sq(psi) * (1.0 + 1e-9))
        throw std::logic_error("intensity: value exceeds ||C||_op^2");
    return mu;
}

CVec2 drift_no_jump(const CVec2& psi, const CMat2& H, const CMat2& C) {
    const CVec2 cpsi = C * psi;
    const double mu = norm_sq(cpsi);
    const CVec2 hpsi = H * psi;
    const CVec2 ccpsi = adjoint(C) * cpsi;
    return cplx(0, -1) * hpsi + cplx(-0.5) * ccpsi + cplx(0.5 * mu) * psi;
}

CVec2 apply_jump(const CVec2& psi, const CMat2& C) {
    const CVec2 cpsi = C * psi;
    const double mu = norm_sq(cpsi);
    if (mu < 1e-12)
        throw std::logic_error("apply_jump: intensity below 1e-12, jump is impossible");
    return cplx(1.0 / std::sqrt(mu)) * cpsi;
}

namespace {

struct GridSetup {
    std::size_t steps;
    double dt;
};

GridSetup check_grid(const ModelSpec& spec, double T, double dt, double lambda) {
    spec.validate();
    if (!(T > 0.0)) throw std::invalid_argument("jump solver: horizon T must be > 0");
    const double dt_max = 1e-2 * std::max(1.0, lambda > 0.0 ? 1.0 / lambda : 1.0);
    if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12))
        throw std::invalid_argument("jump solver: dt must satisfy 0 < dt <= 1e-2*max(1,1/Lambda)");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("jump solver: T must be an integer number of dt steps");
    return {steps, dt};
}

// One classical 4-stage step of size h, then renormalize; dev collects the
// pre-renormalization deviation (bounded by 10 h^2 for these tangent fields).
template <typename State, typename Field, typename Renorm>
void rk4_step(State& s, double h, const Field& f, const Renorm& renorm, double& dev) {
    const State k1 = f(s);
    const State k2 = f(s + cplx(h / 2) * k1);
    const State k3 = f(s + cplx(h / 2) * k2);
    const State k4 = f(s + cplx(h) * k3);
    s = s + cplx(h / 6) * (k1 + cplx(2) * k2 + cplx(2) * k3 + k4);
    dev = std::max(dev, renorm(s));
}

// Shared trajectory march: integrate f between candidates, thin candidates
// by comparing marks with the left-limit rate, record on the uniform grid.
template <typename State, typename Field, typename Rate, typename Jump, typename Renorm>
JumpTrajectory march(const ModelSpec& spec, State s, double T, double dt, std::uint64_t seed,
                     std::uint64_t stream, std::vector<State> JumpTrajectory::*states_field,
                     const Field& f, const Rate& rate_of, const Jump& do_jump,
                     const Renorm& renorm) {
    const double op_c = op_norm(spec.C);
    const double lambda = op_c * op_c;
    const auto [steps, step_dt] = check_grid(spec, T, dt, lambda);

    JumpTrajectory tr;
    tr.seed = seed;
    tr.stream = stream;
    auto& states = tr.*states_field;
    states.reserve(steps + 1);
    tr.times.reserve(steps + 1);
    tr.intensity_path.reserve(steps + 1);
    tr.counts.reserve(steps + 1);

    states.push_back(s);
    tr.times.push_back(0.0);
    tr.intensity_path.push_back(rate_of(s));
    tr.counts.push_back(0);

    PoissonMeasureSampler sampler(lambda > 0.0 ? lambda : 1.0, seed, stream);
    CandidateEvent cand =
        lambda > 0.0 ? sampler.next()
                     : CandidateEvent{std::numeric_limits<double>::infinity(), 0.0, false};
    int n_jumps = 0;

    for (std::size_t k = 0; k < steps; ++k) {
        double t_cur = static_cast<double>(k) * step_dt;
        const double t_next = static_cast<double>(k + 1) * step_dt;
        while (cand.time <= t_next) {
            const double h = cand.time - t_cur;
            if (h > 0.0) rk4_step(s, h, f, renorm, tr.max_norm_deviation);
            const double mu_left = rate_of(s);
            cand.accepted = cand.mark < mu_left;
            tr.events.push_back(cand);
            if (cand.accepted) {
                s = do_jump(s);
                tr.jump_times.push_back(cand.time);
                ++n_jumps;
            }
            t_cur = cand.time;
            cand = sampler.next();
        }
        const double h = t_next - t_cur;
        if (h > 0.0) rk4_step(s, h, f, renorm, tr.max_norm_deviation);
        states.push_back(s);
        tr.times.push_back(t_next);
        tr.intensity_path.push_back(rate_of(s));
        tr.counts.push_back(n_jumps);
    }
    return tr;
}

}  // namespace

JumpTrajectory solve_jump_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                              std::uint64_t seed, std::uint64_t stream) {
    if (std::abs(norm(psi0) - 1.0) > kUnitNormTol)
        throw std::invalid_argument("solve_jump_sde: psi0 must be a unit vector");
    const CMat2 H = spec.H, C = spec.C;
    return march(
        spec, psi0, T, dt, seed, stream, &JumpTrajectory::pure_states,
        [&](const CVec2& p) { return drift_no_jump(p, H, C); },
        [&](const CVec2& p) { return norm_sq(C * p); },
        [&](const CVec2& p) { return apply_jump(p, C); },
        [&](CVec2& p) {
            const double nn = norm(p);
            p = cplx(1.0 / nn) * p;
            return std::abs(nn - 1.0);
        });
}

JumpTrajectory solve_jump_density(const ModelSpec& spec, const CMat2& rho0, double T, double dt,
                                  std::uint64_t seed, std::uint64_t stream) {
    if (!is_hermitian(rho0, 1e-9) || std::abs(std::real(trace(rho0)) - 1.0) > kUnitNormTol)
        throw std::invalid_argument("solve_jump_density: rho0 must be Hermitian trace-one");
    const CMat2 H = spec.H, C = spec.C;
    const CMat2 Cd = adjoint(C);
    const CMat2 CdC = Cd * C;
    // Between events: d rho = -i[H,rho] - {CdagC, rho}/2 + Tr[C rho Cdag] rho
    // (the C rho Cdag gain term of the Lindbladian is carried by the jumps).
    const auto field = [&, CdC](const CMat2& r) {
        const CMat2 comm = H * r - r * H;
        const CMat2 anti = CdC * r + r * CdC;
        const double gain = std::real(trace(C * r * Cd));
        return cplx(0, -1) * comm + cplx(-0.5) * anti + cplx(gain) * r;
    };
    return march(
        spec, rho0, T, dt, seed, stream, &JumpTrajectory::density_states, field,
        [&](const CMat2& r) { return std::real(trace(C * r * Cd)); },
        [&](const CMat2& r) {
            const CMat2 jumped = C * r * Cd;
            const double w = std::real(trace(jumped));
            if (w < 1e-12)
                throw std::logic_error("solve_jump_density: jump weight below 1e-12");
            return cplx(1.0 / w) * jumped;
        },
        [&](CMat2& r) {
            r = cplx(0.5) * (r + adjoint(r));
            const double tt = std::real(trace(r));
            r = cplx(1.0 / tt) * r;
            return std::abs(tt - 1.0);
        });
}

}  // namespace qtraj
