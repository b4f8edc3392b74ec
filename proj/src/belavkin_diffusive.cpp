#include "qtraj/belavkin_diffusive.hpp"

#include <cmath>
#include <stdexcept>

namespace qtraj {

double nu(const CVec2& psi, const CMat2& C) {
    const double v = std::real(inner(psi, C * psi));
    const double bound = op_norm(C) * norm_sq(psi);
    if (std::abs(v) > bound * (1.0 + 1e-9))
        throw std::logic_error("nu: value exceeds ||C||_op");
    return v;
}

CVec2 drift_diffusive(const CVec2& psi, const CMat2& H, const CMat2& C) {
    const CVec2 cpsi = C * psi;
    const double v = std::real(inner(psi, cpsi));
    const CVec2 ccpsi = adjoint(C) * cpsi;
    return cplx(0, -1) * (H * psi) + cplx(-0.5) * ccpsi + cplx(v) * cpsi +
           cplx(-0.5 * v * v) * psi;
}

CVec2 diffusion_diffusive(const CVec2& psi, const CMat2& C) {
    const CVec2 cpsi = C * psi;
    const double v = std::real(inner(psi, cpsi));
    return cpsi - cplx(v) * psi;
}

CVec2 em_step(const CVec2& psi, double dt, double dW, const CMat2& H, const CMat2& C,
              double* norm_dev) {
    if (!(dt > 0.0)) {
        if (dt == 0.0 && dW == 0.0) {
            if (norm_dev) *norm_dev = 0.0;
            return psi;
        }
        throw std::invalid_argument("em_step: dt must be positive");
    }
    const CVec2 next =
        psi + cplx(dt) * drift_diffusive(psi, H, C) + cplx(dW) * diffusion_diffusive(psi, C);
    const double nn = norm(next);
    if (norm_dev) *norm_dev = std::abs(nn - 1.0);
    return cplx(1.0 / nn) * next;
}

namespace {

std::size_t check_grid(const ModelSpec& spec, double T, double dt) {
    spec.validate();
    if (!(T > 0.0)) throw std::invalid_argument("diffusive solver: horizon T must be > 0");
    if (!(dt > 0.0) || dt > 1e-2 * (1.0 + 1e-12))
        throw std::invalid_argument("diffusive solver: dt must satisfy 0 < dt <= 1e-2");
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("diffusive solver: T must be an integer number of dt steps");
    return steps;
}

std::vector<double> draw_increments(std::size_t steps, double dt, std::uint64_t seed,
                                    std::uint64_t stream) {
    RngStream rng(seed, stream);
    std::vector<double> inc(steps);
    const double sd = std::sqrt(dt);
    for (auto& w : inc) w = sd * rng.gaussian();
    return inc;
}

}  // namespace

DiffusivePath solve_diffusive_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                                  const std::vector<double>& increments) {
    if (std::abs(norm(psi0) - 1.0) > kUnitNormTol)
        throw std::invalid_argument("solve_diffusive_sde: psi0 must be a unit vector");
    const std::size_t steps = check_grid(spec, T, dt);
    if (increments.size() != steps)
        throw std::invalid_argument("solve_diffusive_sde: increment count must match the grid");

    DiffusivePath path;
    path.dW = increments;
    path.times.reserve(steps + 1);
    path.pure_states.reserve(steps + 1);
    path.nu_path.reserve(steps + 1);

    CVec2 psi = psi0;
    path.times.push_back(0.0);
    path.pure_states.push_back(psi);
    path.nu_path.push_back(nu(psi, spec.C));
    for (std::size_t k = 0; k < steps; ++k) {
        double dev = 0.0;
        psi = em_step(psi, dt, increments[k], spec.H, spec.C, &dev);
        path.max_norm_deviation = std::max(path.max_norm_deviation, dev);
        path.times.push_back(static_cast<double>(k + 1) * dt);
        path.pure_states.push_back(psi);
        path.nu_path.push_back(nu(psi, spec.C));
    }
    return path;
}

DiffusivePath solve_diffusive_sde(const ModelSpec& spec, const CVec2& psi0, double T, double dt,
                                  std::uint64_t seed, std::uint64_t stream) {
    const std::size_t steps = check_grid(spec, T, dt);
    DiffusivePath path =
        solve_diffusive_sde(spec, psi0, T, dt, draw_increments(steps, dt, seed, stream));
    path.seed = seed;
    path.stream = stream;
    return path;
}

DiffusivePath solve_diffusive_density(const ModelSpec& spec, const CMat2& rho0, double T,
                                      double dt, const std::vector<double>& increments) {
    if (!is_hermitian(rho0, 1e-9) || std::abs(std::real(trace(rho0)) - 1.0) > kUnitNormTol)
        throw std::invalid_argument("solve_diffusive_density: rho0 must be Hermitian trace-one");
    const std::size_t steps = check_grid(spec, T, dt);
    if (increments.size() != steps)
        throw std::invalid_argument("solve_diffusive_density: increment count must match the grid");

    const CMat2 H = spec.H, C = spec.C;
    const CMat2 Cd = adjoint(C);
    const CMat2 CdC = Cd * C;

    DiffusivePath path;
    path.dW = increments;
    path.times.reserve(steps + 1);
    path.density_states.reserve(steps + 1);
    path.nu_path.reserve(steps + 1);

    CMat2 rho = rho0;
    path.times.push_back(0.0);
    path.density_states.push_back(rho);
    path.nu_path.push_back(std::real(trace(C * rho)));
    for (std::size_t k = 0; k < steps; ++k) {
        // L(rho) = -i[H,rho] - {CdagC,rho}/2 + C rho Cdag
        const CMat2 lind = cplx(0, -1) * (H * rho - rho * H) +
                           cplx(-0.5) * (CdC * rho + rho * CdC) + C * rho * Cd;
        const CMat2 crho = C * rho;
        const double signal = 2.0 * std::real(trace(crho));  // Tr[(C+Cdag) rho]
        const CMat2 noise = crho + adjoint(crho) - cplx(signal) * rho;
        CMat2 next = rho + cplx(dt) * lind + cplx(increments[k]) * noise;
        next = cplx(0.5) * (next + adjoint(next));
        const double tt = std::real(trace(next));
        path.max_norm_deviation = std::max(path.max_norm_deviation, std::abs(tt - 1.0));
        rho = cplx(1.0 / tt) * next;
        path.times.push_back(static_cast<double>(k + 1) * dt);
        path.density_states.push_back(rho);
        path.nu_path.push_back(std::real(trace(C * rho)));
    }
    return path;
}

DiffusivePath solve_diffusive_density(const ModelSpec& spec, const CMat2& rho0, double T,
                                      double dt, std::uint64_t seed, std::uint64_t stream) {
    const std::size_t steps = check_grid(spec, T, dt);
    DiffusivePath path =
        solve_diffusive_density(spec, rho0, T, dt, draw_increments(steps, dt, seed, stream));
    path.seed = seed;
    path.stream = stream;
    return path;
}

}  // namespace qtraj
