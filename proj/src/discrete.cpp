#include "qtraj/discrete.hpp"

#include <cmath>
#include <stdexcept>

namespace qtraj {

CMat4 build_total_hamiltonian(const ModelSpec& spec, double coupling_scale) {
    spec.validate();
    const CMat2& H = spec.H;
    const CMat2 Cd = adjoint(spec.C);
    CMat4 T;
    // Probe sector (i -> j) block at rows 2j.., cols 2i..
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
            T(r, c) = H(r, c) + (r == c ? cplx(spec.gamma0) : cplx(0));
            T(2 + r, 2 + c) = H(r, c) + (r == c ? cplx(spec.gamma1) : cplx(0));
            T(2 + r, c) = coupling_scale * spec.C(r, c);   // X_0 -> X_1 carries C
            T(r, 2 + c) = coupling_scale * Cd(r, c);       // X_1 -> X_0 carries C^dag
        }
    return T;
}

InteractionUnitary build_unitary(const ModelSpec& spec) {
    const double scale = std::sqrt(1.0 / spec.tau);
    const CMat4 T = build_total_hamiltonian(spec, scale);
    InteractionUnitary u;
    u.full = mat_exp(cplx(0, -spec.tau) * T);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (std::size_t r = 0; r < 2; ++r)
                for (std::size_t c = 0; c < 2; ++c)
                    u.block[i][j](r, c) = u.full(2 * static_cast<std::size_t>(j) + r,
                                                 2 * static_cast<std::size_t>(i) + c);
    return u;
}

std::function<CMat2(const CMat2&)> kraus_channel(const InteractionUnitary& u,
                                                 double eta0, double eta1) {
    const CMat2 k00 = u.u(0, 0), k01 = u.u(0, 1), k10 = u.u(1, 0), k11 = u.u(1, 1);
    return [=](const CMat2& rho) {
        CMat2 out = cplx(eta0) * (k00 * rho * adjoint(k00) + k01 * rho * adjoint(k01));
        if (eta1 > 0.0)
            out = out + cplx(eta1) * (k10 * rho * adjoint(k10) + k11 * rho * adjoint(k11));
        return out;
    };
}

CMat2 MeasurementSuperops::apply(int outcome, const CMat2& rho) const {
    const CMat2& P = outcome == 0 ? spectral.P0 : spectral.P1;
    CMat2 out;
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t l = 0; l < 2; ++l) {
            const cplx w = P(l, j);
            if (w == cplx(0)) continue;
            if (eta0 > 0.0)
                out = out + (w * eta0) * (kraus[0][j] * rho * adjoint(kraus[0][l]));
            if (eta1 > 0.0)
                out = out + (w * eta1) * (kraus[1][j] * rho * adjoint(kraus[1][l]));
        }
    return out;
}

double MeasurementSuperops::branch_probability(int outcome, const CMat2& rho) const {
    return std::real(trace(apply(outcome, rho)));
}

MeasurementSuperops measurement_superops(const InteractionUnitary& u,
                                         double eta0, double eta1, const CMat2& A) {
    MeasurementSuperops sup;
    sup.spectral = spectral_decompose(A);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) sup.kraus[i][j] = u.u(i, j);
    sup.eta0 = eta0;
    sup.eta1 = eta1;
    sup.pure_ok = (eta1 == 0.0);
    if (sup.pure_ok) {
        const cplx mu = sup.spectral.mu, nu = sup.spectral.nu;
        sup.F0 = std::conj(mu) * u.u(0, 0) + std::conj(nu) * u.u(0, 1);
        sup.F1 = nu * u.u(0, 0) - mu * u.u(0, 1);  // alpha_1 = (conj(nu), -conj(mu))
    }
    return sup;
}

std::pair<int, CMat2> step_density(const CMat2& rho, const MeasurementSuperops& sup,
                                   RngStream& rng, double* norm_dev) {
    const CMat2 b0 = sup.apply(0, rho);
    const CMat2 b1 = sup.apply(1, rho);
    const double p = std::real(trace(b0));
    const double q = std::real(trace(b1));
    // Both branches together reproduce the unconditioned channel, so the
    // total weight is exactly 1 up to arithmetic noise.
    if (norm_dev) *norm_dev = std::abs(p + q - 1.0);
    const double draw = rng.uniform();
    const int i = draw < p ? 0 : 1;
    const double w = i == 0 ? p : q;
    if (w < 1e-14) throw std::logic_error("step_density: drawn branch has vanishing weight");
    return {i, cplx(1.0 / w) * (i == 0 ? b0 : b1)};
}

std::pair<int, CVec2> step_pure(const CVec2& psi, const MeasurementSuperops& sup,
                                RngStream& rng, double* norm_dev) {
    if (!sup.pure_ok)
        throw std::invalid_argument(
            "step_pure: unsupported configuration, the pure-state form needs the probe "
            "in its ground level (eta0 = 1)");
    const CVec2 f0 = sup.F0 * psi;
    const CVec2 f1 = sup.F1 * psi;
    const double p = norm_sq(f0);
    const double q = norm_sq(f1);
    if (norm_dev) *norm_dev = std::abs(p + q - 1.0);
    const double draw = rng.uniform();
    const int i = draw < p ? 0 : 1;
    const double w = i == 0 ? p : q;
    if (w < 1e-14) throw std::logic_error("step_pure: drawn branch has vanishing weight");
    return {i, cplx(1.0 / std::sqrt(w)) * (i == 0 ? f0 : f1)};
}

namespace {

template <typename State, typename Step>
DiscreteTrajectory run_impl(const ModelSpec& spec, const State& s0, std::size_t steps,
                            std::uint64_t seed, std::uint64_t stream,
                            std::vector<State> DiscreteTrajectory::*field, Step step) {
    spec.validate();
    const InteractionUnitary u = build_unitary(spec);
    const MeasurementSuperops sup = measurement_superops(u, spec.eta0, spec.eta1, spec.A);
    RngStream rng(seed, stream);

    DiscreteTrajectory tr;
    tr.seed = seed;
    tr.stream = stream;
    auto& states = tr.*field;
    states.reserve(steps + 1);
    states.push_back(s0);
    tr.outcomes.reserve(steps);
    tr.p.reserve(steps);
    tr.q.reserve(steps);

    State s = s0;
    for (std::size_t k = 0; k < steps; ++k) {
        double p0, q0;
        if constexpr (std::is_same_v<State, CVec2>) {
            p0 = norm_sq(sup.F0 * s);
            q0 = norm_sq(sup.F1 * s);
        } else {
            p0 = sup.branch_probability(0, s);
            q0 = sup.branch_probability(1, s);
        }
        double dev = 0.0;
        auto [i, next] = step(s, sup, rng, &dev);
        tr.outcomes.push_back(i);
        tr.p.push_back(p0);
        tr.q.push_back(q0);
        // Defensive renormalization; the pre-renormalization deviation is the
        // quantity under test and must stay below 1e-9.
        if constexpr (std::is_same_v<State, CVec2>) {
            const double nn = norm(next);
            dev = std::max(dev, std::abs(nn - 1.0));
            s = cplx(1.0 / nn) * next;
        } else {
            const double tt = std::real(trace(next));
            dev = std::max(dev, std::abs(tt - 1.0));
            s = cplx(1.0 / tt) * next;
        }
        tr.max_norm_deviation = std::max(tr.max_norm_deviation, dev);
        states.push_back(s);
    }
    return tr;
}

}  // namespace

DiscreteTrajectory run_discrete(const ModelSpec& spec, const CVec2& psi0, std::size_t steps,
                                std::uint64_t seed, std::uint64_t stream) {
    if (std::abs(norm(psi0) - 1.0) > kUnitNormTol)
        throw std::invalid_argument("run_discrete: psi0 must be a unit vector");
    return run_impl(spec, psi0, steps, seed, stream, &DiscreteTrajectory::pure_states,
                    [](const CVec2& s, const MeasurementSuperops& sup, RngStream& r, double* d) {
                        return step_pure(s, sup, r, d);
                    });
}

DiscreteTrajectory run_discrete(const ModelSpec& spec, const CMat2& rho0, std::size_t steps,
                                std::uint64_t seed, std::uint64_t stream) {
    if (std::abs(std::real(trace(rho0)) - 1.0) > kUnitNormTol || !is_hermitian(rho0, 1e-9))
        throw std::invalid_argument("run_discrete: rho0 must be a Hermitian trace-one matrix");
    return run_impl(spec, rho0, steps, seed, stream, &DiscreteTrajectory::density_states,
                    [](const CMat2& s, const MeasurementSuperops& sup, RngStream& r, double* d) {
                        return step_density(s, sup, r, d);
                    });
}

}  // namespace qtraj
