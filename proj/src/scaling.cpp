#include "qtraj/scaling.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "qtraj/belavkin_diffusive.hpp"
#include "qtraj/belavkin_jump.hpp"

namespace qtraj {

namespace {

ModelSpec scan_spec(const CMat2& H, const CMat2& C, double gamma0, double gamma1, double n,
                    const CMat2& A) {
    ModelSpec m;
    m.H = H;
    m.C = C;
    m.gamma0 = gamma0;
    m.gamma1 = gamma1;
    m.eta0 = 1.0;
    m.eta1 = 0.0;
    m.A = A;
    m.tau = 1.0 / n;
    return m;
}

}  // namespace

InteractionUnitary build_scaled_unitary(const CMat2& H, const CMat2& C,
                                        double gamma0, double gamma1, double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("build_scaled_unitary: n must be >= 1");
    return build_unitary(scan_spec(H, C, gamma0, gamma1, n, counting_observable()));
}

AsymptoticBlocks asymptotic_blocks(const CMat2& H, const CMat2& C,
                                   double gamma0, double gamma1, double n) {
    if (!(n >= 1.0)) throw std::invalid_argument("asymptotic_blocks: n must be >= 1");
    const CMat2 I = CMat2::identity();
    const CMat2 Cd = adjoint(C);
    const cplx mi(0, -1);
    const double inv_n = 1.0 / n;
    const double inv_s = 1.0 / std::sqrt(n);
    AsymptoticBlocks b;
    b.u00 = I + cplx(inv_n) * (mi * H + cplx(0, -gamma0) * I + cplx(-0.5) * (Cd * C));
    b.u01 = (mi * inv_s) * C;
    b.u10 = (mi * inv_s) * Cd;
    b.u11 = I + cplx(inv_n) * (mi * H + cplx(0, -gamma1) * I + cplx(-0.5) * (C * Cd));
    return b;
}

ResidualReport residual_scan(const CMat2& H, const CMat2& C, double gamma0, double gamma1,
                             const std::vector<double>& n_list) {
    if (n_list.size() < 2)
        throw std::invalid_argument("residual_scan: need at least 2 values of n");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (!(n_list[i] > n_list[i - 1]))
            throw std::invalid_argument("residual_scan: n_list must be strictly increasing");

    ResidualReport rep;
    rep.entries.reserve(n_list.size());
    for (double n : n_list) {
        const InteractionUnitary u = build_scaled_unitary(H, C, gamma0, gamma1, n);
        const AsymptoticBlocks b = asymptotic_blocks(H, C, gamma0, gamma1, n);
        ResidualEntry e;
        e.n = n;
        e.r00 = op_norm(u.u(0, 0) - b.u00);
        e.r01 = op_norm(u.u(0, 1) - b.u01);
        e.r10 = op_norm(u.u(1, 0) - b.u10);
        e.r11 = op_norm(u.u(1, 1) - b.u11);
        e.n_r00 = n * e.r00;
        e.n32_r01 = std::pow(n, 1.5) * e.r01;
        rep.entries.push_back(e);
    }
    return rep;
}

std::string ResidualReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "n,r00,r01,r10,r11,n_r00,n32_r01\n";
    for (const auto& e : entries)
        os << e.n << ',' << e.r00 << ',' << e.r01 << ',' << e.r10 << ',' << e.r11 << ','
           << e.n_r00 << ',' << e.n32_r01 << '\n';
    return os.str();
}

double intensity_mu(const CVec2& psi, const CMat2& C) { return intensity(psi, C); }

double quadrature_nu(const CVec2& psi, const CMat2& C) { return nu(psi, C); }

ProbabilityExpansion discrete_probability_expansion(const CMat2& H, const CMat2& C,
                                                    double gamma0, double gamma1,
                                                    const CVec2& psi, DetectionScheme kind,
                                                    double n) {
    const CMat2 A =
        kind == DetectionScheme::counting ? counting_observable() : quadrature_observable();
    const ModelSpec spec = scan_spec(H, C, gamma0, gamma1, n, A);
    const InteractionUnitary u = build_unitary(spec);
    const MeasurementSuperops sup = measurement_superops(u, 1.0, 0.0, A);

    ProbabilityExpansion pe;
    pe.p_exact = norm_sq(sup.F0 * psi);
    pe.q_exact = norm_sq(sup.F1 * psi);
    if (kind == DetectionScheme::counting) {
        const double mu = intensity_mu(psi, C);
        pe.q_asym = mu / n;
        pe.p_asym = 1.0 - pe.q_asym;
    } else {
        const double nu = quadrature_nu(psi, C);
        pe.p_asym = 0.5 + nu / std::sqrt(n);
        pe.q_asym = 0.5 - nu / std::sqrt(n);
    }
    return pe;
}

}  // namespace qtraj
