#include "qtraj/model.hpp"

namespace qtraj {

void ModelSpec::validate() const {
    if (!is_hermitian(H)) throw std::invalid_argument("ModelSpec: H must be Hermitian");
    if (!is_hermitian(A)) throw std::invalid_argument("ModelSpec: A must be Hermitian");
    if (!(tau > 0.0)) throw std::invalid_argument("ModelSpec: tau must be positive");
    if (eta0 < 0.0 || eta1 < 0.0 || std::abs(eta0 + eta1 - 1.0) > 1e-12)
        throw std::invalid_argument("ModelSpec: eta must be diagonal probabilities summing to 1");
    for (const auto& z : H.a)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("ModelSpec: H has non-finite entries");
    for (const auto& z : C.a)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument("ModelSpec: C has non-finite entries");
}

ModelSpec equilibrium_model(double n_interactions, const CMat2& observable) {
    if (!(n_interactions >= 1.0))
        throw std::invalid_argument("equilibrium_model: n must be >= 1");
    ModelSpec m;
    m.H = CMat2::diag(1.0, 0.0);
    m.C = matrix_unit(1, 0);  // |X^0><X^1|, lowering
    m.gamma0 = 0.0;
    m.gamma1 = 0.0;
    m.eta0 = 1.0;
    m.eta1 = 0.0;
    m.A = observable;
    m.tau = 1.0 / n_interactions;
    return m;
}

}  // namespace qtraj
