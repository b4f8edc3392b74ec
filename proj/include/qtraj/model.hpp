#pragma once

// Physical model description for a two-level system monitored through
// repeated interactions with fresh two-level probes.

#include <cmath>
#include <stdexcept>

#include "qtraj/qmath.hpp"

namespace qtraj {

// Matrix units a^i_j = |X^j><X^i| in the probe basis X^0, X^1:
// a^i_j X^k = delta_{ik} X^j.
inline CMat2 matrix_unit(int i, int j) {
    CMat2 M;
    M(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = cplx(1);
    return M;
}

inline CMat2 sigma_x() { return CMat2{{cplx(0), cplx(1), cplx(1), cplx(0)}}; }

// Canonical probe observables for the two detection schemes.
inline CMat2 counting_observable() { return matrix_unit(1, 1); }   // photodetection
inline CMat2 quadrature_observable() { return sigma_x(); }         // homodyne

// The two detection schemes and their continuous-time limits: counting
// drives the jump equation, quadrature drives the diffusive one.
enum class DetectionScheme { counting, quadrature };

inline CMat2 observable_for(DetectionScheme s) {
    return s == DetectionScheme::counting ? counting_observable() : quadrature_observable();
}

struct ModelSpec {
    CMat2 H;              // system Hamiltonian, hbar = 1
    CMat2 C;              // coupling operator
    double gamma0 = 0.0;  // probe level energies
    double gamma1 = 0.0;
    double eta0 = 1.0;    // probe reference state, diagonal probabilities
    double eta1 = 0.0;
    CMat2 A;              // measured probe observable
    double tau = 1.0;     // interaction duration; n = 1/tau

    double n() const { return 1.0 / tau; }

    // Throws std::invalid_argument on violated structural requirements.
    void validate() const;
};

// Two-level emitter with spontaneous decay: H = diag(1,0), C = a^1_0
// (lowering), gamma = 0. The ground state is invariant and every
// trajectory returns to it.
ModelSpec equilibrium_model(double n_interactions, const CMat2& observable);

inline ModelSpec equilibrium_counting_model(double n) {
    return equilibrium_model(n, counting_observable());
}
inline ModelSpec equilibrium_quadrature_model(double n) {
    return equilibrium_model(n, quadrature_observable());
}

}  // namespace qtraj
