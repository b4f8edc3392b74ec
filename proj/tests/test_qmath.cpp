#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "qtraj/qmath.hpp"
#include "qtraj/rng.hpp"

using namespace qtraj;

namespace {

// Plain truncated Taylor series, no scaling and squaring. Converges to well
// below 1e-14 for the moderate-norm inputs used here; serves as an oracle
// that shares no code path with mat_exp.
CMat2 taylor_exp(const CMat2& M) {
    CMat2 sum = CMat2::identity();
    CMat2 term = CMat2::identity();
    for (int k = 1; k <= 60; ++k) {
        term = cplx(1.0 / k) * (term * M);
        sum = sum + term;
    }
    return sum;
}

CMat4 taylor_exp(const CMat4& M) {
    CMat4 sum = CMat4::identity();
    CMat4 term = CMat4::identity();
    for (int k = 1; k <= 60; ++k) {
        term = cplx(1.0 / k) * (term * M);
        sum = sum + term;
    }
    return sum;
}

cplx rand_cplx(RngStream& rng) { return {2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0}; }

CMat2 rand_mat2(RngStream& rng) {
    CMat2 M;
    for (auto& e : M.a) e = rand_cplx(rng);
    return M;
}

CMat4 rand_mat4(RngStream& rng) {
    CMat4 M;
    for (auto& e : M.a) e = rand_cplx(rng);
    return M;
}

CMat2 rand_hermitian(RngStream& rng) {
    const CMat2 M = rand_mat2(rng);
    return cplx(0.5) * (M + adjoint(M));
}

CVec2 rand_unit(RngStream& rng) {
    const CVec2 v{rand_cplx(rng), rand_cplx(rng)};
    return cplx(1.0 / norm(v)) * v;
}

}  // namespace

TEST_CASE("vector and matrix arithmetic") {
    const CVec2 x{cplx(1, 2), cplx(0, -1)};
    const CVec2 y{cplx(3, 0), cplx(1, 1)};

    // Inner product is conjugate-linear in the first slot.
    CHECK(inner(x, y) == cplx(1, -2) * cplx(3, 0) + cplx(0, 1) * cplx(1, 1));
    CHECK(inner(cplx(0, 2) * x, y) == std::conj(cplx(0, 2)) * inner(x, y));
    CHECK(norm_sq(x) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(norm(x) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-15));

    const CMat2 D = dyad(x, y);
    CHECK(D(0, 0) == x[0] * std::conj(y[0]));
    CHECK(D(1, 0) == x[1] * std::conj(y[0]));
    CHECK(D(0, 1) == x[0] * std::conj(y[1]));
    CHECK(std::abs(trace(dyad(x, x)) - cplx(norm_sq(x))) < 1e-14);

    RngStream rng(11, 0);
    const CMat2 A = rand_mat2(rng), B = rand_mat2(rng);
    CHECK(max_abs_entry(adjoint(A * B) - adjoint(B) * adjoint(A)) < 1e-14);
    CHECK(max_abs_entry(transpose(transpose(A)) - A) == 0.0);
    CHECK(max_abs_entry(conj(conj(A)) - A) == 0.0);
    CHECK(std::abs(trace(A * B) - trace(B * A)) < 1e-14);
}

TEST_CASE("kronecker product indexing") {
    // kron(A,B)[2i+j, 2k+l] = A(i,k) B(j,l); first factor indexes the slow
    // (coarse) 2x2 block structure.
    RngStream rng(12, 0);
    const CMat2 A = rand_mat2(rng), B = rand_mat2(rng);
    const CMat4 K = kron(A, B);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l)
                    CHECK(K(2 * i + j, 2 * k + l) == A(i, k) * B(j, l));
    CHECK(max_abs_entry(kron(CMat2::identity(), CMat2::identity()) - CMat4::identity()) == 0.0);
    // Mixed-product rule.
    const CMat2 C = rand_mat2(rng), D = rand_mat2(rng);
    CHECK(max_abs_entry(kron(A * C, B * D) - kron(A, B) * kron(C, D)) < 1e-13);
}

TEST_CASE("matrix exponential against a plain Taylor oracle") {
    RngStream rng(13, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const CMat2 M = rand_mat2(rng);
        CHECK(max_abs_entry(mat_exp(M) - taylor_exp(M)) < 1e-13);
    }
    for (int trial = 0; trial < 6; ++trial) {
        const CMat4 M = rand_mat4(rng);
        CHECK(max_abs_entry(mat_exp(M) - taylor_exp(M)) < 1e-12);
    }
    CHECK(max_abs_entry(mat_exp(CMat2::zero()) - CMat2::identity()) == 0.0);
    CHECK(max_abs_entry(mat_exp(CMat4::zero()) - CMat4::identity()) == 0.0);
}

TEST_CASE("matrix exponential closed forms and group laws") {
    // exp(-i theta sigma_x) = cos(theta) I - i sin(theta) sigma_x.
    const CMat2 sx{{cplx(0), cplx(1), cplx(1), cplx(0)}};
    for (double theta : {0.3, 1.2, 2.9}) {
        const CMat2 expected =
            cplx(std::cos(theta)) * CMat2::identity() + cplx(0, -std::sin(theta)) * sx;
        CHECK(max_abs_entry(mat_exp(cplx(0, -theta) * sx) - expected) < 1e-14);
    }

    RngStream rng(14, 0);
    const CMat2 M = rand_mat2(rng);
    CHECK(max_abs_entry(mat_exp(cplx(0.7) * M) * mat_exp(cplx(0.3) * M) - mat_exp(M)) < 1e-13);
    CHECK(max_abs_entry(mat_exp(M) * mat_exp(cplx(-1) * M) - CMat2::identity()) < 1e-13);

    // exp(-itH) is unitary for Hermitian H, and large inputs stay accurate
    // through the scaling-and-squaring range reduction.
    const CMat2 H = rand_hermitian(rng);
    CHECK(is_unitary(mat_exp(cplx(0, -1.7) * H)));
    CHECK(is_unitary(mat_exp(cplx(0, -40.0) * H), 1e-10));
}

TEST_CASE("hermitian spectral decomposition") {
    const CMat2 sx{{cplx(0), cplx(1), cplx(1), cplx(0)}};
    const SpectralPair sp = spectral_decompose(sx);
    CHECK(sp.lambda0 == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(sp.lambda1 == doctest::Approx(1.0).epsilon(1e-14));
    // Ascending order puts the +1 eigenprojector second: (1/2) * ones.
    const CMat2 plus{{cplx(0.5), cplx(0.5), cplx(0.5), cplx(0.5)}};
    CHECK(max_abs_entry(sp.P1 - plus) < 1e-14);
    // alpha0 spans the -1 eigenvector with the pinned phase.
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(sp.mu - cplx(r)) < 1e-14);
    CHECK(std::abs(sp.nu - cplx(-r)) < 1e-14);

    const CMat2 photo = CMat2::diag(cplx(0), cplx(1));
    const SpectralPair ph = spectral_decompose(photo);
    CHECK(ph.lambda0 == doctest::Approx(0.0));
    CHECK(ph.lambda1 == doctest::Approx(1.0));
    CHECK(max_abs_entry(ph.P0 - CMat2::diag(cplx(1), cplx(0))) < 1e-14);

    RngStream rng(15, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const CMat2 A = rand_hermitian(rng);
        SpectralPair s;
        try {
            s = spectral_decompose(A);
        } catch (const std::domain_error&) {
            continue;  // a random draw can be near-degenerate
        }
        CHECK(s.lambda0 <= s.lambda1);
        const CMat2 recon = cplx(s.lambda0) * s.P0 + cplx(s.lambda1) * s.P1;
        CHECK(max_abs_entry(recon - A) < 1e-12);
        CHECK(max_abs_entry(s.P0 * s.P0 - s.P0) < 1e-12);
        CHECK(max_abs_entry(s.P0 * s.P1) < 1e-12);
        CHECK(max_abs_entry(s.P0 + s.P1 - CMat2::identity()) < 1e-12);
        // alpha0 is unit and P0 is its dyad; phase pins the larger component
        // real positive.
        CHECK(std::abs(std::norm(s.mu) + std::norm(s.nu) - 1.0) < 1e-12);
        CHECK(max_abs_entry(s.P0 - dyad(CVec2{s.mu, s.nu}, CVec2{s.mu, s.nu})) < 1e-12);
        const cplx piv = std::abs(s.mu) >= std::abs(s.nu) ? s.mu : s.nu;
        CHECK(std::abs(std::imag(piv)) < 1e-12);
        CHECK(std::real(piv) > 0.0);
    }

    CHECK_THROWS_AS(spectral_decompose(CMat2{{cplx(0), cplx(1), cplx(0), cplx(0)}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(spectral_decompose(CMat2::identity()), std::domain_error);
    CHECK_THROWS_AS(spectral_decompose(CMat2::diag(cplx(2.0), cplx(2.0 + 1e-13))),
                    std::domain_error);
}

TEST_CASE("trace distance") {
    const CMat2 g = CMat2::diag(cplx(1), cplx(0));
    const CMat2 e = CMat2::diag(cplx(0), cplx(1));
    CHECK(trace_distance(g, e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(trace_distance(g, g) == 0.0);
    CHECK(trace_distance(CMat2::diag(cplx(0.7), cplx(0.3)), CMat2::diag(cplx(0.5), cplx(0.5))) ==
          doctest::Approx(0.2).epsilon(1e-14));

    RngStream rng(16, 0);
    const CVec2 a = rand_unit(rng);
    // Orthogonal unit vectors sit at distance one.
    const CVec2 b{-std::conj(a[1]), std::conj(a[0])};
    CHECK(trace_distance(dyad(a, a), dyad(b, b)) == doctest::Approx(1.0).epsilon(1e-12));

    // Unitary invariance.
    const CMat2 rho = cplx(0.5) * (dyad(a, a) + dyad(b, b));
    const CMat2 sig = dyad(a, a);
    const CMat2 U = mat_exp(cplx(0, -0.9) * rand_hermitian(rng));
    CHECK(trace_distance(U * rho * adjoint(U), U * sig * adjoint(U)) ==
          doctest::Approx(trace_distance(rho, sig)).epsilon(1e-12));
}

TEST_CASE("operator norm") {
    CHECK(op_norm(CMat2::diag(cplx(2), cplx(-3))) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(op_norm(CMat2{{cplx(0), cplx(1), cplx(0), cplx(0)}}) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(op_norm(CMat2::zero()) == 0.0);

    RngStream rng(17, 0);
    const CMat2 A = rand_mat2(rng);
    const CMat2 U = mat_exp(cplx(0, -1.3) * rand_hermitian(rng));
    CHECK(op_norm(U * A) == doctest::Approx(op_norm(A)).epsilon(1e-12));
    CHECK(std::sqrt(2.0) * op_norm(A) >= fro_norm(A) - 1e-12);
    CHECK(op_norm(A) <= fro_norm(A) + 1e-12);

    // The norm is attained: no unit vector beats it, some get close.
    double best = 0.0;
    for (int trial = 0; trial < 400; ++trial) {
        const CVec2 v = rand_unit(rng);
        const double len = norm(A * v);
        CHECK(len <= op_norm(A) + 1e-12);
        best = std::max(best, len);
    }
    CHECK(best > 0.9 * op_norm(A));
}

TEST_CASE("structure predicates") {
    RngStream rng(18, 0);
    const CMat2 H = rand_hermitian(rng);
    CHECK(is_hermitian(H));
    CHECK_FALSE(is_hermitian(H + CMat2{{cplx(0), cplx(1e-9), cplx(0), cplx(0)}}));
    CHECK(is_unitary(mat_exp(cplx(0, -2.1) * H)));
    CHECK_FALSE(is_unitary(cplx(1.1) * CMat2::identity()));
    CHECK(is_unitary(mat_exp(kron(cplx(0, -1) * H, CMat2::identity()))));
    CHECK(max_abs_entry(H - adjoint(H)) < 1e-15);
}
