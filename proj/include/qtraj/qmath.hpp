#pragma once

// Small dense complex linear algebra for two-level open-system simulation:
// 2-vectors, 2x2 and 4x4 complex matrices, Hermitian spectral decomposition,
// matrix exponential, and state metrics. Everything is fixed-size and
// allocation-free; tolerances are documented per function.

#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtraj {

using cplx = std::complex<double>;

constexpr double kHermTol = 1e-12;     // Hermiticity / unitarity entrywise tolerance
constexpr double kUnitNormTol = 1e-9;  // wave-function normalization tolerance

struct CVec2 {
    cplx c0{}, c1{};

    cplx& operator[](std::size_t i) { return i == 0 ? c0 : c1; }
    const cplx& operator[](std::size_t i) const { return i == 0 ? c0 : c1; }
};

// Row-major 2x2 complex matrix.
struct CMat2 {
    std::array<cplx, 4> a{};

    cplx& operator()(std::size_t r, std::size_t c) { return a[2 * r + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a[2 * r + c]; }

    static CMat2 zero() { return CMat2{}; }
    static CMat2 identity() { return CMat2{{cplx(1), cplx(0), cplx(0), cplx(1)}}; }
    static CMat2 diag(cplx d0, cplx d1) { return CMat2{{d0, cplx(0), cplx(0), d1}}; }
};

// Row-major 4x4 complex matrix.
struct CMat4 {
    std::array<cplx, 16> a{};

    cplx& operator()(std::size_t r, std::size_t c) { return a[4 * r + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a[4 * r + c]; }

    static CMat4 zero() { return CMat4{}; }
    static CMat4 identity();
};

// Eigenpair of a 2x2 Hermitian observable, eigenvalues ascending.
// P0 projects on alpha0 = (mu, nu), ||alpha0|| = 1, phase fixed so the
// largest-modulus component of alpha0 is real positive.
struct SpectralPair {
    double lambda0 = 0.0, lambda1 = 0.0;  // lambda0 <= lambda1
    CMat2 P0, P1;
    cplx mu{}, nu{};                      // alpha0 = (mu, nu)
};

// ---- CVec2 / CMat2 arithmetic ----

CVec2 operator+(const CVec2& x, const CVec2& y);
CVec2 operator-(const CVec2& x, const CVec2& y);
CVec2 operator*(cplx s, const CVec2& x);
CVec2 operator*(const CMat2& M, const CVec2& x);

CMat2 operator+(const CMat2& A, const CMat2& B);
CMat2 operator-(const CMat2& A, const CMat2& B);
CMat2 operator*(const CMat2& A, const CMat2& B);
CMat2 operator*(cplx s, const CMat2& A);

CMat4 operator+(const CMat4& A, const CMat4& B);
CMat4 operator-(const CMat4& A, const CMat4& B);
CMat4 operator*(const CMat4& A, const CMat4& B);
CMat4 operator*(cplx s, const CMat4& A);

// <x, y> with the physics convention: conjugate-linear in the first slot.
cplx inner(const CVec2& x, const CVec2& y);
double norm(const CVec2& x);
double norm_sq(const CVec2& x);

CMat2 adjoint(const CMat2& A);
CMat4 adjoint(const CMat4& A);
cplx trace(const CMat2& A);
cplx trace(const CMat4& A);

// Frobenius norm.
double fro_norm(const CMat2& A);
double fro_norm(const CMat4& A);
// Spectral (operator) norm via singular values.
double op_norm(const CMat2& A);

double max_abs_entry(const CMat2& A);
double max_abs_entry(const CMat4& A);

bool is_hermitian(const CMat2& A, double tol = kHermTol);
bool is_unitary(const CMat2& A, double tol = kHermTol);
bool is_unitary(const CMat4& A, double tol = kHermTol);

// |x><y|
CMat2 dyad(const CVec2& x, const CVec2& y);

CMat2 transpose(const CMat2& A);
CMat2 conj(const CMat2& A);

// Kronecker product, kron(A,B)[2i+j, 2k+l] = A(i,k) B(j,l).
CMat4 kron(const CMat2& A, const CMat2& B);

// exp(M) by scaling-and-squaring with a truncated Taylor kernel.
// Backward error <= 1e-12 for ||M||_fro <= 50.
CMat2 mat_exp(const CMat2& M);
CMat4 mat_exp(const CMat4& M);

// Eigendecomposition of a Hermitian 2x2 matrix, eigenvalues ascending.
// Throws std::invalid_argument if A is not Hermitian (tol 1e-12) and
// std::domain_error if the spectral gap is below 1e-10 * ||A|| (degenerate
// observable: the two-outcome measurement is ill-defined).
SpectralPair spectral_decompose(const CMat2& A);

// Trace distance (1/2)||rho - sigma||_1 between Hermitian matrices.
double trace_distance(const CMat2& rho, const CMat2& sigma);

}  // namespace qtraj
