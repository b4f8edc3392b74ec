#include "qtraj/qmath.hpp"

#include <algorithm>
#include <cmath>

namespace qtraj {

CMat4 CMat4::identity() {
    CMat4 I;
    for (std::size_t i = 0; i < 4; ++i) I(i, i) = cplx(1);
    return I;
}

CVec2 operator+(const CVec2& x, const CVec2& y) { return {x.c0 + y.c0, x.c1 + y.c1}; }
CVec2 operator-(const CVec2& x, const CVec2& y) { return {x.c0 - y.c0, x.c1 - y.c1}; }
CVec2 operator*(cplx s, const CVec2& x) { return {s * x.c0, s * x.c1}; }

CVec2 operator*(const CMat2& M, const CVec2& x) {
    return {M(0, 0) * x.c0 + M(0, 1) * x.c1, M(1, 0) * x.c0 + M(1, 1) * x.c1};
}

CMat2 operator+(const CMat2& A, const CMat2& B) {
    CMat2 C;
    for (std::size_t i = 0; i < 4; ++i) C.a[i] = A.a[i] + B.a[i];
    return C;
}
CMat2 operator-(const CMat2& A, const CMat2& B) {
    CMat2 C;
    for (std::size_t i = 0; i < 4; ++i) C.a[i] = A.a[i] - B.a[i];
    return C;
}
CMat2 operator*(const CMat2& A, const CMat2& B) {
    CMat2 C;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c)
            C(r, c) = A(r, 0) * B(0, c) + A(r, 1) * B(1, c);
    return C;
}
CMat2 operator*(cplx s, const CMat2& A) {
    CMat2 C;
    for (std::size_t i = 0; i < 4; ++i) C.a[i] = s * A.a[i];
    return C;
}

CMat4 operator+(const CMat4& A, const CMat4& B) {
    CMat4 C;
    for (std::size_t i = 0; i < 16; ++i) C.a[i] = A.a[i] + B.a[i];
    return C;
}
CMat4 operator-(const CMat4& A, const CMat4& B) {
    CMat4 C;
    for (std::size_t i = 0; i < 16; ++i) C.a[i] = A.a[i] - B.a[i];
    return C;
}
CMat4 operator*(const CMat4& A, const CMat4& B) {
    CMat4 C;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            cplx s = 0;
            for (std::size_t k = 0; k < 4; ++k) s += A(r, k) * B(k, c);
            C(r, c) = s;
        }
    return C;
}
CMat4 operator*(cplx s, const CMat4& A) {
    CMat4 C;
    for (std::size_t i = 0; i < 16; ++i) C.a[i] = s * A.a[i];
    return C;
}

cplx inner(const CVec2& x, const CVec2& y) {
    return std::conj(x.c0) * y.c0 + std::conj(x.c1) * y.c1;
}
double norm_sq(const CVec2& x) { return std::norm(x.c0) + std::norm(x.c1); }
double norm(const CVec2& x) { return std::sqrt(norm_sq(x)); }

CMat2 adjoint(const CMat2& A) {
    CMat2 B;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) B(r, c) = std::conj(A(c, r));
    return B;
}
CMat4 adjoint(const CMat4& A) {
    CMat4 B;
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) B(r, c) = std::conj(A(c, r));
    return B;
}

cplx trace(const CMat2& A) { return A(0, 0) + A(1, 1); }
cplx trace(const CMat4& A) { return A(0, 0) + A(1, 1) + A(2, 2) + A(3, 3); }

double fro_norm(const CMat2& A) {
    double s = 0;
    for (const auto& z : A.a) s += std::norm(z);
    return std::sqrt(s);
}
double fro_norm(const CMat4& A) {
    double s = 0;
    for (const auto& z : A.a) s += std::norm(z);
    return std::sqrt(s);
}

double op_norm(const CMat2& A) {
    // Largest singular value: sqrt of the largest eigenvalue of A†A.
    const CMat2 M = adjoint(A) * A;  // Hermitian PSD
    const double t = std::real(trace(M));
    const cplx detc = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
    const double d = std::real(detc);
    double disc = t * t / 4.0 - d;
    if (disc < 0) disc = 0;  // roundoff guard
    const double lmax = t / 2.0 + std::sqrt(disc);
    return std::sqrt(std::max(lmax, 0.0));
}

double max_abs_entry(const CMat2& A) {
    double m = 0;
    for (const auto& z : A.a) m = std::max(m, std::abs(z));
    return m;
}
double max_abs_entry(const CMat4& A) {
    double m = 0;
    for (const auto& z : A.a) m = std::max(m, std::abs(z));
    return m;
}

bool is_hermitian(const CMat2& A, double tol) {
    return max_abs_entry(A - adjoint(A)) <= tol;
}
bool is_unitary(const CMat2& A, double tol) {
    return max_abs_entry(adjoint(A) * A - CMat2::identity()) <= tol;
}
bool is_unitary(const CMat4& A, double tol) {
    return max_abs_entry(adjoint(A) * A - CMat4::identity()) <= tol;
}

CMat2 dyad(const CVec2& x, const CVec2& y) {
    CMat2 M;
    M(0, 0) = x.c0 * std::conj(y.c0);
    M(0, 1) = x.c0 * std::conj(y.c1);
    M(1, 0) = x.c1 * std::conj(y.c0);
    M(1, 1) = x.c1 * std::conj(y.c1);
    return M;
}

CMat2 transpose(const CMat2& A) {
    CMat2 B;
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) B(r, c) = A(c, r);
    return B;
}

CMat2 conj(const CMat2& A) {
    CMat2 B;
    for (std::size_t i = 0; i < 4; ++i) B.a[i] = std::conj(A.a[i]);
    return B;
}

CMat4 kron(const CMat2& A, const CMat2& B) {
    CMat4 K;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k)
                for (std::size_t l = 0; l < 2; ++l)
                    K(2 * i + j, 2 * k + l) = A(i, k) * B(j, l);
    return K;
}

namespace {

// Taylor kernel on the scaled matrix; ||M|| <= 0.5 so 24 terms leave a
// truncation error below 1e-25, far under the 1e-12 contract.
template <typename Mat>
Mat exp_taylor(const Mat& M, const Mat& I) {
    Mat sum = I;
    Mat term = I;
    for (int k = 1; k <= 24; ++k) {
        term = (cplx(1.0 / k)) * (term * M);
        sum = sum + term;
    }
    return sum;
}

template <typename Mat>
Mat mat_exp_impl(const Mat& M, const Mat& I, double nrm) {
    int squarings = 0;
    double scale = 1.0;
    while (nrm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }
    Mat E = exp_taylor(cplx(scale) * M, I);
    for (int i = 0; i < squarings; ++i) E = E * E;
    return E;
}

}  // namespace

CMat2 mat_exp(const CMat2& M) { return mat_exp_impl(M, CMat2::identity(), fro_norm(M)); }
CMat4 mat_exp(const CMat4& M) { return mat_exp_impl(M, CMat4::identity(), fro_norm(M)); }

SpectralPair spectral_decompose(const CMat2& A) {
    if (!is_hermitian(A)) throw std::invalid_argument("spectral_decompose: matrix not Hermitian");

    const double a = std::real(A(0, 0));
    const double d = std::real(A(1, 1));
    const cplx b = A(0, 1);  // A(1,0) == conj(b)
    const double h = (a - d) / 2.0;
    const double r = std::sqrt(h * h + std::norm(b));  // half the spectral gap
    const double mean = (a + d) / 2.0;

    const double scale = std::max({std::abs(a), std::abs(d), std::abs(b), 1e-300});
    if (2.0 * r < 1e-10 * scale)
        throw std::domain_error("spectral_decompose: degenerate observable (eigenvalue gap below 1e-10 * scale)");

    SpectralPair sp;
    sp.lambda0 = mean - r;
    sp.lambda1 = mean + r;

    // Eigenvector for lambda0: (A - lambda1 I) v = (lambda0 - lambda1) v on the
    // lambda0 eigenspace; use the numerically larger column of (A - lambda1 I).
    CVec2 v;
    const double a0 = a - sp.lambda1;
    const double d0 = d - sp.lambda1;
    if (std::abs(a0) >= std::abs(d0)) {
        v = {cplx(a0), std::conj(b)};
    } else {
        v = {b, cplx(d0)};
    }
    double n = norm(v);
    if (n == 0.0) {  // b == 0 and A already diagonal; pick the basis vector
        v = (a <= d) ? CVec2{1, 0} : CVec2{0, 1};
        n = 1.0;
    }
    v = cplx(1.0 / n) * v;
    // Phase fix: largest-modulus component real positive.
    cplx piv = (std::abs(v.c0) >= std::abs(v.c1)) ? v.c0 : v.c1;
    if (std::abs(piv) > 0) v = (std::conj(piv) / std::abs(piv)) * v;

    sp.mu = v.c0;
    sp.nu = v.c1;
    sp.P0 = dyad(v, v);
    sp.P1 = CMat2::identity() - sp.P0;
    return sp;
}

double trace_distance(const CMat2& rho, const CMat2& sigma) {
    // (1/2)||D||_1 with D Hermitian: half the sum of |eigenvalues|.
    const CMat2 D = rho - sigma;
    const double a = std::real(D(0, 0));
    const double d = std::real(D(1, 1));
    const double mean = (a + d) / 2.0;
    const double h = (a - d) / 2.0;
    const double r = std::sqrt(h * h + std::norm(D(0, 1)));
    return (std::abs(mean - r) + std::abs(mean + r)) / 2.0;
}

}  // namespace qtraj
