#pragma once

// Independent test-side oracles. Everything here is closed-form scalar/2x2
// arithmetic on plain arrays — deliberately sharing no code with the library
// under test.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 mul2(const Mat2& a, const Mat2& b) {
    Mat2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

/// exp(M) for 2x2 M by the eigenvalue closed form: with mean = tr/2 and
/// Delta = sqrt(tr^2/4 - det) (complex), exp(M) = e^mean (cosh(Delta) I +
/// sinhc(Delta) (M - mean I)).
inline Mat2 expm2(const Mat2& M) {
    using C = std::complex<double>;
    double tr = M[0][0] + M[1][1];
    double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    double mean = tr / 2.0;
    C Delta = std::sqrt(C(mean * mean - det, 0.0));
    C ch = std::cosh(Delta);
    C sc = std::abs(Delta) < 1e-12 ? C(1.0, 0.0) : std::sinh(Delta) / Delta;
    Mat2 out{};
    double em = std::exp(mean);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            C v = ch * (i == j ? 1.0 : 0.0) + sc * (M[i][j] - (i == j ? mean : 0.0));
            out[i][j] = em * v.real();
        }
    return out;
}

inline Mat2 scale2(const Mat2& M, double s) {
    Mat2 out = M;
    for (auto& row : out)
        for (auto& v : row) v *= s;
    return out;
}

/// Spectral radius of a real 2x2 matrix (eigenvalue closed form).
inline double rho2(const Mat2& M) {
    using C = std::complex<double>;
    double tr = M[0][0] + M[1][1];
    double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
    C Delta = std::sqrt(C(tr * tr / 4.0 - det, 0.0));
    return std::max(std::abs(C(tr / 2.0, 0.0) + Delta), std::abs(C(tr / 2.0, 0.0) - Delta));
}

/// Eigenvalues of a symmetric 2x2 matrix, descending.
inline std::array<double, 2> sym_eig2(double a, double b, double d) {
    double mean = (a + d) / 2.0;
    double r = std::sqrt((a - d) * (a - d) / 4.0 + b * b);
    return {mean + r, mean - r};
}

/// Larger root of x^2 - p x - q = 0.
inline double quad_root(double p, double q) { return (p + std::sqrt(p * p + 4.0 * q)) / 2.0; }

/// Printed closed form of the demo system's averaged value for the unit
/// 2-periodic signal: -2 + 100 (1 - e^{-0.2})^{-1} (1 - e^{-0.1})^2.
inline double demo_lambda_closed_form() {
    double a = 1.0 - std::exp(-0.2);
    double b = 1.0 - std::exp(-0.1);
    return -2.0 + 100.0 * b * b / a;
}

/// Demo per-period flow of the eps-scaled system for the rescaled signal
/// (dwell eps in each mode): product of two explicit 2x2 exponentials.
inline Mat2 demo_period_flow(double eps) {
    Mat2 M1 = {{{-1.0, 1.0}, {0.0 / eps, -0.1 / eps}}};
    M1[1][0] = 0.0;
    Mat2 M2 = {{{-3.0, 0.0}, {2.0 / eps, -0.1 / eps}}};
    return mul2(expm2(scale2(M2, eps)), expm2(scale2(M1, eps)));
}

/// Fine-grid scalar reachability for the demo fast dynamics at x = 1:
/// y' = -0.1 y + c with c in {0, 2}; every grid point of [lo, hi] reachable
/// and invariant. Returns the reachable interval endpoints {0, 20}.
inline std::vector<double> demo_kset_grid(double step = 1e-3) {
    // dy/dt sign analysis: c = 2 pushes toward 20, c = 0 toward 0, so the
    // reachable set from 0 is dense in [0, 20]; enumerate the grid.
    std::vector<double> g;
    for (double y = 0.0; y <= 20.0 + 1e-12; y += step) g.push_back(y);
    return g;
}

}  // namespace oracle
