#pragma once

// Dense real-matrix kernel: exponentials, exponential integrals, spectral
// quantities, logarithmic norm, guarded inversion. All sizes here are
// desk-scale (n+m <= ~20), so we use dense Eigen throughout.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace slyap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Thrown when a matrix that must be inverted is singular or numerically
/// close to singular. Carries the role of the offending matrix.
class SingularMatrixError : public Error {
public:
    explicit SingularMatrixError(const std::string& role)
        : Error(role + " is singular or near-singular"), role_(role) {}
    const std::string& role() const { return role_; }

private:
    std::string role_;
};

/// Refusal on numerical/assumption grounds (CLI exit code 2).
class NumericalRefusal : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Reciprocal condition estimate below this triggers SingularMatrixError.
inline constexpr double kSingularRcond = 1e-12;

inline bool is_finite(const Matrix& M) { return M.allFinite(); }

inline void require_square(const Matrix& M, const char* what) {
    if (M.rows() != M.cols())
        throw DimensionError(std::string(what) + ": matrix must be square, got " +
                             std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
}

/// Spectral (Euclidean-induced) operator norm, sqrt of rho(M^T M).
inline double op_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M.transpose() * M);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

/// e^{Mt} by scaling-and-squaring with the degree-13 Pade approximant
/// (Eigen's MatrixFunctions backend).
inline Matrix mat_exp(const Matrix& M, double t = 1.0) {
    require_square(M, "mat_exp");
    if (!std::isfinite(t)) throw Error("mat_exp: non-finite time");
    if (t == 0.0) return Matrix::Identity(M.rows(), M.cols());
    return Matrix((M * t).exp());
}

/// Largest eigenvalue modulus.
inline double spectral_radius(const Matrix& M) {
    require_square(M, "spectral_radius");
    if (M.rows() == 0) return 0.0;
    Eigen::EigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Largest real part among the eigenvalues (spectral abscissa).
inline double spectral_abscissa(const Matrix& M) {
    require_square(M, "spectral_abscissa");
    Eigen::EigenSolver<Matrix> es(M, false);
    return es.eigenvalues().real().maxCoeff();
}

/// Euclidean logarithmic norm: largest eigenvalue of (M + M^T)/2.
/// Guarantees |e^{Mt}| <= e^{t log_norm(M)} for t >= 0.
inline double log_norm(const Matrix& M) {
    require_square(M, "log_norm");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
    return es.eigenvalues().maxCoeff();
}

/// Guarded inverse. `role` names the matrix in the singularity error.
inline Matrix invert(const Matrix& M, const std::string& role = "matrix") {
    require_square(M, "invert");
    Eigen::JacobiSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0 || s(s.size() - 1) / s(0) < kSingularRcond)
        throw SingularMatrixError(role);
    return M.inverse();
}

/// Phi = e^{Dh} and J = int_0^h e^{D(h-s)} C ds via the augmented block
/// exponential exp(h [[D, C], [0, 0]]).
struct ForcedIntegral {
    Matrix Phi;  // m x m
    Matrix J;    // m x n
};

inline ForcedIntegral exp_with_forced_integral(const Matrix& D, const Matrix& C, double h) {
    require_square(D, "exp_with_forced_integral");
    const auto m = D.rows();
    const auto n = C.cols();
    if (C.rows() != m)
        throw DimensionError("exp_with_forced_integral: C must have as many rows as D");
    if (!(h >= 0.0)) throw Error("exp_with_forced_integral: h must be >= 0");
    Matrix G = Matrix::Zero(m + n, m + n);
    G.topLeftCorner(m, m) = D;
    G.topRightCorner(m, n) = C;
    Matrix X = mat_exp(G, h);
    return {X.topLeftCorner(m, m), X.topRightCorner(m, n)};
}

}  // namespace slyap
