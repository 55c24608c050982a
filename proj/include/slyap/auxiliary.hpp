#pragma once

// Auxiliary systems derived from a block system: the reduced (slow) modes
// A - B D^{-1} C, the averaged matrices Lambda(T, sigma) built from one
// switching period, the first-order expansion of the period flow in epsilon,
// and the lifting of an instability certificate back to Sigma_eps.

#include "slyap/assumption.hpp"
#include "slyap/flows.hpp"
#include "slyap/matkit.hpp"
#include "slyap/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

namespace slyap {

/// Lambda(T, sigma) together with the pieces it is assembled from:
/// Lambda = (Lambda1 + Lambda2 (I - PhiD)^{-1} Lambda0) / T.
struct LambdaParts {
    Matrix Lambda0;   // m x n, int_0^T Phi_D(T,s) C(s) ds
    Matrix Lambda1;   // n x n, int_0^T (A(s) + B(s) Lambda0(s)) ds
    Matrix Lambda2;   // n x m, int_0^T B(s) Phi_D(s,0) ds
    Matrix PhiD;      // m x m, Phi_D(T,0)
    Matrix Lambda;    // n x n
    double T = 0.0;
    std::uint64_t signal_digest = 0;
};

namespace detail {

// Blocks of exp(h [[D, 0, C], [I, 0, 0], [0, 0, 0]]):
//   Phi = e^{Dh}
//   E   = int_0^h e^{Du} du
//   J   = int_0^h e^{D(h-u)} C du        (Lambda0 over one piece from zero)
//   W   = int_0^h int_0^u e^{D(u-v)} C dv du
struct PieceIntegrals {
    Matrix Phi, E, J, W;
};

inline PieceIntegrals piece_integrals(const Matrix& D, const Matrix& C, double h) {
    const auto m = D.rows();
    const auto n = C.cols();
    Matrix G = Matrix::Zero(2 * m + n, 2 * m + n);
    G.block(0, 0, m, m) = D;
    G.block(0, 2 * m, m, n) = C;
    G.block(m, 0, m, m) = Matrix::Identity(m, m);
    Matrix X = mat_exp(G, h);
    return {X.block(0, 0, m, m), X.block(m, 0, m, m), X.block(0, 2 * m, m, n),
            X.block(m, 2 * m, m, n)};
}

}  // namespace detail

/// Accumulates Lambda0, Lambda1, Lambda2 piecewise with one augmented
/// exponential per piece; no quadrature error beyond the kernel tolerance.
inline LambdaParts lambda_parts(const BlockSystem& sys, const PwcSignal& sig) {
    if (sig.pieces.empty()) throw Error("lambda_parts: empty signal");
    const int n = sys.n, m = sys.m;
    Matrix L0 = Matrix::Zero(m, n);           // Lambda0(s, sigma), running
    Matrix Lam1 = Matrix::Zero(n, n);
    Matrix Lam2 = Matrix::Zero(n, m);
    Matrix PhiLeft = Matrix::Identity(m, m);  // Phi_D(s, 0), running
    for (const auto& p : sig.pieces) {
        if (p.mode < 0 || p.mode >= (int)sys.modes.size())
            throw Error("lambda_parts: mode index out of range");
        const BlockMode& mode = sys.modes[p.mode];
        auto pi = detail::piece_integrals(mode.D, mode.C, p.dwell);
        // In-piece Lambda0(s) = e^{Du} L0 + J(u); its integral over the piece
        // is E L0 + W, so Lambda1 needs no quadrature.
        Lam1 += mode.A * p.dwell + mode.B * (pi.E * L0 + pi.W);
        Lam2 += mode.B * pi.E * PhiLeft;
        L0 = pi.Phi * L0 + pi.J;
        PhiLeft = pi.Phi * PhiLeft;
    }
    LambdaParts parts;
    parts.T = sig.total_duration();
    parts.signal_digest = signal_digest(sig);
    parts.Lambda0 = L0;
    parts.Lambda1 = Lam1;
    parts.Lambda2 = Lam2;
    parts.PhiD = PhiLeft;
    Matrix S;
    try {
        S = invert(Matrix::Identity(m, m) - parts.PhiD, "I - Phi_D(T,0)");
    } catch (const SingularMatrixError&) {
        throw SingularMatrixError("fast monodromy not contractive: I - Phi_D(T,0)");
    }
    parts.Lambda = (Lam1 + Lam2 * S * L0) / parts.T;
    return parts;
}

/// Tikhonov-reduced modes A - B D^{-1} C, one per system mode.
inline std::vector<Matrix> reduced_modes(const BlockSystem& sys) {
    std::vector<Matrix> out;
    out.reserve(sys.modes.size());
    int idx = 0;
    for (const auto& mode : sys.modes) {
        Matrix Dinv = invert(mode.D, "D of mode " + std::to_string(idx));
        out.push_back(mode.A - mode.B * Dinv * mode.C);
        ++idx;
    }
    return out;
}

struct CheckSample {
    Matrix Lambda;
    PwcSignal signal;   // generating signal (provenance; needed for lifting)
};

struct CheckSampleConfig {
    int max_pieces = 4;
    double dwell_min = 1e-2;
    double dwell_max = 1e+1;
    int count = 64;           // random signals; 0 keeps only the reduced modes
    std::uint64_t seed = 0;
};

/// Seeded sample of the check-mode set {Lambda(T, sigma)}. Always contains
/// the reduced modes (constant signals), so the sampled set covers the
/// reduced system by construction. With count > 0 a deterministic dwell-grid
/// layer over two-piece signals is added before the random layer.
inline std::vector<CheckSample> sample_check_modes(const BlockSystem& sys,
                                                  const CheckSampleConfig& cfg = {}) {
    std::vector<CheckSample> out;
    const int k = (int)sys.modes.size();
    auto reduced = reduced_modes(sys);
    for (int i = 0; i < k; ++i)
        out.push_back({reduced[i], PwcSignal{{{i, 1.0}}}});
    if (cfg.count <= 0) return out;

    auto grid = detail::dwell_grid(cfg.dwell_min, cfg.dwell_max);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            for (double d1 : grid)
                for (double d2 : grid) {
                    PwcSignal sig{{{i, d1}, {j, d2}}};
                    out.push_back({lambda_parts(sys, sig).Lambda, sig});
                }
        }

    std::uniform_int_distribution<int> mode_dist(0, k - 1);
    std::uniform_real_distribution<double> log_dwell(std::log(cfg.dwell_min),
                                                     std::log(cfg.dwell_max));
    for (int c = 0; c < cfg.count; ++c) {
        // Per-candidate stream so results do not depend on evaluation order.
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * (std::uint64_t)(c + 1)));
        int pieces = 1 + (int)(rng() % (std::uint64_t)cfg.max_pieces);
        PwcSignal sig;
        for (int p = 0; p < pieces; ++p)
            sig.pieces.push_back({mode_dist(rng), std::exp(log_dwell(rng))});
        out.push_back({lambda_parts(sys, sig).Lambda, sig});
    }
    return out;
}

/// Explicit bound C2 + 2 c C1^2 (1 + Tbar) on |Lambda(T, sigma)| valid for
/// every T and sigma, from the decay estimate (c, alpha) of the fast flow.
inline double check_mode_norm_bound(const BlockSystem& sys, const DecayEstimate& decay) {
    if (!(decay.delta > 0.0)) throw Error("check_mode_norm_bound: needs a positive decay rate");
    double maxB = 0.0, maxC = 0.0, maxA = 0.0;
    for (const auto& mode : sys.modes) {
        maxA = std::max(maxA, op_norm(mode.A));
        maxB = std::max(maxB, op_norm(mode.B));
        maxC = std::max(maxC, op_norm(mode.C));
    }
    const double c = decay.c, alpha = decay.delta;
    // |Lambda0|, |Lambda2| <= C1 min{1, T}; |Lambda1| <= C2 T.
    double C1 = c * std::max(maxB, maxC) * std::max(1.0, 1.0 / alpha);
    double C2 = maxA + maxB * C1;
    double Tbar = std::log(2.0 * c) / alpha;
    return C2 + 2.0 * c * C1 * C1 * (1.0 + Tbar);
}

/// First-order data for the period flow of Sigma_{eps,mu}: M(eps) = M0 +
/// eps M1 + O(eps^2), the leading coordinate change Q0, and measured
/// residuals per epsilon.
struct ExpansionReport {
    Matrix M0;   // (n+m) square, [[I, 0], [Lambda0, PhiD]]
    Matrix M1;   // (n+m) square, int_0^T Phi_{N0}(T,s) N1(s) Phi_{N0}(s,0) ds
    Matrix Q0;   // m x n, (I - PhiD)^{-1} Lambda0
    double mu = 0.0;
    double T = 0.0;
    LambdaParts parts;
    // (epsilon, r1, r2): r1 = |top-left of P^{-1} M(eps) P - I - eps T (Lambda + mu I)|,
    // r2 = |bottom-left block|. Expected r1 = O(eps^2), r2 = O(eps).
    std::vector<std::array<double, 3>> residuals;
};

namespace detail {

inline Matrix n0_generator(const BlockMode& mode, int n, int m) {
    Matrix N = Matrix::Zero(n + m, n + m);
    N.bottomLeftCorner(m, n) = mode.C;
    N.bottomRightCorner(m, m) = mode.D;
    return N;
}

inline Matrix n1_generator(const BlockMode& mode, int n, int m, double mu) {
    Matrix N = Matrix::Zero(n + m, n + m);
    N.topLeftCorner(n, n) = mode.A + mu * Matrix::Identity(n, n);
    N.topRightCorner(n, m) = mode.B;
    N.bottomRightCorner(m, m) = mu * Matrix::Identity(m, m);
    return N;
}

// Gauss-Legendre nodes/weights on [-1, 1], 10 points.
inline const std::array<std::array<double, 2>, 10>& gauss10() {
    static const std::array<std::array<double, 2>, 10> nw = {{
        {-0.9739065285171717, 0.0666713443086881},
        {-0.8650633666889845, 0.1494513491505806},
        {-0.6794095682990244, 0.2190863625159820},
        {-0.4333953941292472, 0.2692667193099963},
        {-0.1488743389816312, 0.2955242247147529},
        {0.1488743389816312, 0.2955242247147529},
        {0.4333953941292472, 0.2692667193099963},
        {0.6794095682990244, 0.2190863625159820},
        {0.8650633666889845, 0.1494513491505806},
        {0.9739065285171717, 0.0666713443086881},
    }};
    return nw;
}

}  // namespace detail

inline ExpansionReport expansion_report(const BlockSystem& sys, const PwcSignal& sig, double mu,
                                        const std::vector<double>& eps_list) {
    const int n = sys.n, m = sys.m;
    ExpansionReport rep;
    rep.mu = mu;
    rep.T = sig.total_duration();
    rep.parts = lambda_parts(sys, sig);
    if (spectral_radius(rep.parts.PhiD) >= 1.0)
        throw NumericalRefusal("expansion_report: fast monodromy not contractive");

    rep.M0 = Matrix::Identity(n + m, n + m);
    rep.M0.bottomLeftCorner(m, n) = rep.parts.Lambda0;
    rep.M0.bottomRightCorner(m, m) = rep.parts.PhiD;
    rep.Q0 = invert(Matrix::Identity(m, m) - rep.parts.PhiD, "I - Phi_D(T,0)") *
             rep.parts.Lambda0;

    // M1 by adaptive Gauss quadrature on each piece of the N0-flow integrand.
    const auto& piece_list = sig.pieces;
    std::vector<Matrix> prefix(piece_list.size() + 1);   // Phi_{N0}(s_i, 0)
    prefix[0] = Matrix::Identity(n + m, n + m);
    std::vector<Matrix> N0(piece_list.size()), N1(piece_list.size());
    for (size_t i = 0; i < piece_list.size(); ++i) {
        const BlockMode& mode = sys.modes[piece_list[i].mode];
        N0[i] = detail::n0_generator(mode, n, m);
        N1[i] = detail::n1_generator(mode, n, m, mu);
        prefix[i + 1] = mat_exp(N0[i], piece_list[i].dwell) * prefix[i];
    }
    std::vector<Matrix> suffix(piece_list.size() + 1);   // Phi_{N0}(T, s_{i})
    suffix[piece_list.size()] = Matrix::Identity(n + m, n + m);
    for (size_t i = piece_list.size(); i-- > 0;)
        suffix[i] = suffix[i + 1] * mat_exp(N0[i], piece_list[i].dwell);

    rep.M1 = Matrix::Zero(n + m, n + m);
    for (size_t i = 0; i < piece_list.size(); ++i) {
        double h = piece_list[i].dwell;
        auto integrate = [&](int subdivisions) {
            Matrix acc = Matrix::Zero(n + m, n + m);
            for (int s = 0; s < subdivisions; ++s) {
                double a = h * s / subdivisions, b = h * (s + 1) / subdivisions;
                for (const auto& nw : detail::gauss10()) {
                    double u = 0.5 * (a + b) + 0.5 * (b - a) * nw[0];
                    Matrix left = suffix[i + 1] * mat_exp(N0[i], h - u);
                    Matrix right = mat_exp(N0[i], u) * prefix[i];
                    acc += (0.5 * (b - a) * nw[1]) * (left * N1[i] * right);
                }
            }
            return acc;
        };
        Matrix coarse = integrate(1);
        for (int sub = 2; sub <= 64; sub *= 2) {
            Matrix fine = integrate(sub);
            double diff = op_norm(fine - coarse);
            coarse = fine;
            if (diff <= 1e-10 * std::max(1.0, op_norm(fine))) break;
        }
        rep.M1 += coarse;
    }

    // Measured residuals via the rescaled flow M(eps) = Phi_{N0 + eps N1}(T, 0).
    Matrix P = Matrix::Identity(n + m, n + m);
    P.bottomLeftCorner(m, n) = rep.Q0;
    Matrix Pinv = Matrix::Identity(n + m, n + m);
    Pinv.bottomLeftCorner(m, n) = -rep.Q0;
    for (double eps : eps_list) {
        Matrix Phi = Matrix::Identity(n + m, n + m);
        for (size_t i = 0; i < piece_list.size(); ++i)
            Phi = mat_exp(N0[i] + eps * N1[i], piece_list[i].dwell) * Phi;
        Matrix G = Pinv * Phi * P;
        Matrix top = G.topLeftCorner(n, n) - Matrix::Identity(n, n) -
                     eps * rep.T *
                         (rep.parts.Lambda + mu * Matrix::Identity(n, n));
        double r1 = op_norm(top);
        double r2 = op_norm(Matrix(G.bottomLeftCorner(m, n)));
        rep.residuals.push_back({eps, r1, r2});
    }
    return rep;
}

/// An exponential-instability certificate for the check system: signals
/// sigma_k generating Lambda(T_k, sigma_k), each run for time t_k, with
/// rho(e^{t_l Lambda_l} ... e^{t_1 Lambda_1}) > 1.
struct CheckCertificate {
    struct Entry {
        PwcSignal sigma;
        double t = 0.0;
    };
    std::vector<Entry> entries;
};

struct LiftResult {
    PwcSignal signal;       // epsilon-level signal
    FlowResult flow;        // Sigma_eps flow over [0, t_eps]
    double t_eps = 0.0;
    long total_periods = 0;
    double rho_total = 0.0;   // rho of the full flow
    double rho_period = 0.0;  // rho_total^(1/total_periods)
    double value = 0.0;       // log(rho_total) / t_eps, a lambda(Sigma_eps) witness
};

/// Repeats each sigma_k(./eps) floor(t_k / (eps T_k)) times and evaluates the
/// resulting Sigma_eps flow; rho_total > 1 certifies exponential instability
/// of Sigma_eps.
inline LiftResult lift_check_certificate(const BlockSystem& sys, const CheckCertificate& cert,
                                         double eps) {
    if (cert.entries.empty()) throw Error("lift_check_certificate: empty certificate");
    if (!(eps > 0.0)) throw Error("lift_check_certificate: epsilon must be positive");

    // Precondition: the certificate product must be expanding.
    Matrix prod;
    {
        bool first = true;
        for (const auto& e : cert.entries) {
            auto parts = lambda_parts(sys, e.sigma);
            Matrix F = mat_exp(parts.Lambda, e.t);
            prod = first ? F : Matrix(F * prod);
            first = false;
        }
        if (!(spectral_radius(prod) > 1.0))
            throw NumericalRefusal(
                "lift_check_certificate: certificate product has spectral radius <= 1");
    }

    LiftResult out;
    double sum_NT = 0.0;
    for (const auto& e : cert.entries) {
        double Tk = e.sigma.total_duration();
        if (eps * Tk >= e.t)
            throw Error("lift_check_certificate: epsilon too large (eps*T >= t for one block)");
        long Nk = (long)std::floor(e.t / (eps * Tk));
        PwcSignal scaled;
        for (const auto& p : e.sigma.pieces) scaled.pieces.push_back({p.mode, p.dwell * eps});
        for (long r = 0; r < Nk; ++r)
            out.signal.pieces.insert(out.signal.pieces.end(), scaled.pieces.begin(),
                                     scaled.pieces.end());
        out.total_periods += Nk;
        sum_NT += (double)Nk * Tk;
    }
    out.t_eps = eps * sum_NT;

    ScaledFlow f = flow_scaled(eps_modes(sys, eps), out.signal);
    double log_rho = std::log(spectral_radius(f.Phi)) + f.log_scale;
    out.rho_total = std::exp(log_rho);
    out.rho_period = std::exp(log_rho / (double)out.total_periods);
    out.value = log_rho / out.t_eps;
    out.flow = {Matrix(f.Phi * std::exp(f.log_scale)), f.t, signal_digest(out.signal)};
    return out;
}

/// Lambda-report JSON (External interface of this module).
inline json lambda_parts_to_json(const LambdaParts& parts, const PwcSignal& sig) {
    return {{"T", parts.T},
            {"pieces", signal_to_json(sig)["pieces"]},
            {"Lambda", detail::matrix_to_json(parts.Lambda)},
            {"parts",
             {{"Lambda0", detail::matrix_to_json(parts.Lambda0)},
              {"Lambda1", detail::matrix_to_json(parts.Lambda1)},
              {"Lambda2", detail::matrix_to_json(parts.Lambda2)},
              {"PhiD", detail::matrix_to_json(parts.PhiD)}}}};
}

}  // namespace slyap
