#pragma once

// One-sided bounds on maximal Lyapunov exponents of switching systems with a
// finite mode list. Lower bounds come from periodic spectral-radius witnesses
// (any signal gives a sound bound); the upper bound is the logarithmic-norm
// supremum. The randomized witness search is fully seeded.

#include "slyap/flows.hpp"
#include "slyap/matkit.hpp"
#include "slyap/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace slyap {

struct LyapunovBound {
    enum class Side { Lower, Upper };
    double value = -std::numeric_limits<double>::infinity();
    Side side = Side::Lower;
    std::string method;       // "periodic-rho", "log-norm", "decay-fit", "kset-sup", "greedy"
    bool heuristic = false;   // true: value is an estimate, not a sound bound
    // Lower-side certificate: value == log(rho)/t for the witness signal.
    PwcSignal witness;
    double t = 0.0;
    double rho = 0.0;
};

struct SearchConfig {
    int max_pieces = 6;
    double dwell_min = 1e-2;
    double dwell_max = 1e+1;
    int restarts = 40;           // random signals per piece-count stratum
    int descent_iters = 200;     // coordinate-descent budget on the best witness
    std::uint64_t seed = 0;
};

// Flow product with running renormalization so that witnesses with
// |N| t >> 1 can be evaluated without overflow.
struct ScaledFlow {
    Matrix Phi;
    double log_scale = 0.0;
    double t = 0.0;
};

inline ScaledFlow flow_scaled(const std::vector<Matrix>& modes, const PwcSignal& sig) {
    require_modes_square(modes);
    const auto d = modes.front().rows();
    ScaledFlow out{Matrix::Identity(d, d), 0.0, 0.0};
    for (const auto& p : sig.pieces) {
        const Matrix& N = modes[p.mode];
        // Keep each exponential argument moderate.
        double norm = op_norm(N);
        int chunks = std::max(1, (int)std::ceil(norm * p.dwell / 20.0));
        double h = p.dwell / chunks;
        Matrix E = mat_exp(N, h);
        for (int c = 0; c < chunks; ++c) {
            out.Phi = E * out.Phi;
            double s = out.Phi.cwiseAbs().maxCoeff();
            if (s > 1e100 || (s > 0 && s < 1e-100)) {
                out.Phi /= s;
                out.log_scale += std::log(s);
            }
        }
        out.t += p.dwell;
    }
    return out;
}

/// log(rho(Phi(t,0)))/t for the witness signal; -inf if the flow is nilpotent
/// to working precision.
inline double witness_value(const std::vector<Matrix>& modes, const PwcSignal& sig,
                            double* rho_log = nullptr) {
    ScaledFlow f = flow_scaled(modes, sig);
    double r = spectral_radius(f.Phi);
    if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
    double lr = std::log(r) + f.log_scale;
    if (rho_log) *rho_log = lr;
    return lr / f.t;
}

namespace detail {

inline void consider(const std::vector<Matrix>& modes, const PwcSignal& cand,
                     LyapunovBound& best) {
    double v = witness_value(modes, cand);
    if (v > best.value) {
        best.value = v;
        best.witness = cand;
    }
}

inline std::vector<double> dwell_grid(double lo, double hi) {
    std::vector<double> g;
    for (double d = lo; d <= hi * (1 + 1e-9); d *= 10.0) g.push_back(d);
    if (g.empty()) g.push_back(lo);
    return g;
}

}  // namespace detail

/// Best periodic spectral-radius witness found by seeded randomized search
/// plus coordinate descent on the dwell times. Sound lower bound for any
/// outcome; the search only affects tightness. Deterministic given the seed.
inline LyapunovBound lambda_lower(const std::vector<Matrix>& modes, const SearchConfig& cfg = {},
                                  const std::vector<PwcSignal>& extra_candidates = {}) {
    require_modes_square(modes);
    const int k = (int)modes.size();
    LyapunovBound best;
    best.side = LyapunovBound::Side::Lower;
    best.method = "periodic-rho";

    // Constant signals, one per mode; dwell kept short enough that the
    // spectral radius of the exponential stays representable.
    for (int i = 0; i < k; ++i) {
        double t = std::min(1.0, 30.0 / (op_norm(modes[i]) + 1.0));
        detail::consider(modes, PwcSignal{{{i, t}}}, best);
    }

    // Deterministic two-piece grid over decade dwell values.
    auto grid = detail::dwell_grid(cfg.dwell_min, cfg.dwell_max);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            for (double d1 : grid)
                for (double d2 : grid)
                    detail::consider(modes, PwcSignal{{{i, d1}, {j, d2}}}, best);
        }

    // Seeded random restarts, stratified by piece count.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> mode_dist(0, k - 1);
    std::uniform_real_distribution<double> log_dwell(std::log(cfg.dwell_min),
                                                     std::log(cfg.dwell_max));
    for (int pieces = 2; pieces <= cfg.max_pieces; ++pieces)
        for (int r = 0; r < cfg.restarts; ++r) {
            PwcSignal sig;
            for (int p = 0; p < pieces; ++p)
                sig.pieces.push_back({mode_dist(rng), std::exp(log_dwell(rng))});
            detail::consider(modes, sig, best);
        }

    for (const auto& cand : extra_candidates)
        if (!cand.pieces.empty()) detail::consider(modes, cand, best);

    // Multiplicative coordinate descent on the best witness's dwells.
    if (!best.witness.pieces.empty()) {
        PwcSignal cur = best.witness;
        for (int it = 0; it < cfg.descent_iters; ++it) {
            int idx = (int)(it % cur.pieces.size());
            bool moved = false;
            for (double f : {1.1, 1.0 / 1.1}) {
                PwcSignal trial = cur;
                trial.pieces[idx].dwell *= f;
                double v = witness_value(modes, trial);
                if (v > best.value) {
                    best.value = v;
                    best.witness = trial;
                    cur = trial;
                    moved = true;
                    break;
                }
            }
            (void)moved;
        }
    }

    // Freeze the certificate: value must replay from (witness, t, rho).
    double lr = 0.0;
    best.value = witness_value(modes, best.witness, &lr);
    best.t = best.witness.total_duration();
    best.rho = std::exp(lr);
    return best;
}

/// Certificate-free upper bound: sup over modes of the logarithmic norm.
inline LyapunovBound lambda_upper_lognorm(const std::vector<Matrix>& modes) {
    require_modes_square(modes);
    LyapunovBound b;
    b.side = LyapunovBound::Side::Upper;
    b.method = "log-norm";
    b.value = -std::numeric_limits<double>::infinity();
    for (const auto& N : modes) b.value = std::max(b.value, log_norm(N));
    return b;
}

/// lambda(N + mu I) = mu + lambda(N).
inline std::vector<Matrix> shift_modes(const std::vector<Matrix>& modes, double mu) {
    std::vector<Matrix> out = modes;
    for (auto& N : out) N += mu * Matrix::Identity(N.rows(), N.cols());
    return out;
}

enum class Stability { ES, EU, Undecided };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::ES: return "ES";
        case Stability::EU: return "EU";
        default: return "UNDECIDED";
    }
}

/// ES iff the upper bound is negative, EU iff the lower bound is positive.
inline Stability classify(const LyapunovBound& lower, const LyapunovBound& upper) {
    if (lower.value > upper.value + 1e-9)
        throw Error("classify: inconsistent bound pair (lower " + std::to_string(lower.value) +
                    " > upper " + std::to_string(upper.value) + ")");
    if (upper.value < 0.0) return Stability::ES;
    if (lower.value > 0.0) return Stability::EU;
    return Stability::Undecided;
}

}  // namespace slyap
