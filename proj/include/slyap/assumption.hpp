#pragma once

// Fast-dynamics stability check: bounds on lambda(Sigma_D) and the decay
// estimate |Phi_D(t,s)| <= c e^{-delta (t-s)} used downstream.

#include "slyap/model.hpp"
#include "slyap/search.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace slyap {

enum class Verdict { Holds, Fails, Undecided };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "HOLDS";
        case Verdict::Fails: return "FAILS";
        default: return "UNDECIDED";
    }
}

struct AssumptionReport {
    Verdict verdict = Verdict::Undecided;
    LyapunovBound lower;   // periodic-rho certificate on the D modes
    LyapunovBound upper;   // log-norm sup over the D modes
    DecayEstimate decay;
};

inline std::vector<Matrix> fast_modes(const BlockSystem& sys) {
    std::vector<Matrix> out;
    out.reserve(sys.modes.size());
    for (const auto& mode : sys.modes) out.push_back(mode.D);
    return out;
}

/// HOLDS when the log-norm upper bound on lambda(Sigma_D) is negative, FAILS
/// when a positive periodic certificate exists, UNDECIDED when the bounds
/// straddle zero. The decay estimate is (1, -upper) in the certified case and
/// a fitted heuristic otherwise.
inline AssumptionReport check_assumption_fast_stable(const BlockSystem& sys,
                                                     double fit_horizon = 20.0,
                                                     const SearchConfig& cfg = {}) {
    AssumptionReport rep;
    auto D = fast_modes(sys);
    rep.upper = lambda_upper_lognorm(D);
    rep.lower = lambda_lower(D, cfg);
    if (rep.upper.value < 0.0)
        rep.verdict = Verdict::Holds;
    else if (rep.lower.value > 0.0)
        rep.verdict = Verdict::Fails;
    else
        rep.verdict = Verdict::Undecided;

    if (rep.upper.value < 0.0) {
        rep.decay = {1.0, -rep.upper.value, "log-norm"};
    } else {
        // Not certifiable by log-norm: fit c for the decay rate suggested by
        // the periodic search, from sampled flow norms.
        double delta = rep.lower.value < 0.0 ? -rep.lower.value : 1e-3;
        std::mt19937_64 rng(cfg.seed ^ 0x5eedD0d0ull);
        std::uniform_int_distribution<int> mode_dist(0, (int)D.size() - 1);
        std::uniform_real_distribution<double> dwell(0.05 * fit_horizon, 0.5 * fit_horizon);
        double c = 1.0;
        for (int s = 0; s < 32; ++s) {
            PwcSignal sig;
            double t = 0.0;
            while (t < fit_horizon) {
                double h = dwell(rng);
                sig.pieces.push_back({mode_dist(rng), h});
                t += h;
                ScaledFlow f = flow_scaled(D, sig);
                c = std::max(c, op_norm(f.Phi) * std::exp(f.log_scale + delta * f.t));
            }
        }
        rep.decay = {c, delta, "decay-fit"};
    }
    return rep;
}

}  // namespace slyap
