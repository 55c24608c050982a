#pragma once

// Flow computation for switching systems and the singularly perturbed family
// Sigma_eps, plus dense trajectory output. Dynamics are piecewise linear
// time-invariant, so trajectories are propagated by exact per-piece matrix
// exponentials; the only error source is the mat_exp kernel tolerance.

#include "slyap/matkit.hpp"
#include "slyap/model.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace slyap {

struct FlowResult {
    Matrix Phi;
    double t = 0.0;
    std::uint64_t signal_digest = 0;
};

inline void require_modes_square(const std::vector<Matrix>& modes) {
    if (modes.empty()) throw DimensionError("flow: empty mode list");
    const auto d = modes.front().rows();
    for (const auto& N : modes) {
        require_square(N, "flow");
        if (N.rows() != d) throw DimensionError("flow: modes must share one size");
    }
}

/// Phi(t,0) = e^{N_k tau_k} ... e^{N_1 tau_1}, later pieces on the left.
inline FlowResult flow(const std::vector<Matrix>& modes, const PwcSignal& sig) {
    require_modes_square(modes);
    if (sig.pieces.empty()) throw Error("flow: signal has no pieces");
    const auto d = modes.front().rows();
    Matrix Phi = Matrix::Identity(d, d);
    double t = 0.0;
    for (const auto& p : sig.pieces) {
        if (p.mode < 0 || p.mode >= (int)modes.size())
            throw Error("flow: mode index out of range");
        Phi = mat_exp(modes[p.mode], p.dwell) * Phi;
        t += p.dwell;
    }
    return {std::move(Phi), t, signal_digest(sig)};
}

/// The Sigma_eps generator [[A, B], [C/eps, D/eps]].
inline Matrix eps_mode(const BlockMode& mode, double epsilon) {
    if (!(epsilon > 0.0)) throw Error("eps_mode: epsilon must be positive");
    const auto n = mode.A.rows();
    const auto m = mode.D.rows();
    Matrix N(n + m, n + m);
    N.topLeftCorner(n, n) = mode.A;
    N.topRightCorner(n, m) = mode.B;
    N.bottomLeftCorner(m, n) = mode.C / epsilon;
    N.bottomRightCorner(m, m) = mode.D / epsilon;
    return N;
}

inline std::vector<Matrix> eps_modes(const BlockSystem& sys, double epsilon) {
    std::vector<Matrix> out;
    out.reserve(sys.modes.size());
    for (const auto& mode : sys.modes) out.push_back(eps_mode(mode, epsilon));
    return out;
}

inline FlowResult eps_flow(const BlockSystem& sys, const PwcSignal& sig, double epsilon) {
    return flow(eps_modes(sys, epsilon), sig);
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    double epsilon = std::numeric_limits<double>::quiet_NaN();  // NaN: not applicable
};

/// Exact piecewise-exponential propagation sampled on the dt grid plus every
/// switching instant.
inline Trajectory simulate_modes(const std::vector<Matrix>& modes, const PwcSignal& sig,
                                 const Vector& x0, double sample_dt) {
    require_modes_square(modes);
    if (!(sample_dt > 0.0)) throw Error("simulate: sample_dt must be positive");
    if (x0.size() != modes.front().rows())
        throw DimensionError("simulate: initial state dimension mismatch");

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    // Per-mode cached full-dt propagator.
    std::vector<Matrix> step(modes.size());
    std::vector<bool> have(modes.size(), false);

    Vector x = x0;
    double t = 0.0;            // global time of current state
    double next_grid = sample_dt;
    const double tiny = 1e-12;
    for (const auto& p : sig.pieces) {
        if (p.mode < 0 || p.mode >= (int)modes.size())
            throw Error("simulate: mode index out of range");
        const Matrix& N = modes[p.mode];
        double piece_end = t + p.dwell;
        while (true) {
            double target = std::min(next_grid, piece_end);
            double h = target - t;
            if (h > tiny) {
                if (std::abs(h - sample_dt) < tiny) {
                    if (!have[p.mode]) {
                        step[p.mode] = mat_exp(N, sample_dt);
                        have[p.mode] = true;
                    }
                    x = step[p.mode] * x;
                } else {
                    x = mat_exp(N, h) * x;
                }
                t = target;
                traj.times.push_back(t);
                traj.states.push_back(x);
            } else {
                t = target;
            }
            if (target >= piece_end - tiny) break;
            next_grid += sample_dt;
        }
        if (std::abs(next_grid - t) < tiny) next_grid += sample_dt;
    }
    return traj;
}

inline Trajectory simulate(const BlockSystem& sys, const PwcSignal& sig, double epsilon,
                           const Vector& x0, double sample_dt) {
    auto traj = simulate_modes(eps_modes(sys, epsilon), sig, x0, sample_dt);
    traj.epsilon = epsilon;
    return traj;
}

/// CSV with header t,x1..xn,y1..ym and 17 significant digits.
inline void write_trajectory_csv(const Trajectory& traj, int n, int m, std::ostream& os) {
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= m; ++i) os << ",y" << i;
    os << "\n";
    char buf[64];
    for (size_t k = 0; k < traj.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
        os << buf;
        const Vector& s = traj.states[k];
        for (long i = 0; i < s.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", s(i));
            os << ',' << buf;
        }
        os << "\n";
    }
}

inline void write_trajectory_csv(const Trajectory& traj, int n, int m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path + " for writing");
    write_trajectory_csv(traj, n, m, f);
}

}  // namespace slyap
