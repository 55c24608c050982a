#pragma once

// Estimation of the fast-dynamics aggregate K(x) — the closure of the omega
// limit sets of y' = D(t) y + C(t) x from y(0) = 0 — and the bounds it
// induces for the differential inclusion x' in A x + B K(x).

#include "slyap/assumption.hpp"
#include "slyap/flows.hpp"
#include "slyap/matkit.hpp"
#include "slyap/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace slyap {

/// Finite sample of K(base_x). Reproducible from (system, base_x, seed,
/// config); carries the decay estimate that justified its burn-in.
struct PointCloud {
    Vector base_x;
    std::vector<Vector> points;
    double burn_in = 0.0;
    double tolerance = 0.0;
    DecayEstimate decay;
    std::uint64_t seed = 0;
};

struct KsetConfig {
    int signals = 160;        // random fast signals per cloud
    double horizon = 300.0;   // simulated time per signal (incl. burn-in)
    double tolerance = 0.05;
    std::uint64_t seed = 0;
};

namespace detail {

// Snap key for cloud deduplication on a grid of pitch tolerance/10.
inline std::vector<long long> snap_key(const Vector& y, double pitch) {
    std::vector<long long> k(y.size());
    for (long i = 0; i < y.size(); ++i) k[i] = (long long)std::llround(y(i) / pitch);
    return k;
}

}  // namespace detail

/// Samples K(x): simulates seeded random piecewise-constant fast signals from
/// y(0) = 0, discards the burn-in prefix (chosen from the decay estimate so
/// the initial-condition memory is below tolerance), and collects the
/// post-burn-in states, deduplicated on a tolerance/10 grid.
///
/// `pre` may carry an already-computed assumption report; otherwise the check
/// runs here and a non-HOLDS verdict is refused.
inline PointCloud kset_estimate(const BlockSystem& sys, const Vector& x, const KsetConfig& cfg = {},
                                const AssumptionReport* pre = nullptr) {
    AssumptionReport local;
    if (!pre) {
        local = check_assumption_fast_stable(sys);
        pre = &local;
    }
    if (pre->verdict != Verdict::Holds)
        throw NumericalRefusal("kset_estimate: fast-stability assumption not certified (verdict " +
                               std::string(to_string(pre->verdict)) + ")");
    if (x.size() != sys.n) throw DimensionError("kset_estimate: x has wrong length");
    if (!(cfg.tolerance > 0.0)) throw Error("kset_estimate: tolerance must be positive");

    const double c = pre->decay.c, delta = pre->decay.delta;
    double maxC = 0.0, maxD = 0.0;
    for (const auto& mode : sys.modes) {
        maxC = std::max(maxC, op_norm(mode.C));
        maxD = std::max(maxD, op_norm(mode.D));
    }
    const double xn = x.norm();
    // All trajectories from 0 stay in |y| <= R (decay bound on the forced
    // response), so velocities are bounded and the sampling grid below is
    // tolerance/2-dense along each path.
    const double R = c * maxC * xn / delta + 1.0;
    const double burn_in = std::log(c * (R + 1.0) / cfg.tolerance) / delta;
    const double dt = cfg.tolerance / (2.0 * maxD * R + maxC * xn + 1.0);

    PointCloud cloud;
    cloud.base_x = x;
    cloud.burn_in = burn_in;
    cloud.tolerance = cfg.tolerance;
    cloud.decay = pre->decay;
    cloud.seed = cfg.seed;

    // Cached one-step affine propagators y <- F y + G x per mode; dwells are
    // quantized to the dt grid so every step hits the cache.
    const int k = (int)sys.modes.size();
    std::vector<Matrix> F(k), G(k);
    for (int i = 0; i < k; ++i) {
        auto fi = exp_with_forced_integral(sys.modes[i].D, sys.modes[i].C, dt);
        F[i] = fi.Phi;
        G[i] = fi.J;
    }
    std::vector<Vector> Gx(k);
    for (int i = 0; i < k; ++i) Gx[i] = G[i] * x;

    const double pitch = cfg.tolerance / 10.0;
    std::map<std::vector<long long>, Vector> dedup;
    std::uniform_int_distribution<int> mode_dist(0, k - 1);
    for (int s = 0; s < cfg.signals; ++s) {
        // Per-signal RNG stream: cloud content independent of evaluation order.
        std::mt19937_64 rng(cfg.seed ^ (0xD1B54A32D192ED03ull * (std::uint64_t)(s + 1)));
        std::exponential_distribution<double> dwell(delta);  // mean 1/delta
        Vector y = Vector::Zero(sys.m);
        double t = 0.0;
        while (t < cfg.horizon) {
            int mode = mode_dist(rng);
            long steps = std::max<long>(1, std::lround(dwell(rng) / dt));
            for (long q = 0; q < steps && t < cfg.horizon; ++q) {
                y = F[mode] * y + Gx[mode];
                t += dt;
                if (t >= burn_in) dedup.emplace(detail::snap_key(y, pitch), y);
            }
        }
    }
    cloud.points.reserve(dedup.size());
    for (auto& kv : dedup) cloud.points.push_back(std::move(kv.second));
    if (cloud.points.empty()) throw Error("kset_estimate: horizon shorter than burn-in");
    return cloud;
}

/// Hausdorff distance between two finite point sets.
inline double hausdorff(const std::vector<Vector>& A, const std::vector<Vector>& B) {
    if (A.empty() || B.empty()) throw Error("hausdorff: empty point set");
    auto one_sided = [](const std::vector<Vector>& P, const std::vector<Vector>& Q) {
        double worst = 0.0;
        for (const auto& p : P) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : Q) best = std::min(best, (p - q).norm());
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(A, B), one_sided(B, A));
}

/// d_H(K(scale * x), scale * K(x)) with independently estimated clouds;
/// small distance is evidence for degree-one homogeneity of K.
inline double kset_homogeneity_check(const BlockSystem& sys, const Vector& x, double scale,
                                     const KsetConfig& cfg = {},
                                     const AssumptionReport* pre = nullptr) {
    if (scale == 0.0) throw Error("kset_homogeneity_check: scale must be nonzero");
    auto scaled = kset_estimate(sys, Vector(scale * x), cfg, pre);
    auto base = kset_estimate(sys, x, cfg, pre);
    std::vector<Vector> scaled_base;
    scaled_base.reserve(base.points.size());
    for (const auto& p : base.points) scaled_base.push_back(scale * p);
    return hausdorff(scaled.points, scaled_base);
}

struct SphereConfig {
    int count = 256;          // per 2 dimensions; n=1 always uses {+1,-1}
    std::uint64_t seed = 0;
};

/// Deterministic unit-sphere sample with an estimated covering mesh.
struct SphereSample {
    std::vector<Vector> points;
    double mesh = 0.0;  // covering-radius estimate; 0 for n = 1 (exact)
};

inline SphereSample sphere_sample(int n, const SphereConfig& cfg = {}) {
    SphereSample out;
    if (n < 1) throw DimensionError("sphere_sample: n must be >= 1");
    if (n == 1) {
        out.points = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
        out.mesh = 0.0;
        return out;
    }
    if (n == 2) {
        for (int i = 0; i < cfg.count; ++i) {
            double a = 2.0 * M_PI * i / cfg.count;
            Vector v(2);
            v << std::cos(a), std::sin(a);
            out.points.push_back(v);
        }
        out.mesh = 2.0 * std::sin(M_PI / cfg.count);
        return out;
    }
    // n >= 3: seeded normalized Gaussian points (deterministic given the
    // seed); the mesh is probed empirically with extra random directions.
    int count = cfg.count * (n / 2 + n % 2);
    std::mt19937_64 rng(cfg.seed ^ 0x5f3759df5f3759dfull);
    std::normal_distribution<double> gauss;
    for (int i = 0; i < count; ++i) {
        Vector v(n);
        for (int j = 0; j < n; ++j) v(j) = gauss(rng);
        out.points.push_back(v.normalized());
    }
    double mesh = 0.0;
    for (int i = 0; i < 10 * count; ++i) {
        Vector v(n);
        for (int j = 0; j < n; ++j) v(j) = gauss(rng);
        v.normalize();
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : out.points) best = std::min(best, (v - p).norm());
        mesh = std::max(mesh, best);
    }
    out.mesh = mesh;
    return out;
}

namespace detail {

// Lipschitz slack data for the sphere-sampled sup: the map
// g(x) = max_{mode, y in K(x)} x.(Ax + By) has |g(x1)-g(x2)| <=
// (2 maxA + maxB (R + L_K)) |x1-x2| on the unit sphere, with R a cloud-norm
// bound and L_K = c maxC / delta the K-Lipschitz estimate.
inline double hat_lipschitz(const BlockSystem& sys, const DecayEstimate& decay,
                            double cloud_radius) {
    double maxA = 0.0, maxB = 0.0, maxC = 0.0;
    for (const auto& mode : sys.modes) {
        maxA = std::max(maxA, op_norm(mode.A));
        maxB = std::max(maxB, op_norm(mode.B));
        maxC = std::max(maxC, op_norm(mode.C));
    }
    double LK = decay.delta > 0.0 ? decay.c * maxC / decay.delta : 0.0;
    return 2.0 * maxA + maxB * (cloud_radius + LK);
}

}  // namespace detail

/// Sound-up-to-cloud-tolerance upper bound on lambda of the inclusion
/// x' in A x + B K(x): d|x|/dt <= g(x/|x|) |x| with
/// g(u) = max_{mode, y in K(u)} u.(Au + By); the sampled max is padded by
/// mesh * Lipschitz slack (zero for n = 1).
inline LyapunovBound hat_upper_bound(const BlockSystem& sys, const KsetConfig& kcfg = {},
                                     const SphereConfig& scfg = {},
                                     const AssumptionReport* pre = nullptr) {
    AssumptionReport local;
    if (!pre) {
        local = check_assumption_fast_stable(sys);
        pre = &local;
    }
    auto sphere = sphere_sample(sys.n, scfg);
    LyapunovBound b;
    b.side = LyapunovBound::Side::Upper;
    b.method = "kset-sup";
    b.value = -std::numeric_limits<double>::infinity();
    double cloud_radius = 0.0;
    for (const auto& u : sphere.points) {
        auto cloud = kset_estimate(sys, u, kcfg, pre);
        for (const auto& y : cloud.points) {
            cloud_radius = std::max(cloud_radius, y.norm());
            for (const auto& mode : sys.modes)
                b.value = std::max(b.value, u.dot(mode.A * u + mode.B * y));
        }
    }
    b.value += sphere.mesh * detail::hat_lipschitz(sys, pre->decay, cloud_radius);
    // The cloud undershoots K by its tolerance at most; pad accordingly.
    double maxB = 0.0;
    for (const auto& mode : sys.modes) maxB = std::max(maxB, op_norm(mode.B));
    b.value += maxB * kcfg.tolerance;
    return b;
}

struct GreedyConfig {
    double horizon = 2.0;
    double step = 5e-4;
};

/// Heuristic lower estimate for lambda of the inclusion: simulate
/// x' = A x + B y greedily picking per step the (mode, cloud point)
/// maximizing the radial growth x.(Ax + By). Each step is an exact affine
/// propagation with y frozen; the state is renormalized every step and the
/// log-growth accumulated. Clouds are precomputed on the sphere sample and
/// looked up by nearest direction (exact for n = 1 by homogeneity).
inline LyapunovBound hat_lower_greedy(const BlockSystem& sys, const Vector& x0,
                                      const GreedyConfig& gcfg = {}, const KsetConfig& kcfg = {},
                                      const SphereConfig& scfg = {},
                                      const AssumptionReport* pre = nullptr) {
    AssumptionReport local;
    if (!pre) {
        local = check_assumption_fast_stable(sys);
        pre = &local;
    }
    if (x0.size() != sys.n) throw DimensionError("hat_lower_greedy: x0 has wrong length");
    if (!(x0.norm() > 0.0)) throw Error("hat_lower_greedy: x0 must be nonzero");

    auto sphere = sphere_sample(sys.n, scfg);
    std::vector<std::vector<Vector>> clouds(sphere.points.size());
    for (size_t i = 0; i < sphere.points.size(); ++i)
        clouds[i] = kset_estimate(sys, sphere.points[i], kcfg, pre).points;

    // Exact one-step propagators x <- Phi x + J y per mode (y frozen).
    const int k = (int)sys.modes.size();
    std::vector<Matrix> Phi(k), J(k);
    for (int i = 0; i < k; ++i) {
        auto fi = exp_with_forced_integral(sys.modes[i].A, sys.modes[i].B, gcfg.step);
        Phi[i] = fi.Phi;
        J[i] = fi.J;
    }

    Vector x = x0.normalized();
    double log_growth = 0.0;
    long steps = (long)std::llround(gcfg.horizon / gcfg.step);
    for (long s = 0; s < steps; ++s) {
        // Nearest sampled direction; its cloud scaled by |x| = 1.
        size_t best_dir = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < sphere.points.size(); ++i) {
            double d = (x - sphere.points[i]).norm();
            if (d < best_d) {
                best_d = d;
                best_dir = i;
            }
        }
        int best_mode = 0;
        const Vector* best_y = nullptr;
        double best_v = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < k; ++i)
            for (const auto& y : clouds[best_dir]) {
                double v = x.dot(sys.modes[i].A * x + sys.modes[i].B * y);
                if (v > best_v) {
                    best_v = v;
                    best_mode = i;
                    best_y = &y;
                }
            }
        Vector xn = Phi[best_mode] * x + J[best_mode] * (*best_y);
        double nn = xn.norm();
        if (!(nn > 0.0)) {
            log_growth = -std::numeric_limits<double>::infinity();
            break;
        }
        log_growth += std::log(nn);
        x = xn / nn;
    }

    LyapunovBound b;
    b.side = LyapunovBound::Side::Lower;
    b.method = "greedy";
    b.heuristic = true;  // valid only up to cloud/step/direction-lookup error
    b.value = log_growth / gcfg.horizon;
    b.t = gcfg.horizon;
    b.rho = std::exp(log_growth);
    return b;
}

/// Cloud JSON (External interface of this module).
inline json cloud_to_json(const PointCloud& cloud) {
    json x = json::array();
    for (long i = 0; i < cloud.base_x.size(); ++i) x.push_back(cloud.base_x(i));
    json pts = json::array();
    for (const auto& p : cloud.points) {
        json row = json::array();
        for (long i = 0; i < p.size(); ++i) row.push_back(p(i));
        pts.push_back(row);
    }
    return {{"x", x},
            {"tolerance", cloud.tolerance},
            {"seed", cloud.seed},
            {"burn_in", cloud.burn_in},
            {"points", pts}};
}

}  // namespace slyap
