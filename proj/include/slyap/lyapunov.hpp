#pragma once

// Epsilon sweeps and the ordering-chain experiment: bounds for the reduced
// system, the averaged (check) system, the singularly perturbed family, and
// the fast-switching inclusion, assembled into one report.

#include "slyap/assumption.hpp"
#include "slyap/auxiliary.hpp"
#include "slyap/flows.hpp"
#include "slyap/inclusion.hpp"
#include "slyap/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace slyap {

struct SweepRow {
    double epsilon = 0.0;
    LyapunovBound lower;
    LyapunovBound upper;
    double eps_times_lower = 0.0;
    Stability verdict = Stability::Undecided;
};

/// Per-epsilon bounds on lambda of Sigma_eps; rows sorted by epsilon
/// descending.
inline std::vector<SweepRow> sweep_eps(const BlockSystem& sys, std::vector<double> eps_list,
                                       const SearchConfig& cfg = {}) {
    if (eps_list.empty()) throw Error("sweep_eps: empty epsilon list");
    std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
    std::vector<SweepRow> rows;
    for (double eps : eps_list) {
        SweepRow row;
        row.epsilon = eps;
        auto modes = eps_modes(sys, eps);
        row.lower = lambda_lower(modes, cfg);
        row.upper = lambda_upper_lognorm(modes);
        row.eps_times_lower = eps * row.lower.value;
        row.verdict = classify(row.lower, row.upper);
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Sweep CSV (External interface): epsilon,lower,upper,eps_times_lower,verdict.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "epsilon,lower,upper,eps_times_lower,verdict\n";
    char buf[64];
    for (const auto& r : rows) {
        auto put = [&](double v, char sep) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            os << buf << sep;
        };
        put(r.epsilon, ',');
        put(r.lower.value, ',');
        put(r.upper.value, ',');
        put(r.eps_times_lower, ',');
        os << to_string(r.verdict) << "\n";
    }
}

struct ChainConfig {
    std::vector<double> eps_list{0.1, 0.05, 0.01};
    SearchConfig search;
    CheckSampleConfig check;
    KsetConfig kset;
    SphereConfig sphere;
    GreedyConfig greedy;
    double tol = 1e-6;  // slack for the consistency flags
};

struct ChainEpsRow {
    double epsilon = 0.0;
    LyapunovBound search_lower;    // direct witness search on the eps modes
    double lifted_value = -std::numeric_limits<double>::infinity();  // from the check certificate
    double lower = 0.0;            // max(search, lifted)
    LyapunovBound upper;
    bool below_hat = false;        // lower <= hat upper + tol
};

/// Bounds for every member of the ordering chain
/// lambda(reduced) <= lambda(check) <= lambda(Sigma_eps) (small eps)
/// <= lambda(inclusion), with one-sided consistency flags. Requires the
/// fast-stability assumption to HOLD.
struct ChainReport {
    AssumptionReport assumption;
    LyapunovBound bar_lower, bar_upper;     // reduced system
    LyapunovBound check_lower;              // over the sampled averaged modes
    int check_samples = 0;
    CheckCertificate certificate;           // best expanding averaged mode, if any
    double certificate_abscissa = -std::numeric_limits<double>::infinity();
    std::vector<ChainEpsRow> eps_rows;
    LyapunovBound hat_upper;
    LyapunovBound hat_greedy;
    bool consistent = false;                // all flags true
};

inline ChainReport chain_experiment(const BlockSystem& sys, const ChainConfig& cfg = {}) {
    ChainReport rep;
    rep.assumption = check_assumption_fast_stable(sys, 20.0, cfg.search);
    if (rep.assumption.verdict != Verdict::Holds)
        throw NumericalRefusal(
            "chain_experiment: the ordering chain requires certified fast stability; verdict " +
            std::string(to_string(rep.assumption.verdict)));

    auto reduced = reduced_modes(sys);
    rep.bar_lower = lambda_lower(reduced, cfg.search);
    rep.bar_upper = lambda_upper_lognorm(reduced);

    // Averaged (check) modes: the sample always contains the reduced modes
    // (indices 0..k-1), so the reduced witness transplants verbatim and
    // check_lower >= bar_lower by construction.
    auto samples = sample_check_modes(sys, cfg.check);
    rep.check_samples = (int)samples.size();
    std::vector<Matrix> check_mode_list;
    check_mode_list.reserve(samples.size());
    for (const auto& s : samples) check_mode_list.push_back(s.Lambda);
    rep.check_lower = lambda_lower(check_mode_list, cfg.search, {rep.bar_lower.witness});

    // Instability certificate: the sampled averaged mode with the largest
    // spectral abscissa, run for unit time.
    size_t best = 0;
    for (size_t i = 0; i < samples.size(); ++i)
        if (spectral_abscissa(samples[i].Lambda) > spectral_abscissa(samples[best].Lambda))
            best = i;
    rep.certificate_abscissa = spectral_abscissa(samples[best].Lambda);
    rep.certificate.entries = {{samples[best].signal, 1.0}};

    rep.hat_upper = hat_upper_bound(sys, cfg.kset, cfg.sphere, &rep.assumption);
    Vector x0 = Vector::Zero(sys.n);
    x0(0) = 1.0;
    rep.hat_greedy = hat_lower_greedy(sys, x0, cfg.greedy, cfg.kset, cfg.sphere, &rep.assumption);

    bool all_ok = true;
    for (double eps : cfg.eps_list) {
        ChainEpsRow row;
        row.epsilon = eps;
        auto modes = eps_modes(sys, eps);
        row.search_lower = lambda_lower(modes, cfg.search);
        if (rep.certificate_abscissa > 0.0) {
            try {
                row.lifted_value = lift_check_certificate(sys, rep.certificate, eps).value;
            } catch (const Error&) {
                // Lift unavailable at this epsilon (too large, or rho <= 1).
            }
        }
        row.lower = std::max(row.search_lower.value, row.lifted_value);
        row.upper = lambda_upper_lognorm(modes);
        row.below_hat = row.lower <= rep.hat_upper.value + cfg.tol;
        all_ok = all_ok && row.below_hat;
        rep.eps_rows.push_back(std::move(row));
    }
    std::sort(rep.eps_rows.begin(), rep.eps_rows.end(),
              [](const ChainEpsRow& a, const ChainEpsRow& b) { return a.epsilon > b.epsilon; });

    all_ok = all_ok && rep.bar_lower.value <= rep.check_lower.value + cfg.tol;
    all_ok = all_ok && rep.bar_lower.value <= rep.hat_upper.value + cfg.tol;
    all_ok = all_ok && rep.check_lower.value <= rep.hat_upper.value + cfg.tol;
    rep.consistent = all_ok;
    return rep;
}

inline json bound_to_json(const LyapunovBound& b) {
    json j = {{"value", b.value},
              {"side", b.side == LyapunovBound::Side::Lower ? "lower" : "upper"},
              {"method", b.method},
              {"heuristic", b.heuristic}};
    if (b.side == LyapunovBound::Side::Lower && !b.witness.pieces.empty()) {
        j["witness"] = signal_to_json(b.witness);
        j["t"] = b.t;
        j["rho"] = b.rho;
    }
    return j;
}

/// ChainReport JSON (External interface).
inline json chain_to_json(const ChainReport& rep) {
    json eps_rows = json::array();
    for (const auto& r : rep.eps_rows)
        eps_rows.push_back({{"epsilon", r.epsilon},
                            {"search_lower", bound_to_json(r.search_lower)},
                            {"lifted_value", r.lifted_value},
                            {"lower", r.lower},
                            {"upper", bound_to_json(r.upper)},
                            {"below_hat", r.below_hat}});
    json cert = json::array();
    for (const auto& e : rep.certificate.entries)
        cert.push_back({{"sigma", signal_to_json(e.sigma)}, {"t", e.t}});
    return {{"assumption",
             {{"verdict", to_string(rep.assumption.verdict)},
              {"lower", bound_to_json(rep.assumption.lower)},
              {"upper", bound_to_json(rep.assumption.upper)},
              {"decay",
               {{"c", rep.assumption.decay.c},
                {"delta", rep.assumption.decay.delta},
                {"method", rep.assumption.decay.method}}}}},
            {"bar", {{"lower", bound_to_json(rep.bar_lower)}, {"upper", bound_to_json(rep.bar_upper)}}},
            {"check",
             {{"lower", bound_to_json(rep.check_lower)},
              {"samples", rep.check_samples},
              {"certificate", cert},
              {"certificate_abscissa", rep.certificate_abscissa}}},
            {"eps", eps_rows},
            {"hat",
             {{"upper", bound_to_json(rep.hat_upper)}, {"greedy", bound_to_json(rep.hat_greedy)}}},
            {"consistent", rep.consistent}};
}

}  // namespace slyap
