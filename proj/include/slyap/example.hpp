#pragma once

// The built-in planar demonstration system: a two-mode block system with
// n = m = 1 that is stable under slow switching but destabilized by
// sufficiently fast switching. One call reproduces all its reports.

#include "slyap/auxiliary.hpp"
#include "slyap/flows.hpp"
#include "slyap/lyapunov.hpp"
#include "slyap/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

namespace slyap {

/// Modes [[-1, 1], [0, -0.1]] and [[-3, 0], [2, -0.1]], split as
/// A, B / C, D with n = m = 1.
inline BlockSystem example_system() {
    BlockSystem sys;
    sys.n = sys.m = 1;
    BlockMode m1, m2;
    m1.A = Matrix::Constant(1, 1, -1.0);
    m1.B = Matrix::Constant(1, 1, 1.0);
    m1.C = Matrix::Constant(1, 1, 0.0);
    m1.D = Matrix::Constant(1, 1, -0.1);
    m2.A = Matrix::Constant(1, 1, -3.0);
    m2.B = Matrix::Constant(1, 1, 0.0);
    m2.C = Matrix::Constant(1, 1, 2.0);
    m2.D = Matrix::Constant(1, 1, -0.1);
    sys.modes = {m1, m2};
    return sys;
}

/// The destabilizing 2-periodic signal: one unit in each mode (T = 2).
inline PwcSignal example_signal() { return PwcSignal{{{0, 1.0}, {1, 1.0}}}; }

struct GammaReport {
    double gamma = 0.0;
    double det_product = 0.0;
    double threshold = 0.0;  // -sqrt(det_product)
    bool holds = false;      // gamma < threshold
};

/// Planar fast-switching instability test for two 2x2 matrices:
/// Gamma = (tr M1 tr M2 - tr(M1 M2)) / 2, compared against
/// -sqrt(det M1 det M2).
inline GammaReport gamma_sp5(const Matrix& M1, const Matrix& M2) {
    if (M1.rows() != 2 || M1.cols() != 2 || M2.rows() != 2 || M2.cols() != 2)
        throw DimensionError("gamma_sp5: both matrices must be 2x2");
    GammaReport rep;
    rep.gamma = 0.5 * (M1.trace() * M2.trace() - (M1 * M2).trace());
    rep.det_product = M1.determinant() * M2.determinant();
    if (rep.det_product < 0.0)
        throw Error("gamma_sp5: negative determinant product, threshold undefined");
    rep.threshold = -std::sqrt(rep.det_product);
    rep.holds = rep.gamma < rep.threshold;
    return rep;
}

inline Matrix full_mode_matrix(const BlockMode& mode) {
    Matrix M(mode.A.rows() + mode.C.rows(), mode.A.cols() + mode.B.cols());
    M.topLeftCorner(mode.A.rows(), mode.A.cols()) = mode.A;
    M.topRightCorner(mode.B.rows(), mode.B.cols()) = mode.B;
    M.bottomLeftCorner(mode.C.rows(), mode.C.cols()) = mode.C;
    M.bottomRightCorner(mode.D.rows(), mode.D.cols()) = mode.D;
    return M;
}

struct ExampleReport {
    GammaReport gamma;
    std::vector<double> bar_modes;     // reduced (slow) modes, scalars
    double lambda_check_value = 0.0;   // Lambda(2, demo signal), scalar
    std::vector<std::pair<double, double>> rho_at_eps;  // (epsilon, per-period rho)
    std::string figure1_csv_path;
};

/// Emits figure1.csv (trajectory at eps = 0.1 from (1,1) under the
/// eps-rescaled periodic signal), lambda.json, gamma.json, sweep.csv, and
/// chain.json into `out_dir`, and returns the headline numbers.
inline ExampleReport run_example(const std::string& out_dir, std::uint64_t seed = 0) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir);

    BlockSystem sys = example_system();
    PwcSignal sig = example_signal();
    ExampleReport rep;

    rep.gamma = gamma_sp5(full_mode_matrix(sys.modes[0]), full_mode_matrix(sys.modes[1]));
    {
        std::ofstream f(out_dir + "/gamma.json", std::ios::binary);
        if (!f) throw IoError("cannot open " + out_dir + "/gamma.json");
        f << json({{"gamma", rep.gamma.gamma},
                   {"det_product", rep.gamma.det_product},
                   {"threshold", rep.gamma.threshold},
                   {"holds", rep.gamma.holds}})
                 .dump(2)
          << "\n";
    }

    for (const auto& M : reduced_modes(sys)) rep.bar_modes.push_back(M(0, 0));

    auto parts = lambda_parts(sys, sig);
    rep.lambda_check_value = parts.Lambda(0, 0);
    {
        std::ofstream f(out_dir + "/lambda.json", std::ios::binary);
        if (!f) throw IoError("cannot open " + out_dir + "/lambda.json");
        f << lambda_parts_to_json(parts, sig).dump(2) << "\n";
    }

    // Per-period spectral radius of the eps-level flow for the rescaled
    // signal (one period lasts 2 eps).
    for (double eps : {0.1, 0.05, 0.01}) {
        PwcSignal scaled{{{0, eps}, {1, eps}}};
        double rho = spectral_radius(eps_flow(sys, scaled, eps).Phi);
        rep.rho_at_eps.emplace_back(eps, rho);
    }

    // Figure data: eps = 0.1, x0 = (1, 1), horizon 20, sample step 0.01.
    {
        const double eps = 0.1, horizon = 20.0;
        PwcSignal scaled{{{0, eps}, {1, eps}}};
        PwcSignal run = periodize(scaled, (int)std::llround(horizon / (2.0 * eps)));
        Vector x0(2);
        x0 << 1.0, 1.0;
        auto traj = simulate(sys, run, eps, x0, 0.01);
        rep.figure1_csv_path = out_dir + "/figure1.csv";
        write_trajectory_csv(traj, sys.n, sys.m, rep.figure1_csv_path);
    }

    SearchConfig search;
    search.seed = seed;
    {
        std::ofstream f(out_dir + "/sweep.csv", std::ios::binary);
        if (!f) throw IoError("cannot open " + out_dir + "/sweep.csv");
        write_sweep_csv(sweep_eps(sys, {0.1, 0.05, 0.01}, search), f);
    }
    {
        ChainConfig ccfg;
        ccfg.search.seed = seed;
        ccfg.check.seed = seed;
        ccfg.kset.seed = seed;
        ccfg.sphere.seed = seed;
        std::ofstream f(out_dir + "/chain.json", std::ios::binary);
        if (!f) throw IoError("cannot open " + out_dir + "/chain.json");
        f << chain_to_json(chain_experiment(sys, ccfg)).dump(2) << "\n";
    }
    return rep;
}

inline json example_report_to_json(const ExampleReport& rep) {
    json rho = json::array();
    for (const auto& [eps, r] : rep.rho_at_eps) rho.push_back({{"epsilon", eps}, {"rho", r}});
    return {{"gamma", rep.gamma.gamma},
            {"det_product", rep.gamma.det_product},
            {"sp5_holds", rep.gamma.holds},
            {"bar_modes", rep.bar_modes},
            {"lambda_check_value", rep.lambda_check_value},
            {"rho_at_eps", rho},
            {"figure1_csv_path", rep.figure1_csv_path}};
}

}  // namespace slyap
