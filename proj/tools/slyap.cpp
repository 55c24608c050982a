// Command-line front end for the singularly perturbed switching-system
// analysis library. Exit codes: 0 success, 1 validation/usage error,
// 2 numerical refusal (failed assumption, singularity), 3 IO error.

#include <slyap/assumption.hpp>
#include <slyap/auxiliary.hpp>
#include <slyap/example.hpp>
#include <slyap/flows.hpp>
#include <slyap/inclusion.hpp>
#include <slyap/lyapunov.hpp>
#include <slyap/matkit.hpp>
#include <slyap/model.hpp>
#include <slyap/search.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace slyap;

json load_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError({{-1, "", path + ": " + e.what()}});
    }
    return j;
}

BlockSystem load_system(const std::string& path) { return validate_system(load_json(path)); }

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw IoError("cannot open " + out_path + " for writing");
    f << j.dump(2) << "\n";
}

json flow_to_json(const FlowResult& fr) {
    return {{"t", fr.t},
            {"signal_digest", fr.signal_digest},
            {"Phi", detail::matrix_to_json(fr.Phi)},
            {"rho", spectral_radius(fr.Phi)}};
}

// Repeats `sig` cyclically to cover `horizon`, trimming the final piece.
PwcSignal cover_horizon(const PwcSignal& sig, double horizon) {
    if (!(horizon > 0.0)) throw Error("horizon must be positive");
    PwcSignal out;
    double t = 0.0;
    while (t < horizon) {
        for (const auto& p : sig.pieces) {
            if (t >= horizon) break;
            double d = std::min(p.dwell, horizon - t);
            out.pieces.push_back({p.mode, d});
            t += d;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"slyap: stability analysis of singularly perturbed switching systems"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int threads = 0;  // accepted for interface compatibility; execution is serial
    app.add_option("--seed", seed, "global random seed (default 0)");
    app.add_option("--threads", threads, "worker cap (env SLYAP_THREADS)")
        ->envname("SLYAP_THREADS");

    std::string sys_path, sig_path, out_path, cert_path;
    double eps = 0.0, mu = 0.0, horizon = 0.0, dt = 0.0, tol = 0.05;
    std::vector<double> x0, eps_list, xvec;
    int count = 64, max_pieces = 4;

    auto* c_validate = app.add_subcommand("validate", "check a system description");
    c_validate->add_option("system", sys_path)->required();

    auto* c_flow = app.add_subcommand("flow", "flow of a switching signal");
    c_flow->add_option("system", sys_path)->required();
    c_flow->add_option("signal", sig_path)->required();
    c_flow->add_option("--eps", eps, "use the eps-scaled modes");

    auto* c_sim = app.add_subcommand("simulate", "dense trajectory to CSV");
    c_sim->add_option("system", sys_path)->required();
    c_sim->add_option("signal", sig_path)->required();
    c_sim->add_option("--eps", eps)->required();
    c_sim->add_option("--x0", x0, "initial state, n+m numbers")->required()->expected(-1);
    c_sim->add_option("--horizon", horizon)->required();
    c_sim->add_option("--dt", dt)->required();
    c_sim->add_option("--out", out_path)->required();

    auto* c_bar = app.add_subcommand("bar", "reduced (slow) system and its bounds");
    c_bar->add_option("system", sys_path)->required();

    auto* c_parts = app.add_subcommand("lambda-parts", "averaged matrix of a signal");
    c_parts->add_option("system", sys_path)->required();
    c_parts->add_option("signal", sig_path)->required();

    auto* c_check = app.add_subcommand("check-sample", "sample of averaged modes");
    c_check->add_option("system", sys_path)->required();
    c_check->add_option("--count", count);
    c_check->add_option("--max-pieces", max_pieces);

    auto* c_bounds = app.add_subcommand("bounds", "Lyapunov-exponent bounds and verdict");
    c_bounds->add_option("system", sys_path)->required();
    auto* bounds_eps = c_bounds->add_option("--eps", eps, "bound the eps-scaled system");
    c_bounds->add_option("--mu", mu, "spectral shift");

    auto* c_sweep = app.add_subcommand("sweep", "per-epsilon bounds as CSV");
    c_sweep->add_option("system", sys_path)->required();
    c_sweep->add_option("--eps-list", eps_list)->required()->expected(-1);
    c_sweep->add_option("--out", out_path);

    auto* c_kset = app.add_subcommand("kset", "fast-dynamics aggregate estimate");
    c_kset->add_option("system", sys_path)->required();
    c_kset->add_option("--x", xvec, "slow state, n numbers")->required()->expected(-1);
    c_kset->add_option("--tol", tol);
    c_kset->add_option("--out", out_path);

    auto* c_hat = app.add_subcommand("hat-bounds", "fast-switching inclusion bounds");
    c_hat->add_option("system", sys_path)->required();

    auto* c_certify = app.add_subcommand("certify", "lift an averaged-mode certificate");
    c_certify->add_option("system", sys_path)->required();
    c_certify->add_option("--from-check", cert_path)->required();
    c_certify->add_option("--eps", eps)->required();

    auto* c_chain = app.add_subcommand("chain", "full ordering-chain report");
    c_chain->add_option("system", sys_path)->required();

    auto* c_example = app.add_subcommand("example", "reproduce the built-in demo");
    c_example->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 1;
    }

    try {
        if (*c_validate) {
            auto res = try_validate_system(load_json(sys_path));
            if (!res.ok()) {
                for (const auto& v : res.violations) {
                    std::cerr << "invalid";
                    if (v.mode >= 0) std::cerr << ": mode " << v.mode << ", field " << v.field;
                    std::cerr << ": " << v.message << "\n";
                }
                return 1;
            }
            std::cout << "OK: n=" << res.system->n << " m=" << res.system->m
                      << " modes=" << res.system->modes.size() << "\n";
        } else if (*c_flow) {
            auto sys = load_system(sys_path);
            auto sig = parse_signal(load_json(sig_path), (int)sys.modes.size());
            FlowResult fr;
            if (eps > 0.0) {
                fr = eps_flow(sys, sig, eps);
            } else {
                std::vector<Matrix> modes;
                for (const auto& mode : sys.modes) modes.push_back(full_mode_matrix(mode));
                fr = flow(modes, sig);
            }
            emit(flow_to_json(fr), "");
        } else if (*c_sim) {
            auto sys = load_system(sys_path);
            auto sig = parse_signal(load_json(sig_path), (int)sys.modes.size());
            if ((int)x0.size() != sys.n + sys.m)
                throw ValidationError({{-1, "x0", "expected n+m numbers"}});
            Vector v = Eigen::Map<Vector>(x0.data(), (long)x0.size());
            auto traj = simulate(sys, cover_horizon(sig, horizon), eps, v, dt);
            write_trajectory_csv(traj, sys.n, sys.m, out_path);
            std::cout << "wrote " << out_path << " (" << traj.times.size() << " rows)\n";
        } else if (*c_bar) {
            auto sys = load_system(sys_path);
            auto modes = reduced_modes(sys);
            SearchConfig cfg;
            cfg.seed = seed;
            json jm = json::array();
            for (const auto& M : modes) jm.push_back(detail::matrix_to_json(M));
            emit({{"modes", jm},
                  {"lower", bound_to_json(lambda_lower(modes, cfg))},
                  {"upper", bound_to_json(lambda_upper_lognorm(modes))}},
                 "");
        } else if (*c_parts) {
            auto sys = load_system(sys_path);
            auto sig = parse_signal(load_json(sig_path), (int)sys.modes.size());
            emit(lambda_parts_to_json(lambda_parts(sys, sig), sig), "");
        } else if (*c_check) {
            auto sys = load_system(sys_path);
            CheckSampleConfig cfg;
            cfg.count = count;
            cfg.max_pieces = max_pieces;
            cfg.seed = seed;
            json arr = json::array();
            for (const auto& s : sample_check_modes(sys, cfg))
                arr.push_back({{"Lambda", detail::matrix_to_json(s.Lambda)},
                               {"sigma", signal_to_json(s.signal)}});
            emit({{"samples", arr}}, "");
        } else if (*c_bounds) {
            auto sys = load_system(sys_path);
            std::vector<Matrix> modes;
            if (*bounds_eps) {
                modes = eps_modes(sys, eps);
            } else {
                for (const auto& mode : sys.modes) modes.push_back(full_mode_matrix(mode));
            }
            modes = shift_modes(modes, mu);
            SearchConfig cfg;
            cfg.seed = seed;
            auto lo = lambda_lower(modes, cfg);
            auto up = lambda_upper_lognorm(modes);
            emit({{"lower", bound_to_json(lo)},
                  {"upper", bound_to_json(up)},
                  {"verdict", to_string(classify(lo, up))}},
                 "");
        } else if (*c_sweep) {
            auto sys = load_system(sys_path);
            SearchConfig cfg;
            cfg.seed = seed;
            auto rows = sweep_eps(sys, eps_list, cfg);
            if (out_path.empty()) {
                write_sweep_csv(rows, std::cout);
            } else {
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw IoError("cannot open " + out_path + " for writing");
                write_sweep_csv(rows, f);
            }
        } else if (*c_kset) {
            auto sys = load_system(sys_path);
            if ((int)xvec.size() != sys.n)
                throw ValidationError({{-1, "x", "expected n numbers"}});
            Vector v = Eigen::Map<Vector>(xvec.data(), (long)xvec.size());
            KsetConfig cfg;
            cfg.tolerance = tol;
            cfg.seed = seed;
            emit(cloud_to_json(kset_estimate(sys, v, cfg)), out_path);
        } else if (*c_hat) {
            auto sys = load_system(sys_path);
            KsetConfig kcfg;
            kcfg.seed = seed;
            SphereConfig scfg;
            scfg.seed = seed;
            auto rep = check_assumption_fast_stable(sys);
            Vector x0v = Vector::Zero(sys.n);
            x0v(0) = 1.0;
            emit({{"upper", bound_to_json(hat_upper_bound(sys, kcfg, scfg, &rep))},
                  {"greedy",
                   bound_to_json(hat_lower_greedy(sys, x0v, {}, kcfg, scfg, &rep))}},
                 "");
        } else if (*c_certify) {
            auto sys = load_system(sys_path);
            json jc = load_json(cert_path);
            if (!jc.is_object() || !jc.contains("entries") || !jc["entries"].is_array())
                throw ValidationError({{-1, "entries", "certificate must be {\"entries\": [..]}"}});
            CheckCertificate cert;
            for (const auto& je : jc["entries"]) {
                if (!je.contains("sigma") || !je.contains("t"))
                    throw ValidationError({{-1, "entries", "each entry needs sigma and t"}});
                cert.entries.push_back(
                    {parse_signal(je["sigma"], (int)sys.modes.size()), je["t"].get<double>()});
            }
            auto lift = lift_check_certificate(sys, cert, eps);
            emit({{"signal", signal_to_json(lift.signal)},
                  {"t_eps", lift.t_eps},
                  {"total_periods", lift.total_periods},
                  {"rho_total", lift.rho_total},
                  {"rho_period", lift.rho_period},
                  {"value", lift.value},
                  {"eu", lift.rho_total > 1.0}},
                 "");
        } else if (*c_chain) {
            auto sys = load_system(sys_path);
            ChainConfig cfg;
            cfg.search.seed = seed;
            cfg.check.seed = seed;
            cfg.kset.seed = seed;
            cfg.sphere.seed = seed;
            emit(chain_to_json(chain_experiment(sys, cfg)), "");
        } else if (*c_example) {
            auto rep = run_example(out_path, seed);
            emit(example_report_to_json(rep), "");
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const NumericalRefusal& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const SingularMatrixError& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
