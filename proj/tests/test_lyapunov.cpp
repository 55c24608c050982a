#include <slyap/example.hpp>
#include <slyap/lyapunov.hpp>
#include <slyap/search.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"

using namespace slyap;

TEST_CASE("single-mode lower bound is the spectral abscissa") {
    Matrix N(2, 2);
    N << -1.0, 5.0, 0.0, -2.0;
    auto b = lambda_lower({N});
    CHECK(b.value == Catch::Approx(-1.0).margin(1e-9));
    CHECK(b.side == LyapunovBound::Side::Lower);
    CHECK_FALSE(b.heuristic);
}

TEST_CASE("reduced demo modes give -1") {
    auto b = lambda_lower(reduced_modes(example_system()));
    CHECK(b.value == Catch::Approx(-1.0).margin(1e-9));
    auto u = lambda_upper_lognorm(reduced_modes(example_system()));
    CHECK(u.value == Catch::Approx(-1.0).margin(1e-12));
    CHECK(classify(b, u) == Stability::ES);
}

TEST_CASE("a positive scalar mode dominates the sample") {
    double lam = oracle::demo_lambda_closed_form();
    auto b = lambda_lower({Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, lam)});
    CHECK(b.value >= lam - 1e-9);
}

TEST_CASE("lower certificates replay to their claimed value") {
    auto sys = example_system();
    for (double eps : {0.1, 0.01}) {
        auto modes = eps_modes(sys, eps);
        auto b = lambda_lower(modes);
        REQUIRE_FALSE(b.witness.pieces.empty());
        double replay = witness_value(modes, b.witness);
        CHECK(replay == Catch::Approx(b.value).margin(1e-9));
        CHECK(b.value == Catch::Approx(std::log(b.rho) / b.t).margin(1e-9));
        CHECK(b.value <= lambda_upper_lognorm(modes).value + 1e-9);
    }
}

TEST_CASE("shift covariance transports witnesses verbatim") {
    auto modes = eps_modes(example_system(), 0.1);
    SearchConfig cfg;
    cfg.seed = 3;
    auto base = lambda_lower(modes, cfg);
    for (double mu : {0.7, -2.0}) {
        auto shifted = lambda_lower(shift_modes(modes, mu), cfg);
        CHECK(signal_digest(shifted.witness) == signal_digest(base.witness));
        CHECK(shifted.value == Catch::Approx(base.value + mu).margin(1e-12));
        CHECK(lambda_upper_lognorm(shift_modes(modes, mu)).value ==
              Catch::Approx(lambda_upper_lognorm(modes).value + mu).margin(1e-12));
    }
}

TEST_CASE("adding modes never lowers the bound") {
    Matrix N1 = Matrix::Constant(1, 1, -2.0);
    Matrix N2 = Matrix::Constant(1, 1, 0.5);
    CHECK(lambda_lower({N1, N2}).value >= lambda_lower({N1}).value - 1e-12);
}

TEST_CASE("classify covers all verdicts and rejects inconsistent pairs") {
    auto mk = [](double v, LyapunovBound::Side s) {
        LyapunovBound b;
        b.value = v;
        b.side = s;
        return b;
    };
    using S = LyapunovBound::Side;
    CHECK(classify(mk(-1.0, S::Lower), mk(-0.5, S::Upper)) == Stability::ES);
    CHECK(classify(mk(0.2, S::Lower), mk(3.0, S::Upper)) == Stability::EU);
    CHECK(classify(mk(-0.1, S::Lower), mk(0.1, S::Upper)) == Stability::Undecided);
    CHECK_THROWS_AS(classify(mk(1.0, S::Lower), mk(0.0, S::Upper)), Error);
}

TEST_CASE("eps sweep matches the scalar quadratic-formula oracle") {
    // Single mode A=0, B=1, C=1, D=1: the eps matrix [[0,1],[1/e,1/e]] has
    // top eigenvalue quad_root(1/e, 1/e), and eps * lambda -> 1.
    BlockSystem sys;
    sys.n = sys.m = 1;
    BlockMode mode;
    mode.A = Matrix::Constant(1, 1, 0.0);
    mode.B = Matrix::Constant(1, 1, 1.0);
    mode.C = Matrix::Constant(1, 1, 1.0);
    mode.D = Matrix::Constant(1, 1, 1.0);
    sys.modes = {mode};
    auto rows = sweep_eps(sys, {0.001, 0.1, 0.01});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].epsilon == 0.1);  // sorted descending
    for (const auto& r : rows) {
        double lam = oracle::quad_root(1.0 / r.epsilon, 1.0 / r.epsilon);
        CHECK(r.lower.value == Catch::Approx(lam).epsilon(1e-6));
        CHECK(std::abs(r.eps_times_lower - 1.0) <= 2.0 * r.epsilon);
        CHECK(r.verdict == Stability::EU);
    }
}

TEST_CASE("demo sweep certifies instability at eps = 0.1") {
    auto rows = sweep_eps(example_system(), {0.1});
    double rate = std::log(oracle::rho2(oracle::demo_period_flow(0.1))) / 0.2;
    CHECK(rows[0].lower.value >= rate - 1e-6);
    CHECK(rows[0].verdict == Stability::EU);
    std::ostringstream os;
    write_sweep_csv(rows, os);
    CHECK(os.str().rfind("epsilon,lower,upper,eps_times_lower,verdict\n", 0) == 0);
    CHECK(os.str().find("EU") != std::string::npos);
}

TEST_CASE("chain experiment refuses unstable fast dynamics") {
    BlockSystem sys;
    sys.n = sys.m = 1;
    BlockMode mode;
    mode.A = Matrix::Constant(1, 1, 0.0);
    mode.B = Matrix::Constant(1, 1, 1.0);
    mode.C = Matrix::Constant(1, 1, 1.0);
    mode.D = Matrix::Constant(1, 1, 1.0);  // fast dynamics unstable
    sys.modes = {mode};
    CHECK_THROWS_AS(chain_experiment(sys), NumericalRefusal);
}

TEST_CASE("chain collapses for a decoupled stable system") {
    BlockSystem sys;
    sys.n = sys.m = 1;
    BlockMode m1, m2;
    m1.A = Matrix::Constant(1, 1, -0.5);
    m1.B = m1.C = Matrix::Constant(1, 1, 0.0);
    m1.D = Matrix::Constant(1, 1, -1.0);
    m2 = m1;
    m2.A = Matrix::Constant(1, 1, -2.0);
    sys.modes = {m1, m2};
    ChainConfig cfg;
    cfg.eps_list = {0.01};
    auto rep = chain_experiment(sys, cfg);
    CHECK(rep.consistent);
    CHECK(rep.bar_lower.value == Catch::Approx(-0.5).margin(1e-9));
    CHECK(rep.check_lower.value == Catch::Approx(-0.5).margin(1e-9));
    CHECK(rep.eps_rows[0].lower == Catch::Approx(-0.5).margin(1e-9));
    CHECK(rep.hat_upper.value == Catch::Approx(-0.5).margin(1e-9));
    CHECK(rep.hat_greedy.value == Catch::Approx(-0.5).margin(1e-9));
}
