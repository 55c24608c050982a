#include <slyap/example.hpp>
#include <slyap/flows.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "oracles.hpp"

using namespace slyap;

TEST_CASE("flow is the left-ordered product of piece exponentials") {
    // Two rotation-free 2x2 modes checked against the eigenvalue oracle.
    oracle::Mat2 a = {{{-1.0, 1.0}, {0.0, -0.1}}};
    oracle::Mat2 b = {{{-3.0, 0.0}, {2.0, -0.1}}};
    Matrix A(2, 2), B(2, 2);
    A << -1, 1, 0, -0.1;
    B << -3, 0, 2, -0.1;
    auto fr = flow({A, B}, PwcSignal{{{0, 1.0}, {1, 0.5}}});
    auto want = oracle::mul2(oracle::expm2(oracle::scale2(b, 0.5)), oracle::expm2(a));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(fr.Phi(i, j) == Catch::Approx(want[i][j]).margin(1e-12));
    CHECK(fr.t == Catch::Approx(1.5));

    CHECK_THROWS_AS(flow({A}, PwcSignal{{{1, 1.0}}}), Error);
    CHECK_THROWS_AS(flow({}, PwcSignal{{{0, 1.0}}}), DimensionError);
}

TEST_CASE("eps_mode scales only the fast rows") {
    auto sys = example_system();
    Matrix N = eps_mode(sys.modes[1], 0.1);
    REQUIRE(N.rows() == 2);
    CHECK(N(0, 0) == -3.0);
    CHECK(N(1, 0) == Catch::Approx(20.0));
    CHECK(N(1, 1) == Catch::Approx(-1.0));
    CHECK_THROWS_AS(eps_mode(sys.modes[0], 0.0), Error);
}

TEST_CASE("demo per-period eps flow matches the explicit 2x2 product") {
    auto sys = example_system();
    for (double eps : {0.1, 0.05, 0.01}) {
        auto fr = eps_flow(sys, PwcSignal{{{0, eps}, {1, eps}}}, eps);
        auto want = oracle::demo_period_flow(eps);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(fr.Phi(i, j) == Catch::Approx(want[i][j]).margin(1e-12));
    }
    // Frozen value at eps = 0.1.
    auto fr = eps_flow(sys, PwcSignal{{{0, 0.1}, {1, 0.1}}}, 0.1);
    CHECK(fr.Phi(0, 0) == Catch::Approx(0.67032004603563933).margin(1e-10));
    CHECK(spectral_radius(fr.Phi) == Catch::Approx(1.1673113175700556).margin(1e-10));
}

TEST_CASE("simulate reproduces scalar exponential decay exactly") {
    std::vector<Matrix> modes = {Matrix::Constant(1, 1, -2.0)};
    Vector x0 = Vector::Constant(1, 3.0);
    auto traj = simulate_modes(modes, PwcSignal{{{0, 1.0}}}, x0, 0.125);
    REQUIRE(traj.times.size() == 9);  // t = 0, 0.125, ..., 1.0
    for (size_t k = 0; k < traj.times.size(); ++k)
        CHECK(traj.states[k](0) == Catch::Approx(3.0 * std::exp(-2.0 * traj.times[k])));
}

TEST_CASE("simulate samples every switching instant") {
    std::vector<Matrix> modes = {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0)};
    auto traj = simulate_modes(modes, PwcSignal{{{0, 0.3}, {1, 0.7}}}, Vector::Constant(1, 1.0),
                               0.25);
    bool has_switch = false;
    for (double t : traj.times) has_switch = has_switch || std::abs(t - 0.3) < 1e-12;
    CHECK(has_switch);
    CHECK(traj.times.back() == Catch::Approx(1.0));
    CHECK(traj.states.back()(0) == Catch::Approx(std::exp(-0.3) * std::exp(0.7)));
}

TEST_CASE("trajectory CSV has the documented header and is deterministic") {
    auto sys = example_system();
    auto run = periodize(PwcSignal{{{0, 0.1}, {1, 0.1}}}, 5);
    Vector x0(2);
    x0 << 1.0, 1.0;
    auto traj = simulate(sys, run, 0.1, x0, 0.01);
    std::ostringstream a, b;
    write_trajectory_csv(traj, 1, 1, a);
    write_trajectory_csv(simulate(sys, run, 0.1, x0, 0.01), 1, 1, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, 8) == "t,x1,y1\n");
}
