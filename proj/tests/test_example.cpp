#include <slyap/example.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"

using namespace slyap;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("gamma test evaluates the planar instability condition") {
    auto sys = example_system();
    auto rep = gamma_sp5(full_mode_matrix(sys.modes[0]), full_mode_matrix(sys.modes[1]));
    CHECK(rep.gamma == Catch::Approx(-0.8).margin(1e-12));
    CHECK(rep.det_product == Catch::Approx(0.03).margin(1e-12));
    CHECK(rep.holds);

    auto id = gamma_sp5(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    CHECK(id.gamma == Catch::Approx(1.0));
    CHECK(id.threshold == Catch::Approx(-1.0));
    CHECK_FALSE(id.holds);

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -1.0;
    D(1, 1) = -2.0;
    auto dd = gamma_sp5(D, D);
    CHECK(dd.gamma == Catch::Approx(2.0));
    CHECK_FALSE(dd.holds);

    Matrix flip = Matrix::Identity(2, 2);
    flip(1, 1) = -1.0;  // det -1: product with identity is negative
    CHECK_THROWS_AS(gamma_sp5(flip, Matrix::Identity(2, 2)), Error);
    CHECK_THROWS_AS(gamma_sp5(Matrix::Identity(3, 3), Matrix::Identity(2, 2)), DimensionError);
}

TEST_CASE("demo run emits all artifacts with the expected headline numbers") {
    auto dir = std::filesystem::temp_directory_path() / "slyap_demo_test";
    std::filesystem::remove_all(dir);
    auto rep = run_example(dir.string());

    CHECK(rep.gamma.holds);
    REQUIRE(rep.bar_modes.size() == 2);
    CHECK(rep.bar_modes[0] == Catch::Approx(-1.0));
    CHECK(rep.bar_modes[1] == Catch::Approx(-3.0));
    CHECK(rep.lambda_check_value ==
          Catch::Approx(oracle::demo_lambda_closed_form()).margin(1e-9));
    REQUIRE(rep.rho_at_eps.size() == 3);
    for (const auto& [eps, rho] : rep.rho_at_eps) {
        CHECK(rho == Catch::Approx(oracle::rho2(oracle::demo_period_flow(eps))).margin(1e-9));
        CHECK(rho > 1.0);
    }

    for (const char* f : {"figure1.csv", "lambda.json", "gamma.json", "sweep.csv", "chain.json"})
        CHECK(std::filesystem::exists(dir / f));

    // Figure data: exponential growth consistent with the per-period radius.
    auto csv = slurp((dir / "figure1.csv").string());
    CHECK(csv.rfind("t,x1,y1\n", 0) == 0);
    // Chain JSON parses and is consistent.
    auto chain = json::parse(slurp((dir / "chain.json").string()));
    CHECK(chain["assumption"]["verdict"] == "HOLDS");
    CHECK(chain["bar"]["lower"]["value"].get<double>() == Catch::Approx(-1.0).margin(1e-6));

    // Regeneration under the same seed is byte-identical.
    auto dir2 = std::filesystem::temp_directory_path() / "slyap_demo_test2";
    std::filesystem::remove_all(dir2);
    run_example(dir2.string());
    for (const char* f : {"figure1.csv", "lambda.json", "gamma.json", "sweep.csv", "chain.json"})
        CHECK(slurp((dir / f).string()) == slurp((dir2 / f).string()));
}
