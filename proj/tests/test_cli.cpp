#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "pwax/cli.hpp"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("pwax_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

} // namespace

TEST_CASE("approx command") {
    const fs::path dir = fresh_dir("approx");
    const int status = pwax::cli::run({"approx", "--f", "sin(x)", "--domain",
                                       "0:6.283185307179586", "--tol", "0.3", "--method", "1",
                                       "--grid", "101", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "pwa.json");
    CHECK(j.at("breakpoints").size() == 4);
    const std::string csv = slurp(dir / "approx_samples.csv");
    CHECK(csv.rfind("x,f,approx,error\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 102);
}

TEST_CASE("approx of an affine function uses two breakpoints") {
    const fs::path dir = fresh_dir("approx_affine");
    const int status = pwax::cli::run({"approx", "--f", "2*x+1", "--domain", "-1:1", "--tol",
                                       "0.001", "--grid", "11", "--out", dir.string()});
    CHECK(status == 0);
    CHECK(load_json(dir / "pwa.json").at("breakpoints").size() == 2);
}

TEST_CASE("approx with curvature placement verifies per-segment bounds") {
    const fs::path dir = fresh_dir("approx_m2");
    const int status = pwax::cli::run({"approx", "--f", "1/x", "--domain", "1:10", "--tol",
                                       "0.05", "--method", "2", "--grid", "11", "--out",
                                       dir.string()});
    CHECK(status == 0);
}

TEST_CASE("approx rejects bad input") {
    CHECK(pwax::cli::run({"approx", "--f", "sin(", "--domain", "0:1", "--tol", "0.1"}) != 0);
    CHECK(pwax::cli::run({"approx", "--f", "sin(x)", "--domain", "0:1", "--tol", "-1"}) != 0);
    CHECK(pwax::cli::run({"approx", "--f", "sin(x)", "--domain", "1:0", "--tol", "0.1"}) != 0);
}

TEST_CASE("compose command reproduces the per-node error table") {
    const fs::path dir = fresh_dir("compose");
    const int status =
        pwax::cli::run({"compose", "--f", "(sin(1/x))^2", "--box", "x=1:3", "--tol", "0.01",
                        "--grid", "501", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "graph.json");
    CHECK(j.at("nodes").size() == 4);
    const auto eps_slope = j.at("eps_slope");
    const auto eps_deriv = j.at("eps_deriv");
    CHECK(std::abs(eps_slope.at("2").get<double>() - 0.0186) <= 1e-3);
    CHECK(std::abs(eps_slope.at("3").get<double>() - 0.0391) <= 1e-3);
    CHECK(std::abs(eps_deriv.at("2").get<double>() - 0.0194) <= 1e-3);
    CHECK(std::abs(eps_deriv.at("3").get<double>() - 0.0427) <= 1e-3);
    CHECK(slurp(dir / "compose_samples.csv").rfind("x,exact,approx,error,eps_bound\n", 0) == 0);
}

TEST_CASE("compose of an affine expression is exact at zero tolerance") {
    const fs::path dir = fresh_dir("compose_affine");
    const int status = pwax::cli::run({"compose", "--f", "3*x + 2", "--box", "x=-1:1", "--tol",
                                       "0", "--grid", "101", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "graph.json");
    const std::string out = std::to_string(j.at("output").get<int>());
    CHECK(j.at("eps_deriv").at(out).get<double>() == 0.0);
}

TEST_CASE("compose with curvature fits") {
    const fs::path dir = fresh_dir("compose_m2");
    const int status = pwax::cli::run({"compose", "--f", "(sin(1/x))^2", "--box", "x=1:3",
                                       "--tol", "0.01", "--method", "2", "--grid", "301",
                                       "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "graph.json");
    // curvature placement never uses fewer breakpoints here
    CHECK(j.at("nodes")[1].at("pwa").at("breakpoints").size() >= 6);
}

TEST_CASE("compose secant mode") {
    const fs::path dir = fresh_dir("compose_secant");
    const int status = pwax::cli::run({"compose", "--f", "(sin(1/x))^2", "--box", "x=1:3",
                                       "--tols", "0.05,0.0342,0.0661", "--mode", "secant",
                                       "--grid", "501", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "graph.json");
    const auto eps = j.at("eps_secant");
    CHECK(std::abs(eps.at("1").get<double>() - 0.05) <= 1e-9);
    CHECK(std::abs(eps.at("2").get<double>() - 0.0728) <= 1e-3);
    CHECK(std::abs(eps.at("3").get<double>() - 0.1512) <= 1e-3);
}

TEST_CASE("compose identical invocations write identical bytes") {
    const fs::path dir1 = fresh_dir("compose_det1");
    const fs::path dir2 = fresh_dir("compose_det2");
    for (const fs::path& dir : {dir1, dir2}) {
        const int status =
            pwax::cli::run({"compose", "--f", "exp(sin(x))", "--box", "x=0:2", "--tol", "0.05",
                            "--grid", "201", "--seed", "7", "--out", dir.string()});
        CHECK(status == 0);
    }
    CHECK(slurp(dir1 / "graph.json") == slurp(dir2 / "graph.json"));
    CHECK(slurp(dir1 / "compose_samples.csv") == slurp(dir2 / "compose_samples.csv"));
}

TEST_CASE("staircase command") {
    const fs::path dir = fresh_dir("staircase");
    const int status =
        pwax::cli::run({"staircase", "--f", "sin(x)", "--domain", "0:6.283185307179586",
                        "--tau-lo", "1e-3", "--samples", "80", "--out", dir.string()});
    CHECK(status == 0);
    const std::string csv = slurp(dir / "staircase.csv");
    CHECK(csv.rfind("tau,breakpoints\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 4);

    const fs::path affine_dir = fresh_dir("staircase_affine");
    CHECK(pwax::cli::run({"staircase", "--f", "3*x-1", "--domain", "0:1", "--samples", "20",
                          "--out", affine_dir.string()}) == 0);
    const std::string affine_csv = slurp(affine_dir / "staircase.csv");
    CHECK(std::count(affine_csv.begin(), affine_csv.end(), '\n') == 2);
}

TEST_CASE("allocate on a small composed function") {
    const fs::path dir = fresh_dir("allocate");
    const int status = pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3",
                                       "--budget", "24", "--samples", "40", "--tau-lo", "1e-3",
                                       "--grid", "301", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "allocation.json");
    CHECK(j.at("total_breakpoints").get<long>() <= 24);
    CHECK(j.at("empirical_max_error").get<double>() <=
          j.at("composed_bound").get<double>() + 1e-9);

    // the tolerance-target form solves the inverse problem
    const fs::path dir2 = fresh_dir("allocate_tol");
    const double bound = j.at("composed_bound").get<double>();
    const int status2 = pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3",
                                        "--tolerance", std::to_string(bound * 1.0001),
                                        "--samples", "40", "--tau-lo", "1e-3", "--grid", "301",
                                        "--out", dir2.string()});
    CHECK(status2 == 0);
    const auto j2 = load_json(dir2 / "allocation.json");
    CHECK(j2.at("total_breakpoints").get<long>() <= 24);
    CHECK(j2.at("composed_bound").get<double>() <= bound * 1.0001);
}

TEST_CASE("allocate rejects infeasible budgets") {
    CHECK(pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3", "--budget", "3",
                          "--samples", "20"}) != 0);
    CHECK(pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3"}) != 0);
    CHECK(pwax::cli::run({"allocate", "--bench", "nosuch", "--budget", "10"}) != 0);
}

TEST_CASE("allocate identical invocations write identical bytes") {
    const fs::path dir1 = fresh_dir("allocate_det1");
    const fs::path dir2 = fresh_dir("allocate_det2");
    for (const fs::path& dir : {dir1, dir2}) {
        const int status = pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3",
                                           "--budget", "20", "--samples", "30", "--tau-lo",
                                           "1e-3", "--grid", "201", "--seed", "3", "--out",
                                           dir.string()});
        CHECK(status == 0);
    }
    CHECK(slurp(dir1 / "allocation.json") == slurp(dir2 / "allocation.json"));
    CHECK(slurp(dir1 / "graph.json") == slurp(dir2 / "graph.json"));
}

TEST_CASE("uniform baseline allocation") {
    const fs::path dir = fresh_dir("allocate_uniform");
    const int status =
        pwax::cli::run({"allocate", "--f", "(sin(1/x))^2", "--box", "x=1:3", "--budget", "24",
                        "--uniform-baseline", "--grid", "301", "--out", dir.string()});
    CHECK(status == 0);
    const auto j = load_json(dir / "allocation.json");
    CHECK(j.at("objective") == "uniform_baseline");
    CHECK(j.at("total_breakpoints").get<long>() == 24);
}
