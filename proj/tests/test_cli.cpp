#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "potlab/cli/commands.hpp"
#include "potlab/cli/weight_expr.hpp"
#include "potlab/core/errors.hpp"
#include "potlab/core/io.hpp"

using namespace potlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("potlab_test_" + name);
  fs::remove_all(p);
  return p;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "potlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_text_file(p.string())); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("weight expressions") {
    CHECK(WeightExpr::parse("x1^2")(Point{3.0, 0.0}) == 9.0);
    CHECK(WeightExpr::parse("(r^2-1)/4")(Point{0.6, 0.8}) == doctest::Approx(0.0));
    CHECK(WeightExpr::parse("1 + 2*3 - 4/2")(Point{0.0}) == 5.0);
    CHECK(WeightExpr::parse("-x1^2")(Point{2.0}) == -4.0);
    CHECK(WeightExpr::parse("exp(log(2)) * sqrt(abs(-9))")(Point{0.0}) == doctest::Approx(6.0));
    CHECK(WeightExpr::parse("x2^-1")(Point{0.0, 4.0}) == 0.25);
    CHECK(WeightExpr::parse("2*-3")(Point{0.0}) == -6.0);
    CHECK(WeightExpr::parse("--1")(Point{0.0}) == 1.0);
    CHECK(WeightExpr::parse("sin(0) + cos(0)")(Point{0.0}) == 1.0);
    CHECK(WeightExpr::parse(" r ")(Point{3.0, 4.0}) == 5.0);
  }

  TEST_CASE("weight syntax errors carry their offset") {
    auto offset = [](const std::string& s) {
      try {
        WeightExpr::parse(s);
      } catch (const SyntaxError& e) {
        return static_cast<long>(e.offset());
      }
      return -1L;
    };
    CHECK(offset("log(") == 4);
    CHECK(offset("") == 0);
    CHECK(offset("x1 +") == 4);
    CHECK(offset("2 3") == 2);
    CHECK(offset("foo(1)") == 0);
    CHECK(offset("x4") == 0);
    CHECK(offset("(1") == 2);
    CHECK(offset("x1^x2") == 3);
  }

  TEST_CASE("configs from TOML and overrides") {
    auto c = ExperimentConfig::from_toml(
        "[kernel]\nd = 2\nalpha = 2\n[domain]\nkind = \"interval\"\na = 0\nb = 1\n"
        "[weight]\nexpr = \"x1^2\"\n[run]\nT = [1, 0.1]\n");
    CHECK(c.domain_given);
    CHECK(c.run_list("T", {}) == std::vector<double>{1.0, 0.1});
    c.apply_override("solver.grid_h=0.01");
    c.apply_override("run.label=plain");
    CHECK(c.solver_h() == 0.01);
    CHECK(c.run_string("label", "") == "plain");
    CHECK(c.domain_grid()->size() == 100);
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(ExperimentConfig::from_toml("[nonsense]\nx = 1\n"), InvalidInput);
    CHECK_THROWS_AS(ExperimentConfig::from_toml("[kernel\n"), InvalidInput);
    CHECK_THROWS_AS(c.apply_override("novalue"), InvalidInput);
    c.apply_override("weight.expr=\"log(\"");
    CHECK_THROWS_AS(c.validate(), SyntaxError);
    auto d = ExperimentConfig::defaults();
    d.apply_override("weight.csv=/nonexistent/w.csv");
    CHECK_THROWS_AS(d.validate(), InvalidInput);
  }

  TEST_CASE("manifests") {
    CHECK(make_manifest({}, 7)["files"].empty());
    CHECK(make_manifest({}, 7)["seed"] == 7);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto dir = scratch_dir("manifest");
    const auto m = write_outputs({{"b.csv", "2\n"}, {"a.csv", "1\n"}}, dir.string(), 3);
    CHECK(m["files"][0]["name"] == "a.csv");
    CHECK(read_json(dir / "manifest.json") == m);
    for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() != ".tmp");
    CHECK_THROWS_AS(write_outputs({}, "/proc/potlab_forbidden", 1), IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("equilibrium command on the interval") {
    const auto dir = scratch_dir("eq");
    auto c = ExperimentConfig::defaults();
    c.apply_override("solver.grid_h=0.01");
    c.tree["output"]["dir"] = dir.string();
    std::ostringstream err;
    REQUIRE(run("equilibrium", c, err) == 0);
    const auto rep = read_json(dir / "report.json");
    CHECK(rep["results"]["energy"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(0.01));
    CHECK(rep["config"]["domain"]["kind"] == "interval");
    CHECK(fs::exists(dir / "eq.csv"));
    // the emitted measure re-ingests value for value
    const auto S = c.domain_grid();
    const auto mu = read_measure_csv((dir / "eq.csv").string(), S);
    CHECK(mu.total_mass() == doctest::Approx(1.0));
    fs::remove_all(dir);
  }

  TEST_CASE("reruns reproduce manifest hashes, also from the echoed config") {
    const auto d1 = scratch_dir("rerun1"), d2 = scratch_dir("rerun2"), d3 = scratch_dir("rerun3");
    const std::vector<std::string> base = {"gas-mc", "-s", "solver.grid_h=0.1", "-s", "run.sweeps=300", "--seed", "5"};
    auto with = [&](const fs::path& d) {
      auto a = base;
      a.push_back("-o");
      a.push_back(d.string());
      return a;
    };
    REQUIRE(cli(with(d1)) == 0);
    REQUIRE(cli(with(d2)) == 0);
    CHECK(read_json(d1 / "manifest.json") == read_json(d2 / "manifest.json"));
    REQUIRE(cli({"gas-mc", "-c", (d1 / "report.json").string(), "-o", d3.string()}) == 0);
    CHECK(read_json(d1 / "manifest.json") == read_json(d3 / "manifest.json"));
    for (const auto& d : {d1, d2, d3}) fs::remove_all(d);
  }

  TEST_CASE("counterexample with a separable interaction") {
    const auto dir = scratch_dir("cv");
    REQUIRE(cli({"demo-counterexample-v", "-s", "solver.grid_h=0.01", "-o", dir.string()}) == 0);
    const auto r = read_json(dir / "report.json")["results"];
    CHECK(r["F_N"].get<double>() == 0.0);
    CHECK(r["inf_energy"].get<double>() == -1.0);
    CHECK(r["verdict"] == "gap");
    fs::remove_all(dir);
  }

  TEST_CASE("exit codes") {
    const auto dir = scratch_dir("codes");
    CHECK(cli({"equilibrium", "--no-such-flag", "-o", dir.string()}) == 2);
    CHECK_FALSE(fs::exists(dir));
    CHECK(cli({"no-such-command"}) == 2);
    CHECK(cli({"equilibrium", "-c", "/nonexistent.toml", "-o", dir.string()}) == 2);
    CHECK(cli({"equilibrium", "-s", "kernel.d=1", "-o", dir.string()}) == 2);
    CHECK(cli({"equilibrium", "-s", "weight.expr=log(", "-o", dir.string()}) == 2);
    CHECK(cli({"equilibrium", "-o", "/proc/potlab_forbidden"}) == 2);
    CHECK_FALSE(fs::exists(dir));
    // a solver that may not iterate fails with the solver code and writes nothing
    CHECK(cli({"equilibrium", "-s", "solver.max_iter=1", "-s", "solver.tol=1e-300", "-o", dir.string()}) == 3);
    CHECK_FALSE(fs::exists(dir));
  }
}
