#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <sys/wait.h>

#include "nfsec/experiment_config.hpp"
#include "nfsec/experiments.hpp"

using namespace nfsec;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return "";
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nfsec_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast scenario for end-to-end runs.
const char* kSmallConfig = R"({
  "preset": "desk",
  "search": {"n_points": 8, "golden_steps": 3},
  "montecarlo": {"validation_samples": 500, "music_trials": 5},
  "sweep": {"power_dbm": [30.0], "methods": ["joint", "zf", "mrt", "separate"]},
  "heatmap": {"spacing_m": 1.0}
})";

}  // namespace

TEST_CASE("empty config gives the default profile", "[experiment_cli]") {
  CHECK(parse_config("") == ExperimentConfig{});
  CHECK(parse_config("{}") == ExperimentConfig{});
  const ExperimentConfig d = parse_config("{}", "desk");
  CHECK(d == desk_preset());
  CHECK(parse_config(R"({"preset": "desk"})") == desk_preset());
  const ExperimentConfig c = ExperimentConfig{};
  CHECK(c.scenario.n_antennas == 64);
  CHECK(c.scenario.wavelength_m == 0.017);
  CHECK(c.scenario.energy_receivers.size() == 3);
}

TEST_CASE("overrides keep the remaining defaults", "[experiment_cli]") {
  const ExperimentConfig c = parse_config(R"({"scenario": {"n_antennas": 16, "cu": {"x": 1.0, "y": 9.0}}})");
  CHECK(c.scenario.n_antennas == 16);
  CHECK(c.scenario.cu.x == 1.0);
  CHECK(c.scenario.cu.y == 9.0);
  ExperimentConfig expected;
  expected.scenario.n_antennas = 16;
  expected.scenario.cu = {1.0, 9.0};
  CHECK(c == expected);
  const Scenario sc = build_scenario(c.scenario);
  CHECK(sc.geometry.size() == 16);
  CHECK(sc.power_budget == Catch::Approx(1.0));
  CHECK(sc.cu_noise == Catch::Approx(1e-8));
  CHECK(sc.eh_threshold == Catch::Approx(1e-7));
}

TEST_CASE("malformed configs name the field", "[experiment_cli]") {
  CHECK_THAT(error_of(R"({"scenario": {"n_antennas": "many"}})"),
             Catch::Matchers::ContainsSubstring("scenario.n_antennas"));
  CHECK_THAT(error_of(R"({"scenario": {"power_dbm": [1]}})"),
             Catch::Matchers::ContainsSubstring("scenario.power_dbm"));
  CHECK_THAT(error_of(R"({"scenario": {"wavelenght_m": 0.1}})"),
             Catch::Matchers::ContainsSubstring("scenario.wavelenght_m"));
  CHECK_THAT(error_of(R"({"scenario": {"n_antennas": -4}})"),
             Catch::Matchers::ContainsSubstring("n_antennas"));
  CHECK_THAT(error_of(R"({"scenario": {"energy_receivers": [{"x": 1}]}})"),
             Catch::Matchers::ContainsSubstring("energy_receivers"));
  CHECK_THAT(error_of(R"({"preset": "lab"})"), Catch::Matchers::ContainsSubstring("preset"));
  CHECK_FALSE(error_of("{not json").empty());
}

TEST_CASE("config write and read round trip", "[experiment_cli]") {
  ExperimentConfig c = desk_preset();
  c.scenario.echo_noise_dbm = -40.0;
  c.scenario.rcs_real = 1e-3;
  c.scenario.rcs_imag = -2e-4;
  c.sweep.methods = {"joint", "mrt"};
  c.montecarlo.seed = 99;
  const fs::path dir = scratch_dir("roundtrip");
  {
    std::ofstream out(dir / "c.json");
    out << dump_config(c);
  }
  CHECK(load_config((dir / "c.json").string()) == c);
  CHECK(parse_config(dump_config(c)) == c);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), Error);
}

TEST_CASE("heatmaps are normalized", "[experiment_cli]") {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const Scenario sc = build_scenario(c.scenario);
  Rng rng = make_rng(1);
  const int n = sc.geometry.size();
  CMat a = CMat::Zero(n, 2);
  for (int i = 0; i < n; ++i) a(i, 0) = complex_normal(rng), a(i, 1) = complex_normal(rng);
  const CovariancePair cov{a.col(0) * a.col(0).adjoint(), a.col(1) * a.col(1).adjoint()};
  const Heatmap h = heatmap(sc.geometry, cov, c.heatmap);
  REQUIRE(h.rows.size() == static_cast<size_t>(h.nx) * h.ny);
  double mi = 0.0, ma = 0.0;
  for (const auto& r : h.rows) {
    CHECK(r.info >= 0.0);
    CHECK(r.an >= 0.0);
    mi = std::max(mi, r.info);
    ma = std::max(ma, r.an);
  }
  CHECK(mi == Catch::Approx(1.0));
  CHECK(ma == Catch::Approx(1.0));
  CHECK(h.at(0, 0).x == c.heatmap.x_min);
  CHECK(h.at(h.nx - 1, 0).x == Catch::Approx(c.heatmap.x_max));
}

TEST_CASE("sweep rows cover every method", "[experiment_cli]") {
  const ExperimentConfig c = parse_config(kSmallConfig);
  const auto rows = rate_sweep(c, SweepAxis::power, sweep_values(c, SweepAxis::power));
  REQUIRE(rows.size() == 4);
  std::set<std::string> names;
  for (const auto& r : rows) {
    names.insert(to_string(r.method));
    CHECK(r.value == 30.0);
    if (r.feasible) {
      CHECK(r.secrecy_rate >= 0.0);
      CHECK(r.power_used <= 1.0 * (1.0 + 1e-6));
    } else {
      CHECK(r.secrecy_rate == 0.0);
    }
  }
  CHECK(names == std::set<std::string>{"joint", "zf", "mrt", "separate"});
}

TEST_CASE("CLI solve writes a passing report", "[experiment_cli]") {
  const fs::path dir = scratch_dir("cli");
  {
    std::ofstream out(dir / "small.json");
    out << kSmallConfig;
  }
  const std::string cli = NFSEC_CLI_PATH;
  const std::string cmd = "\"" + cli + "\" --config \"" + (dir / "small.json").string() + "\" --out \"" +
                          dir.string() + "\" solve --method joint > \"" + (dir / "log.txt").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  INFO(read_file(dir / "log.txt"));
  CHECK(rc == 0);
  REQUIRE(fs::exists(dir / "solve_report.json"));
  REQUIRE(fs::exists(dir / "solve_result.json"));
  const auto rep = nlohmann::json::parse(read_file(dir / "solve_report.json"));
  CHECK(rep.at("subcommand") == "solve");
  CHECK(rep.at("passed").get<bool>());
  CHECK(rep.at("validation").at("samples_per_profile") == 500);
  CHECK(rep.at("result").at("secrecy_rate").get<double>() > 0.0);
  ExperimentConfig used = parse_config(kSmallConfig);
  used.output_dir = dir.string();
  CHECK(parse_config(rep.at("config").dump()) == used);

  const std::string bad = "\"" + cli + "\" --config \"" + (dir / "nope.json").string() + "\" solve > /dev/null 2>&1";
  const int rc_bad = std::system(bad.c_str());
  CHECK(WIFEXITED(rc_bad));
  CHECK(WEXITSTATUS(rc_bad) == 1);
}
