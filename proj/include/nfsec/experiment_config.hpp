#pragma once

// Experiment configuration. Powers are stored in config units (dBm, µW) so a
// written config reads back bit-identical; conversion to watts happens only in
// build_scenario().

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nfsec/robust_beamformer.hpp"

namespace nfsec {

struct PointConfig {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const PointConfig&) const = default;
};

struct ScenarioConfig {
  int n_antennas = 64;
  double wavelength_m = 0.017;
  double spacing_m = 0.0085;
  PointConfig cu{0.0, 10.0};
  std::vector<PointConfig> energy_receivers{{0.0, 15.0}, {-5.0, 10.0}, {5.0, 10.0}};
  double er_location_error_m = 0.1;
  double nlos_fraction = 0.05;  // δ_k as a fraction of ‖LoS‖
  double noise_dbm = -50.0;     // CU, ER and echo noise unless overridden
  std::optional<double> echo_noise_dbm;
  double power_dbm = 30.0;
  double eh_threshold_uw = 0.1;
  double eh_efficiency = 1.0;
  double crb_theta = 0.1;
  double crb_range = 0.1;
  // target
  PointConfig target{0.0, 5.0};
  double target_location_error_m = 0.02;
  double target_angle_halfwidth_rad = 0.004;
  double target_range_halfwidth_m = 0.02;
  int target_grid_size = 9;
  int block_length = 64;
  std::optional<double> rcs_real;  // default λ / ((4π)^{3/2} r_s²)
  std::optional<double> rcs_imag;
  bool operator==(const ScenarioConfig&) const = default;
};

struct SearchConfig {
  double gamma_min = 1e-4;
  double gamma_max = 0.0;  // 0: MRT SINR
  int n_points = 24;
  int golden_steps = 6;
  double tol = 1e-8;
  bool operator==(const SearchConfig&) const = default;
};

struct MonteCarloConfig {
  int bound_samples = 10000;
  int validation_samples = 10000;
  int music_trials = 200;
  std::uint64_t seed = 1;
  bool operator==(const MonteCarloConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> power_dbm{20.0, 25.0, 30.0, 35.0};
  std::vector<double> eh_threshold_uw{0.01, 0.1, 0.3, 1.0};
  std::vector<double> crb_range{0.001, 0.01, 0.1, 1.0};
  std::vector<double> music_crb_range{0.1, 0.01, 0.001};
  std::vector<std::string> methods{"joint", "zf", "mrt", "separate"};
  bool operator==(const SweepConfig&) const = default;
};

struct BoundConfig {
  std::vector<double> ranges_m{10.0, 15.0};
  std::vector<double> epsilons_m{0.02, 0.05, 0.1};
  bool operator==(const BoundConfig&) const = default;
};

struct HeatmapConfig {
  double spacing_m = 0.25;
  double x_min = -10.0;
  double x_max = 10.0;
  double y_min = 0.25;
  double y_max = 20.0;
  bool operator==(const HeatmapConfig&) const = default;
};

struct ExperimentConfig {
  std::string preset = "paper";
  ScenarioConfig scenario;
  SearchConfig search;
  MonteCarloConfig montecarlo;
  SweepConfig sweep;
  BoundConfig bound;
  HeatmapConfig heatmap;
  std::string output_dir = "out";
  bool operator==(const ExperimentConfig&) const = default;
};

/// Desk-scale profile: 16 elements at λ ≈ 0.3 m so the array stays radiating
/// near field over a few meters; noise and Q scaled with the array gain.
inline ExperimentConfig desk_preset() {
  ExperimentConfig c;
  c.preset = "desk";
  auto& s = c.scenario;
  s.n_antennas = 16;
  s.wavelength_m = 0.2998;
  s.spacing_m = 0.1499;
  s.energy_receivers = {{-5.0, 10.0}, {5.0, 10.0}};
  s.noise_dbm = -31.1;
  s.eh_threshold_uw = 0.1;
  s.crb_range = 0.3;  // loose enough to stay feasible at 20 dBm
  c.search.n_points = 16;
  c.montecarlo.bound_samples = 2000;
  c.montecarlo.validation_samples = 10000;
  c.sweep.power_dbm = {20.0, 25.0, 30.0, 35.0};
  c.sweep.eh_threshold_uw = {0.01, 0.1, 0.3, 1.0};
  c.sweep.crb_range = {0.015, 0.02, 0.03, 0.05};  // range CRB binds below ~0.03 at 30 dBm
  c.sweep.music_crb_range = {0.025, 0.02, 0.015};
  return c;
}

inline ExperimentConfig preset_config(const std::string& name) {
  if (name == "paper") return ExperimentConfig{};
  if (name == "desk") return desk_preset();
  throw Error(ErrorCode::config, "preset: unknown value '" + name + "' (expected paper or desk)");
}

namespace detail {

using json = nlohmann::json;

// Reads j[key] into out if present, with a field-path error on type mismatch.
template <class T>
void read_field(const json& j, const std::string& key, const std::string& path, T& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::config, path + key + ": wrong type (got " + std::string(it->type_name()) + ")");
  }
}

template <class T>
void read_optional(const json& j, const std::string& key, const std::string& path, std::optional<T>& out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  if (it->is_null()) {
    out.reset();
    return;
  }
  T v{};
  read_field(j, key, path, v);
  out = v;
}

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw Error(ErrorCode::config, (path.empty() ? "config" : path.substr(0, path.size() - 1)) + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw Error(ErrorCode::config, path + it.key() + ": unknown field");
}

// `where` is the dotted path of the point itself, e.g. "scenario.cu".
inline void read_point_value(const json& v, const std::string& where, PointConfig& p) {
  const std::string sub = where + ".";
  reject_unknown(v, sub, {"x", "y"});
  read_field(v, "x", sub, p.x);
  read_field(v, "y", sub, p.y);
}

inline void read_point(const json& j, const std::string& key, const std::string& path, PointConfig& p) {
  if (auto it = j.find(key); it != j.end()) read_point_value(*it, path + key, p);
}

inline json point_json(const PointConfig& p) { return {{"x", p.x}, {"y", p.y}}; }

inline void positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::config, name + ": must be a positive finite number");
}
inline void finite(double v, const std::string& name) {
  if (!std::isfinite(v)) throw Error(ErrorCode::config, name + ": must be finite");
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  using detail::finite;
  using detail::positive;
  const auto& s = c.scenario;
  if (s.n_antennas < 2) throw Error(ErrorCode::config, "scenario.n_antennas: must be >= 2");
  positive(s.wavelength_m, "scenario.wavelength_m");
  positive(s.spacing_m, "scenario.spacing_m");
  finite(s.cu.x, "scenario.cu.x");
  positive(s.cu.y, "scenario.cu.y");
  for (size_t k = 0; k < s.energy_receivers.size(); ++k) {
    finite(s.energy_receivers[k].x, "scenario.energy_receivers[" + std::to_string(k) + "].x");
    positive(s.energy_receivers[k].y, "scenario.energy_receivers[" + std::to_string(k) + "].y");
  }
  if (!(s.er_location_error_m >= 0.0)) throw Error(ErrorCode::config, "scenario.er_location_error_m: must be >= 0");
  if (!(s.nlos_fraction >= 0.0)) throw Error(ErrorCode::config, "scenario.nlos_fraction: must be >= 0");
  finite(s.noise_dbm, "scenario.noise_dbm");
  if (s.echo_noise_dbm) finite(*s.echo_noise_dbm, "scenario.echo_noise_dbm");
  finite(s.power_dbm, "scenario.power_dbm");
  if (!(s.eh_threshold_uw >= 0.0)) throw Error(ErrorCode::config, "scenario.eh_threshold_uw: must be >= 0");
  if (!(s.eh_efficiency > 0.0 && s.eh_efficiency <= 1.0))
    throw Error(ErrorCode::config, "scenario.eh_efficiency: must lie in (0, 1]");
  positive(s.crb_theta, "scenario.crb_theta");
  positive(s.crb_range, "scenario.crb_range");
  finite(s.target.x, "scenario.target.x");
  positive(s.target.y, "scenario.target.y");
  if (!(s.target_location_error_m >= 0.0))
    throw Error(ErrorCode::config, "scenario.target_location_error_m: must be >= 0");
  if (!(s.target_angle_halfwidth_rad >= 0.0))
    throw Error(ErrorCode::config, "scenario.target_angle_halfwidth_rad: must be >= 0");
  if (!(s.target_range_halfwidth_m >= 0.0))
    throw Error(ErrorCode::config, "scenario.target_range_halfwidth_m: must be >= 0");
  if (s.target_grid_size < 1) throw Error(ErrorCode::config, "scenario.target_grid_size: must be >= 1");
  if (s.block_length < 1) throw Error(ErrorCode::config, "scenario.block_length: must be >= 1");
  if (s.rcs_real.has_value() != s.rcs_imag.has_value())
    throw Error(ErrorCode::config, "scenario.rcs_real: rcs_real and rcs_imag must be given together");
  positive(c.search.gamma_min, "search.gamma_min");
  if (!(c.search.gamma_max >= 0.0)) throw Error(ErrorCode::config, "search.gamma_max: must be >= 0");
  if (c.search.n_points < 2) throw Error(ErrorCode::config, "search.n_points: must be >= 2");
  if (c.search.golden_steps < 0) throw Error(ErrorCode::config, "search.golden_steps: must be >= 0");
  positive(c.search.tol, "search.tol");
  if (c.montecarlo.bound_samples < 1) throw Error(ErrorCode::config, "montecarlo.bound_samples: must be >= 1");
  if (c.montecarlo.validation_samples < 1)
    throw Error(ErrorCode::config, "montecarlo.validation_samples: must be >= 1");
  if (c.montecarlo.music_trials < 1) throw Error(ErrorCode::config, "montecarlo.music_trials: must be >= 1");
  for (double v : c.sweep.eh_threshold_uw)
    if (!(v >= 0.0)) throw Error(ErrorCode::config, "sweep.eh_threshold_uw: values must be >= 0");
  for (double v : c.sweep.crb_range) positive(v, "sweep.crb_range");
  for (double v : c.sweep.music_crb_range) positive(v, "sweep.music_crb_range");
  for (const auto& m : c.sweep.methods) {
    try {
      method_from_string(m);
    } catch (const Error&) {
      throw Error(ErrorCode::config, "sweep.methods: unknown method '" + m + "'");
    }
  }
  for (double v : c.bound.ranges_m) positive(v, "bound.ranges_m");
  for (double v : c.bound.epsilons_m) positive(v, "bound.epsilons_m");
  positive(c.heatmap.spacing_m, "heatmap.spacing_m");
  if (!(c.heatmap.x_max >= c.heatmap.x_min)) throw Error(ErrorCode::config, "heatmap.x_max: must be >= x_min");
  if (!(c.heatmap.y_max >= c.heatmap.y_min)) throw Error(ErrorCode::config, "heatmap.y_max: must be >= y_min");
  positive(c.heatmap.y_min, "heatmap.y_min");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using detail::json;
  using detail::point_json;
  const auto& s = c.scenario;
  json ers = json::array();
  for (const auto& p : s.energy_receivers) ers.push_back(point_json(p));
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json sc = {{"n_antennas", s.n_antennas},
             {"wavelength_m", s.wavelength_m},
             {"spacing_m", s.spacing_m},
             {"cu", point_json(s.cu)},
             {"energy_receivers", ers},
             {"er_location_error_m", s.er_location_error_m},
             {"nlos_fraction", s.nlos_fraction},
             {"noise_dbm", s.noise_dbm},
             {"echo_noise_dbm", opt(s.echo_noise_dbm)},
             {"power_dbm", s.power_dbm},
             {"eh_threshold_uw", s.eh_threshold_uw},
             {"eh_efficiency", s.eh_efficiency},
             {"crb_theta", s.crb_theta},
             {"crb_range", s.crb_range},
             {"target", point_json(s.target)},
             {"target_location_error_m", s.target_location_error_m},
             {"target_angle_halfwidth_rad", s.target_angle_halfwidth_rad},
             {"target_range_halfwidth_m", s.target_range_halfwidth_m},
             {"target_grid_size", s.target_grid_size},
             {"block_length", s.block_length},
             {"rcs_real", opt(s.rcs_real)},
             {"rcs_imag", opt(s.rcs_imag)}};
  return {{"preset", c.preset},
          {"scenario", sc},
          {"search",
           {{"gamma_min", c.search.gamma_min},
            {"gamma_max", c.search.gamma_max},
            {"n_points", c.search.n_points},
            {"golden_steps", c.search.golden_steps},
            {"tol", c.search.tol}}},
          {"montecarlo",
           {{"bound_samples", c.montecarlo.bound_samples},
            {"validation_samples", c.montecarlo.validation_samples},
            {"music_trials", c.montecarlo.music_trials},
            {"seed", c.montecarlo.seed}}},
          {"sweep",
           {{"power_dbm", c.sweep.power_dbm},
            {"eh_threshold_uw", c.sweep.eh_threshold_uw},
            {"crb_range", c.sweep.crb_range},
            {"music_crb_range", c.sweep.music_crb_range},
            {"methods", c.sweep.methods}}},
          {"bound", {{"ranges_m", c.bound.ranges_m}, {"epsilons_m", c.bound.epsilons_m}}},
          {"heatmap",
           {{"spacing_m", c.heatmap.spacing_m},
            {"x_min", c.heatmap.x_min},
            {"x_max", c.heatmap.x_max},
            {"y_min", c.heatmap.y_min},
            {"y_max", c.heatmap.y_max}}},
          {"output", {{"dir", c.output_dir}}}};
}

/// Omitted fields keep the preset's values. `preset_override`, when non-empty,
/// replaces the file's own "preset" key.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& preset_override = "") {
  using detail::read_field;
  using detail::read_optional;
  using detail::reject_unknown;
  reject_unknown(j, "", {"preset", "scenario", "search", "montecarlo", "sweep", "bound", "heatmap", "output"});
  std::string preset = "paper";
  read_field(j, "preset", "", preset);
  if (!preset_override.empty()) preset = preset_override;
  ExperimentConfig c = preset_config(preset);

  if (auto it = j.find("scenario"); it != j.end()) {
    const std::string p = "scenario.";
    reject_unknown(*it, p,
                   {"n_antennas", "wavelength_m", "spacing_m", "cu", "energy_receivers", "er_location_error_m",
                    "nlos_fraction", "noise_dbm", "echo_noise_dbm", "power_dbm", "eh_threshold_uw", "eh_efficiency",
                    "crb_theta", "crb_range", "target", "target_location_error_m", "target_angle_halfwidth_rad",
                    "target_range_halfwidth_m", "target_grid_size", "block_length", "rcs_real", "rcs_imag"});
    auto& s = c.scenario;
    read_field(*it, "n_antennas", p, s.n_antennas);
    read_field(*it, "wavelength_m", p, s.wavelength_m);
    read_field(*it, "spacing_m", p, s.spacing_m);
    detail::read_point(*it, "cu", p, s.cu);
    if (auto e = it->find("energy_receivers"); e != it->end()) {
      if (!e->is_array()) throw Error(ErrorCode::config, p + "energy_receivers: expected an array");
      s.energy_receivers.clear();
      for (size_t k = 0; k < e->size(); ++k) {
        PointConfig pt;
        detail::read_point_value((*e)[k], p + "energy_receivers[" + std::to_string(k) + "]", pt);
        s.energy_receivers.push_back(pt);
      }
    }
    read_field(*it, "er_location_error_m", p, s.er_location_error_m);
    read_field(*it, "nlos_fraction", p, s.nlos_fraction);
    read_field(*it, "noise_dbm", p, s.noise_dbm);
    read_optional(*it, "echo_noise_dbm", p, s.echo_noise_dbm);
    read_field(*it, "power_dbm", p, s.power_dbm);
    read_field(*it, "eh_threshold_uw", p, s.eh_threshold_uw);
    read_field(*it, "eh_efficiency", p, s.eh_efficiency);
    read_field(*it, "crb_theta", p, s.crb_theta);
    read_field(*it, "crb_range", p, s.crb_range);
    detail::read_point(*it, "target", p, s.target);
    read_field(*it, "target_location_error_m", p, s.target_location_error_m);
    read_field(*it, "target_angle_halfwidth_rad", p, s.target_angle_halfwidth_rad);
    read_field(*it, "target_range_halfwidth_m", p, s.target_range_halfwidth_m);
    read_field(*it, "target_grid_size", p, s.target_grid_size);
    read_field(*it, "block_length", p, s.block_length);
    read_optional(*it, "rcs_real", p, s.rcs_real);
    read_optional(*it, "rcs_imag", p, s.rcs_imag);
  }
  if (auto it = j.find("search"); it != j.end()) {
    const std::string p = "search.";
    reject_unknown(*it, p, {"gamma_min", "gamma_max", "n_points", "golden_steps", "tol"});
    read_field(*it, "gamma_min", p, c.search.gamma_min);
    read_field(*it, "gamma_max", p, c.search.gamma_max);
    read_field(*it, "n_points", p, c.search.n_points);
    read_field(*it, "golden_steps", p, c.search.golden_steps);
    read_field(*it, "tol", p, c.search.tol);
  }
  if (auto it = j.find("montecarlo"); it != j.end()) {
    const std::string p = "montecarlo.";
    reject_unknown(*it, p, {"bound_samples", "validation_samples", "music_trials", "seed"});
    read_field(*it, "bound_samples", p, c.montecarlo.bound_samples);
    read_field(*it, "validation_samples", p, c.montecarlo.validation_samples);
    read_field(*it, "music_trials", p, c.montecarlo.music_trials);
    read_field(*it, "seed", p, c.montecarlo.seed);
  }
  if (auto it = j.find("sweep"); it != j.end()) {
    const std::string p = "sweep.";
    reject_unknown(*it, p, {"power_dbm", "eh_threshold_uw", "crb_range", "music_crb_range", "methods"});
    read_field(*it, "power_dbm", p, c.sweep.power_dbm);
    read_field(*it, "eh_threshold_uw", p, c.sweep.eh_threshold_uw);
    read_field(*it, "crb_range", p, c.sweep.crb_range);
    read_field(*it, "music_crb_range", p, c.sweep.music_crb_range);
    read_field(*it, "methods", p, c.sweep.methods);
  }
  if (auto it = j.find("bound"); it != j.end()) {
    const std::string p = "bound.";
    reject_unknown(*it, p, {"ranges_m", "epsilons_m"});
    read_field(*it, "ranges_m", p, c.bound.ranges_m);
    read_field(*it, "epsilons_m", p, c.bound.epsilons_m);
  }
  if (auto it = j.find("heatmap"); it != j.end()) {
    const std::string p = "heatmap.";
    reject_unknown(*it, p, {"spacing_m", "x_min", "x_max", "y_min", "y_max"});
    read_field(*it, "spacing_m", p, c.heatmap.spacing_m);
    read_field(*it, "x_min", p, c.heatmap.x_min);
    read_field(*it, "x_max", p, c.heatmap.x_max);
    read_field(*it, "y_min", p, c.heatmap.y_min);
    read_field(*it, "y_max", p, c.heatmap.y_max);
  }
  if (auto it = j.find("output"); it != j.end()) {
    reject_unknown(*it, "output.", {"dir"});
    read_field(*it, "dir", "output.", c.output_dir);
  }
  validate(c);
  return c;
}

inline ExperimentConfig parse_config(const std::string& text, const std::string& preset_override = "") {
  nlohmann::json j;
  try {
    j = text.find_first_not_of(" \t\r\n") == std::string::npos ? nlohmann::json::object() : nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config, std::string("config: ") + e.what());
  }
  return config_from_json(j, preset_override);
}

inline ExperimentConfig load_config(const std::string& path, const std::string& preset_override = "") {
  std::ifstream f(path);
  require(static_cast<bool>(f), ErrorCode::io, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), preset_override);
}

inline std::string dump_config(const ExperimentConfig& c) { return to_json(c).dump(2); }

// ---------------------------------------------------------------------------
// Config → model objects (unit conversion happens here only).

inline ArrayGeometry build_geometry(const ScenarioConfig& s) {
  return ArrayGeometry(s.n_antennas, s.spacing_m, s.wavelength_m);
}

inline Scenario build_scenario(const ScenarioConfig& s) {
  Scenario sc;
  sc.geometry = build_geometry(s);
  const double noise = dbm_to_watts(s.noise_dbm);
  sc.cu_location = {s.cu.x, s.cu.y};
  sc.cu_channel = los_channel(sc.geometry, sc.cu_location);
  sc.cu_noise = noise;
  int idx = 1;
  for (const auto& p : s.energy_receivers) {
    EavesdropperProfile e;
    e.index = idx++;
    e.estimated_location = {p.x, p.y};
    e.location_error_bound = s.er_location_error_m;
    e.nlos_norm_bound = nlos_bound_from_fraction(sc.geometry, e.estimated_location, s.nlos_fraction);
    e.noise_power = noise;
    sc.eavesdroppers.push_back(e);
  }
  const CartesianPoint tl{s.target.x, s.target.y};
  EavesdropperProfile t;
  t.index = idx;
  t.estimated_location = tl;
  t.location_error_bound = s.target_location_error_m;
  t.nlos_norm_bound = nlos_bound_from_fraction(sc.geometry, tl, s.nlos_fraction);
  t.noise_power = noise;
  t.is_energy_receiver = false;
  sc.eavesdroppers.push_back(t);

  auto& g = sc.target;
  const PolarPoint pol = to_polar(tl);
  g.angle = pol.angle;
  g.range = pol.range;
  g.rcs_coefficient = s.rcs_real ? cplx(*s.rcs_real, *s.rcs_imag)
                                 : cplx(s.wavelength_m / (std::pow(4.0 * kPi, 1.5) * pol.range * pol.range), 0.0);
  g.echo_noise_power = dbm_to_watts(s.echo_noise_dbm.value_or(s.noise_dbm));
  g.block_length = s.block_length;
  g.angle_lower = pol.angle - s.target_angle_halfwidth_rad;
  g.angle_upper = pol.angle + s.target_angle_halfwidth_rad;
  g.range_lower = pol.range - s.target_range_halfwidth_m;
  g.range_upper = pol.range + s.target_range_halfwidth_m;
  g.grid_size = s.target_grid_size;

  sc.power_budget = dbm_to_watts(s.power_dbm);
  sc.eh_threshold = s.eh_threshold_uw * 1e-6;
  sc.eh_efficiency = s.eh_efficiency;
  sc.crb_theta_threshold = s.crb_theta;
  sc.crb_range_threshold = s.crb_range;
  sc.validate();
  return sc;
}

inline SearchOptions build_search(const SearchConfig& s) {
  SearchOptions o;
  o.gamma_min = s.gamma_min;
  o.gamma_max = s.gamma_max;
  o.n_points = s.n_points;
  o.golden_steps = s.golden_steps;
  o.tol = s.tol;
  return o;
}

}  // namespace nfsec
