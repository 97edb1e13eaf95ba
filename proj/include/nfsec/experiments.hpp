#pragma once

// Experiment drivers shared by the CLI and the acceptance run: bound
// validation tables, rate sweeps, heatmaps and the sampled design check.

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "nfsec/experiment_config.hpp"
#include "nfsec/localization.hpp"
#include "nfsec/uncertainty_bounds.hpp"

namespace nfsec {

using Progress = std::function<void(const std::string&)>;

// ---------------------------------------------------------------------------
// Error-bound tightness.

struct BoundRow {
  double range = 0.0;
  double epsilon = 0.0;
  double phi = 0.0;
  double empirical_max = 0.0;
  double approx_max = 0.0;
  double reference_norm = 0.0;
  double relative_gap = 0.0;  // (φ − empirical) / empirical
};

/// Points on the broadside ray (0, r) of the configured array.
inline std::vector<BoundRow> bound_validation(const ExperimentConfig& c) {
  const ArrayGeometry geom = build_geometry(c.scenario);
  std::vector<BoundRow> rows;
  for (double r : c.bound.ranges_m)
    for (double eps : c.bound.epsilons_m) {
      const auto rep = error_bound_report(geom, {0.0, r}, eps, 0.0, c.montecarlo.bound_samples, c.montecarlo.seed);
      BoundRow row;
      row.range = r;
      row.epsilon = eps;
      row.phi = rep.phi_k;
      row.empirical_max = rep.empirical_max;
      row.approx_max = rep.approx_max;
      row.reference_norm = rep.reference_norm;
      row.relative_gap = (rep.phi_k - rep.empirical_max) / rep.empirical_max;
      rows.push_back(row);
    }
  return rows;
}

// ---------------------------------------------------------------------------
// Rate sweeps.

enum class SweepAxis { power, eh_threshold, crb_range };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::power: return "power_dbm";
    case SweepAxis::eh_threshold: return "eh_threshold_uw";
    case SweepAxis::crb_range: return "crb_range";
  }
  return "?";
}

struct SweepRow {
  SweepAxis axis = SweepAxis::power;
  double value = 0.0;
  Method method = Method::joint;
  bool feasible = false;
  double secrecy_rate = 0.0;  // 0 when infeasible
  double gamma_r = std::numeric_limits<double>::quiet_NaN();
  double cu_sinr = std::numeric_limits<double>::quiet_NaN();
  double power_used = std::numeric_limits<double>::quiet_NaN();
  std::string status;
};

inline void apply_axis(ScenarioConfig& s, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::power: s.power_dbm = v; break;
    case SweepAxis::eh_threshold: s.eh_threshold_uw = v; break;
    case SweepAxis::crb_range: s.crb_range = v; break;
  }
}

/// Infeasible points are rows with feasible = false and rate 0; any other
/// failure propagates.
inline SweepRow run_point(const Scenario& sc, Method m, const SearchOptions& opt) {
  SweepRow row;
  row.method = m;
  try {
    const BeamformerResult r = one_d_search(sc, m, opt);
    row.feasible = true;
    row.secrecy_rate = r.secrecy_rate;
    row.gamma_r = r.gamma_r;
    row.cu_sinr = r.cu_sinr;
    row.power_used = r.covariances.trace_power();
    row.status = "ok";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::all_infeasible && e.code() != ErrorCode::infeasible) throw;
    row.status = to_string(e.code());
  }
  return row;
}

inline std::vector<SweepRow> rate_sweep(const ExperimentConfig& c, SweepAxis axis, const std::vector<double>& values,
                                        const Progress& progress = {}) {
  std::vector<SweepRow> rows;
  const SearchOptions opt = build_search(c.search);
  for (double v : values) {
    ScenarioConfig s = c.scenario;
    apply_axis(s, axis, v);
    const Scenario sc = build_scenario(s);
    for (const auto& name : c.sweep.methods) {
      SweepRow row = run_point(sc, method_from_string(name), opt);
      row.axis = axis;
      row.value = v;
      if (progress)
        progress(std::string(to_string(axis)) + "=" + std::to_string(v) + " " + name + " rate " +
                 std::to_string(row.secrecy_rate) + " (" + row.status + ")");
      rows.push_back(row);
    }
  }
  return rows;
}

inline std::vector<double> sweep_values(const ExperimentConfig& c, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::power: return c.sweep.power_dbm;
    case SweepAxis::eh_threshold: return c.sweep.eh_threshold_uw;
    case SweepAxis::crb_range: return c.sweep.crb_range;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Beampattern heatmaps with the pure steering probe v(l).

struct HeatmapRow {
  double x = 0.0;
  double y = 0.0;
  double info = 0.0;  // vᴴR₀v / max
  double an = 0.0;    // vᴴR₁v / max
};

struct Heatmap {
  int nx = 0;
  int ny = 0;
  std::vector<HeatmapRow> rows;  // x-major
  const HeatmapRow& at(int ix, int iy) const { return rows[static_cast<size_t>(ix) * ny + iy]; }
};

inline Heatmap heatmap(const ArrayGeometry& geom, const CovariancePair& cov, const HeatmapConfig& h) {
  Heatmap out;
  out.nx = static_cast<int>(std::floor((h.x_max - h.x_min) / h.spacing_m + 1e-9)) + 1;
  out.ny = static_cast<int>(std::floor((h.y_max - h.y_min) / h.spacing_m + 1e-9)) + 1;
  double mi = 0.0, ma = 0.0;
  for (int ix = 0; ix < out.nx; ++ix)
    for (int iy = 0; iy < out.ny; ++iy) {
      HeatmapRow r;
      r.x = h.x_min + ix * h.spacing_m;
      r.y = h.y_min + iy * h.spacing_m;
      const CVec v = steering_vector(geom, CartesianPoint{r.x, r.y});
      r.info = quad_form(cov.r0, v);
      r.an = quad_form(cov.r1, v);
      mi = std::max(mi, r.info);
      ma = std::max(ma, r.an);
      out.rows.push_back(r);
    }
  for (auto& r : out.rows) {
    r.info = mi > 0.0 ? r.info / mi : 0.0;
    r.an = ma > 0.0 ? r.an / ma : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampled check of a design against the uncertainty balls.

struct ProfileCheck {
  int index = 0;
  bool energy_receiver = true;
  double radius = 0.0;
  double max_sampled_sinr = 0.0;
  double min_sampled_harvest = std::numeric_limits<double>::quiet_NaN();
  double max_model_sinr = 0.0;  // draws from the location/NLoS model itself
};

struct ValidationReport {
  double gamma_r = 0.0;
  double eh_threshold = 0.0;
  double crb_theta_threshold = 0.0;
  double crb_range_threshold = 0.0;
  std::vector<ProfileCheck> profiles;
  double max_crb_theta = 0.0;
  double max_crb_range = 0.0;
  double rank_ratio = 0.0;  // λ₂/λ₁ of R₀
  double power_used = 0.0;
  double power_budget = 0.0;
  int samples = 0;
  bool sinr_ok = true;
  bool eh_ok = true;
  bool crb_ok = true;
  bool power_ok = true;
  bool passed() const { return sinr_ok && eh_ok && crb_ok && power_ok; }
};

/// Half of the draws lie uniformly in the ball, half on its boundary sphere.
inline ValidationReport validate_design(const Scenario& sc, const BeamformerResult& res, int n_samples,
                                        std::uint64_t seed, double rel_tol = 1e-6) {
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  ValidationReport rep;
  rep.gamma_r = res.gamma_r;
  rep.eh_threshold = sc.eh_threshold;
  rep.crb_theta_threshold = sc.crb_theta_threshold;
  rep.crb_range_threshold = sc.crb_range_threshold;
  rep.samples = n_samples;
  const auto radii = sc.error_radii();
  const int n = sc.geometry.size();
  for (size_t k = 0; k < sc.eavesdroppers.size(); ++k) {
    const auto& e = sc.eavesdroppers[k];
    ProfileCheck pc;
    pc.index = e.index;
    pc.energy_receiver = e.is_energy_receiver;
    pc.radius = radii[k];
    const CVec center = los_channel(sc.geometry, e.estimated_location);
    Rng rng = make_rng(seed, 0xBA11u + static_cast<std::uint64_t>(e.index));
    double hmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
      const CVec dg = i % 2 == 0 ? random_in_ball(rng, n, radii[k]) : CVec(random_unit_vector(rng, n) * radii[k]);
      const CVec g = center + dg;
      pc.max_sampled_sinr = std::max(pc.max_sampled_sinr, eav_sinr(res.covariances, g, e.noise_power));
      if (e.is_energy_receiver) hmin = std::min(hmin, harvested_power(res.covariances, g, sc.eh_efficiency));
      const auto model = sample_channel(e, sc.geometry, mix_seed(seed, 0x40DEu + e.index), static_cast<std::uint64_t>(i));
      pc.max_model_sinr = std::max(pc.max_model_sinr, eav_sinr(res.covariances, model, e.noise_power));
    }
    if (e.is_energy_receiver) pc.min_sampled_harvest = hmin;
    rep.sinr_ok = rep.sinr_ok && pc.max_sampled_sinr <= res.gamma_r * (1.0 + rel_tol);
    if (e.is_energy_receiver && sc.eh_threshold > 0.0)
      rep.eh_ok = rep.eh_ok && hmin >= sc.eh_threshold * (1.0 - rel_tol);
    rep.profiles.push_back(pc);
  }
  for (double v : res.certificate.crb_theta) rep.max_crb_theta = std::max(rep.max_crb_theta, v);
  for (double v : res.certificate.crb_range) rep.max_crb_range = std::max(rep.max_crb_range, v);
  rep.crb_ok = rep.max_crb_theta <= sc.crb_theta_threshold * (1.0 + rel_tol) &&
               rep.max_crb_range <= sc.crb_range_threshold * (1.0 + rel_tol);
  const Vec ev = hermitian_eigenvalues(res.covariances.r0);
  rep.rank_ratio = ev(n - 1) > 0.0 ? std::max(ev(n - 2), 0.0) / ev(n - 1) : 0.0;
  rep.power_used = res.covariances.trace_power();
  rep.power_budget = sc.power_budget;
  rep.power_ok = rep.power_used <= sc.power_budget * (1.0 + rel_tol);
  return rep;
}

inline nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json prof = nlohmann::json::array();
  for (const auto& p : r.profiles) {
    nlohmann::json j = {{"index", p.index},
                        {"energy_receiver", p.energy_receiver},
                        {"radius", p.radius},
                        {"max_sampled_sinr", p.max_sampled_sinr},
                        {"max_model_sinr", p.max_model_sinr}};
    j["min_sampled_harvest"] = p.energy_receiver ? nlohmann::json(p.min_sampled_harvest) : nlohmann::json(nullptr);
    prof.push_back(std::move(j));
  }
  return {{"gamma_r", r.gamma_r},
          {"eh_threshold_w", r.eh_threshold},
          {"crb_theta_threshold", r.crb_theta_threshold},
          {"crb_range_threshold", r.crb_range_threshold},
          {"samples_per_profile", r.samples},
          {"profiles", prof},
          {"max_crb_theta", r.max_crb_theta},
          {"max_crb_range", r.max_crb_range},
          {"rank_ratio_r0", r.rank_ratio},
          {"power_used_w", r.power_used},
          {"power_budget_w", r.power_budget},
          {"sinr_ok", r.sinr_ok},
          {"eh_ok", r.eh_ok},
          {"crb_ok", r.crb_ok},
          {"power_ok", r.power_ok},
          {"passed", r.passed()}};
}

/// Eigendecomposition summary used in result records.
inline nlohmann::json eigen_json(const CMat& r, int keep = 3) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(r));
  nlohmann::json vals = nlohmann::json::array(), vecs = nlohmann::json::array();
  const Index n = r.rows();
  for (Index i = n - 1; i >= 0 && i >= n - keep; --i) {
    vals.push_back(es.eigenvalues()(i));
    nlohmann::json v = nlohmann::json::array();
    for (Index k = 0; k < n; ++k) v.push_back({es.eigenvectors()(k, i).real(), es.eigenvectors()(k, i).imag()});
    vecs.push_back(std::move(v));
  }
  return {{"eigenvalues", vals}, {"eigenvectors_re_im", vecs}, {"trace", r.trace().real()}};
}

inline nlohmann::json result_json(const BeamformerResult& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& p : r.trace)
    trace.push_back({{"gamma_r", p.gamma_r},
                     {"rate", std::isfinite(p.rate) ? nlohmann::json(p.rate) : nlohmann::json(nullptr)},
                     {"status", p.status}});
  nlohmann::json j = {{"method", to_string(r.method)},
                      {"secrecy_rate", r.secrecy_rate},
                      {"gamma_r", r.gamma_r},
                      {"enforced_gamma", r.enforced_gamma},
                      {"cu_sinr", r.cu_sinr},
                      {"r0", eigen_json(r.covariances.r0)},
                      {"r1", eigen_json(r.covariances.r1)},
                      {"trace", trace}};
  if (std::isfinite(r.stage1_power)) j["stage1_power_w"] = r.stage1_power;
  return j;
}

}  // namespace nfsec
