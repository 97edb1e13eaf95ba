#pragma once

// Echo simulation Y = β v vᵀ X + Z and 2D near-field MUSIC over (θ, r).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "nfsec/robust_beamformer.hpp"

namespace nfsec {

struct EchoBatch {
  CMat snapshots;  // N × T
  double angle = 0.0;
  double range = 0.0;
  cplx beta{0.0, 0.0};
  double noise_power = 0.0;
};

/// X columns ~ CN(0, R) via the eigen-factor of R; noise is white with variance σ².
inline EchoBatch simulate_echo(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r, int t,
                               double noise_power, std::uint64_t seed) {
  require(t >= 1, ErrorCode::invalid_argument, "block length must be >= 1");
  require(noise_power >= 0.0, ErrorCode::invalid_argument, "noise power must be >= 0");
  const int n = geom.size();
  require(r.rows() == n && r.cols() == n, ErrorCode::invalid_argument, "covariance size mismatch");
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(r));
  const CMat factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  Rng rng = make_rng(seed, 0xEC40u);
  CMat w(n, t), z(n, t);
  for (int j = 0; j < t; ++j)
    for (int i = 0; i < n; ++i) w(i, j) = complex_normal(rng);
  for (int j = 0; j < t; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = complex_normal(rng);

  const CVec v = steering_vector(geom, target.location());
  EchoBatch out;
  // A X = v (vᵀ X), never forming A.
  out.snapshots = target.rcs_coefficient * v * (v.transpose() * (factor * w)) + std::sqrt(noise_power) * z;
  out.angle = target.angle;
  out.range = target.range;
  out.beta = target.rcs_coefficient;
  out.noise_power = noise_power;
  return out;
}

inline EchoBatch simulate_echo(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r,
                               std::uint64_t seed) {
  return simulate_echo(geom, target, r, target.block_length, target.echo_noise_power, seed);
}

struct MusicGrid {
  double angle_min = 0.0;
  double angle_max = 0.0;
  int n_angle = 181;
  double range_min = 0.0;
  double range_max = 0.0;
  int n_range = 101;

  double angle_at(int i) const { return n_angle == 1 ? angle_min : angle_min + (angle_max - angle_min) * i / (n_angle - 1); }
  double range_at(int j) const { return n_range == 1 ? range_min : range_min + (range_max - range_min) * j / (n_range - 1); }
  double angle_step() const { return n_angle == 1 ? 0.0 : (angle_max - angle_min) / (n_angle - 1); }
  double range_step() const { return n_range == 1 ? 0.0 : (range_max - range_min) / (n_range - 1); }
};

/// 181 × 101 lattice over the target box padded by ±5° and ±1 m.
inline MusicGrid default_music_grid(const SensingTarget& target, int n_angle = 181, int n_range = 101) {
  const double pad = 5.0 * kPi / 180.0;
  MusicGrid g;
  g.angle_min = std::max(1e-6, target.angle_lower - pad);
  g.angle_max = std::min(kPi - 1e-6, target.angle_upper + pad);
  g.range_min = std::max(1e-3, target.range_lower - 1.0);
  g.range_max = target.range_upper + 1.0;
  g.n_angle = n_angle;
  g.n_range = n_range;
  return g;
}

struct MusicSpectrum {
  MusicGrid grid;
  Mat values;  // n_angle × n_range, peak 1
  int peak_angle_index = 0;
  int peak_range_index = 0;
  double estimated_angle = 0.0;  // after quadratic refinement
  double estimated_range = 0.0;
};

namespace detail {

// Vertex offset of the parabola through (−1, a), (0, b), (1, c), limited to half a cell.
inline double parabola_offset(double a, double b, double c) {
  const double den = a - 2.0 * b + c;
  if (!(std::abs(den) > 0.0)) return 0.0;
  return std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
}

}  // namespace detail

inline MusicSpectrum music_spectrum(const EchoBatch& echo, const ArrayGeometry& geom, const MusicGrid& grid) {
  const Index t = echo.snapshots.cols();
  require(t >= 2, ErrorCode::rank_deficient, "MUSIC needs at least 2 snapshots");
  require(echo.snapshots.rows() == geom.size(), ErrorCode::invalid_argument, "snapshot size mismatch");
  require(grid.n_angle >= 1 && grid.n_range >= 1, ErrorCode::invalid_argument, "empty MUSIC grid");
  const int n = geom.size();
  CMat s = echo.snapshots * echo.snapshots.adjoint() / static_cast<double>(t);
  s = hermitian_part(s);
  Eigen::SelfAdjointEigenSolver<CMat> es(s);
  if (es.info() != Eigen::Success) {
    s += 1e-10 * s.trace().real() * CMat::Identity(n, n);
    es.compute(s);
    require(es.info() == Eigen::Success, ErrorCode::numerical_failure, "sample covariance eigendecomposition failed");
  }
  const CMat en = es.eigenvectors().leftCols(n - 1);  // ascending order; drop the signal vector

  MusicSpectrum out;
  out.grid = grid;
  Mat den(grid.n_angle, grid.n_range);
  for (int i = 0; i < grid.n_angle; ++i)
    for (int j = 0; j < grid.n_range; ++j) {
      const CVec v = steering_vector(geom, PolarPoint{grid.angle_at(i), grid.range_at(j)});
      den(i, j) = (en.adjoint() * v).squaredNorm();
    }
  Index pi = 0, pj = 0;
  const double dmin = std::max(den.minCoeff(&pi, &pj), 1e-300);
  out.values = den.cwiseMax(1e-300).cwiseInverse() * dmin;
  out.peak_angle_index = static_cast<int>(pi);
  out.peak_range_index = static_cast<int>(pj);

  double da = 0.0, dr = 0.0;
  if (pi > 0 && pi + 1 < grid.n_angle) da = detail::parabola_offset(den(pi - 1, pj), den(pi, pj), den(pi + 1, pj));
  if (pj > 0 && pj + 1 < grid.n_range) dr = detail::parabola_offset(den(pi, pj - 1), den(pi, pj), den(pi, pj + 1));
  out.estimated_angle = grid.angle_at(static_cast<int>(pi)) + da * grid.angle_step();
  out.estimated_range = grid.range_at(static_cast<int>(pj)) + dr * grid.range_step();
  return out;
}

struct RmseRow {
  double crb_range_threshold = 0.0;
  double crb_range = 0.0;   // CRB_r of the designed covariance at the nominal target
  double rcrb_range = 0.0;  // sqrt(crb_range)
  double rmse_range = 0.0;
  double rmse_angle = 0.0;
  double secrecy_rate = 0.0;
  int n_trials = 0;
};

/// Localization error of MUSIC for a fixed transmit covariance.
inline RmseRow music_rmse(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r, int n_trials,
                          std::uint64_t seed, const MusicGrid& grid) {
  require(n_trials >= 1, ErrorCode::invalid_argument, "n_trials must be >= 1");
  RmseRow row;
  row.n_trials = n_trials;
  row.crb_range = crb_r(geom, target, r);
  row.rcrb_range = std::sqrt(row.crb_range);
  double se_r = 0.0, se_a = 0.0;
  for (int k = 0; k < n_trials; ++k) {
    const EchoBatch e = simulate_echo(geom, target, r, mix_seed(seed, static_cast<std::uint64_t>(k)));
    const MusicSpectrum m = music_spectrum(e, geom, grid);
    se_r += std::pow(m.estimated_range - target.range, 2);
    se_a += std::pow(m.estimated_angle - target.angle, 2);
  }
  row.rmse_range = std::sqrt(se_r / n_trials);
  row.rmse_angle = std::sqrt(se_a / n_trials);
  return row;
}

/// For each Γ_r: design the joint beamformer at that threshold, then run MUSIC trials.
inline std::vector<RmseRow> rmse_experiment(const Scenario& scenario, const std::vector<double>& thresholds,
                                            int n_trials, std::uint64_t seed, const SearchOptions& search = {}) {
  std::vector<RmseRow> rows;
  const MusicGrid grid = default_music_grid(scenario.target);
  for (double thr : thresholds) {
    Scenario sc = scenario;
    sc.crb_range_threshold = thr;
    const BeamformerResult res = one_d_search(sc, Method::joint, search);
    RmseRow row = music_rmse(sc.geometry, sc.target, res.covariances.total(), n_trials, seed, grid);
    row.crb_range_threshold = thr;
    row.secrecy_rate = res.secrecy_rate;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nfsec
