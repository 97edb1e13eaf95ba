#include <catch_amalgamated.hpp>

#include "nfsec/experiment_config.hpp"
#include "nfsec/localization.hpp"

using namespace nfsec;

namespace {

struct Setup {
  ArrayGeometry geom;
  SensingTarget target;
};

Setup setup(int n) {
  ScenarioConfig s = desk_preset().scenario;
  s.n_antennas = n;
  const Scenario sc = build_scenario(s);
  return {sc.geometry, sc.target};
}

CMat random_cov(Rng& rng, int n, int rank, double power) {
  CMat a(n, rank);
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = complex_normal(rng);
  CMat r = a * a.adjoint();
  return r * (power / r.trace().real());
}

}  // namespace

TEST_CASE("echo is zero without target and noise", "[localization]") {
  auto [geom, target] = setup(8);
  target.rcs_coefficient = 0.0;
  Rng rng = make_rng(1);
  const auto e = simulate_echo(geom, target, random_cov(rng, 8, 8, 1.0), 16, 0.0, 3);
  CHECK(e.snapshots.norm() == 0.0);
  CHECK(e.snapshots.rows() == 8);
  CHECK(e.snapshots.cols() == 16);
}

TEST_CASE("sample covariance follows the echo model", "[localization]") {
  auto [geom, target] = setup(8);
  Rng rng = make_rng(2);
  const CMat r = random_cov(rng, 8, 8, 1.0);
  const double sigma2 = 0.3;
  target.rcs_coefficient = cplx(0.8, 0.6);
  const int t = 10000;
  const auto e = simulate_echo(geom, target, r, t, sigma2, 11);
  const CMat s = e.snapshots * e.snapshots.adjoint() / static_cast<double>(t);
  const CVec v = steering_vector(geom, target.location());
  const CMat a = target.rcs_coefficient * v * v.transpose();
  const CMat expected = a * r * a.adjoint() + sigma2 * CMat::Identity(8, 8);
  CHECK((s - expected).norm() <= 0.05 * expected.norm());
}

TEST_CASE("noiseless echo spans the steering vector", "[localization]") {
  auto [geom, target] = setup(16);
  Rng rng = make_rng(3);
  const CMat r = random_cov(rng, 16, 4, 1.0);
  const auto e = simulate_echo(geom, target, r, 32, 0.0, 5);
  const CVec v = steering_vector(geom, target.location());
  const CMat proj = CMat::Identity(16, 16) - v * v.adjoint() / v.squaredNorm();
  CHECK((proj * e.snapshots).norm() <= 1e-8 * e.snapshots.norm());

  const MusicGrid grid = default_music_grid(target);
  const auto m = music_spectrum(e, geom, grid);
  CHECK(m.values.maxCoeff() == Catch::Approx(1.0));
  CHECK(std::abs(m.estimated_angle - target.angle) <= grid.angle_step());
  CHECK(std::abs(m.estimated_range - target.range) <= grid.range_step());
  // The cell containing the truth is the peak cell or its neighbour.
  CHECK(std::abs(grid.angle_at(m.peak_angle_index) - target.angle) <= grid.angle_step());
  CHECK(std::abs(grid.range_at(m.peak_range_index) - target.range) <= grid.range_step());
}

TEST_CASE("spectrum is invariant to snapshot scaling", "[localization]") {
  auto [geom, target] = setup(8);
  Rng rng = make_rng(4);
  const auto e = simulate_echo(geom, target, random_cov(rng, 8, 8, 1.0), 64, 1e-3, 6);
  MusicGrid grid = default_music_grid(target, 31, 21);
  EchoBatch scaled = e;
  scaled.snapshots *= cplx(0.0, 7.5);
  const auto a = music_spectrum(e, geom, grid), b = music_spectrum(scaled, geom, grid);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(a.peak_angle_index == b.peak_angle_index);
  CHECK(a.peak_range_index == b.peak_range_index);
}

TEST_CASE("spectrum ignores the waveform shape without noise", "[localization]") {
  auto [geom, target] = setup(16);
  Rng rng = make_rng(8);
  const MusicGrid grid = default_music_grid(target, 61, 41);
  const auto a = music_spectrum(simulate_echo(geom, target, random_cov(rng, 16, 1, 1.0), 16, 0.0, 1), geom, grid);
  const auto b = music_spectrum(simulate_echo(geom, target, random_cov(rng, 16, 16, 2.0), 16, 0.0, 2), geom, grid);
  CHECK(a.peak_angle_index == b.peak_angle_index);
  CHECK(a.peak_range_index == b.peak_range_index);
}

TEST_CASE("MUSIC input checks", "[localization]") {
  auto [geom, target] = setup(8);
  Rng rng = make_rng(5);
  const CMat r = random_cov(rng, 8, 8, 1.0);
  const auto one = simulate_echo(geom, target, r, 1, 1e-3, 1);
  try {
    music_spectrum(one, geom, default_music_grid(target));
    FAIL("single snapshot accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rank_deficient);
  }
  CHECK_THROWS_AS(simulate_echo(geom, target, r, 0, 1e-3, 1), Error);
  CHECK_THROWS_AS(simulate_echo(geom, target, r, 4, -1.0, 1), Error);
  CHECK_THROWS_AS(simulate_echo(geom, target, CMat::Identity(3, 3), 4, 1.0, 1), Error);
}

TEST_CASE("RMSE shrinks with echo SNR", "[localization]") {
  auto [geom, target] = setup(16);
  Rng rng = make_rng(6);
  const CMat r = random_cov(rng, 16, 16, 1.0);
  const MusicGrid grid = default_music_grid(target, 61, 61);
  const double base = target.echo_noise_power;
  double prev = std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 0.25, 0.0625}) {  // RCRB well inside the search window
    target.echo_noise_power = base * scale;
    const RmseRow row = music_rmse(geom, target, r, 40, 9, grid);
    CHECK(row.rmse_range < prev);
    CHECK(row.rmse_range >= 0.5 * row.rcrb_range);
    prev = row.rmse_range;
  }
}
