#include <catch_amalgamated.hpp>

#include "nfsec/random.hpp"
#include "nfsec/sensing_metrics.hpp"

using namespace nfsec;
using Catch::Approx;

namespace {

SensingTarget make_target(double theta, double r) {
  SensingTarget t;
  t.angle = theta;
  t.range = r;
  t.angle_lower = t.angle_upper = theta;
  t.range_lower = t.range_upper = r;
  t.rcs_coefficient = cplx(0.3, -0.2);
  t.echo_noise_power = 0.5;
  t.block_length = 16;
  return t;
}

// Restricted FIM over (p, Re β, Im β) taken from the full 4×4 matrix.
double restricted_crb(const Mat& j, int p) {
  const int idx[3] = {p, 2, 3};
  Eigen::Matrix3d s;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) s(a, b) = j(idx[a], idx[b]);
  return s.inverse()(0, 0);
}

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("response matrices", "[sensing_metrics]") {
  const auto m1 = response_matrices(ArrayGeometry(1, 0.01, 0.017), 1.0, 3.0);
  CHECK(m1.a(0, 0) == cplx(1.0, 0.0));
  CHECK(m1.a_dot_theta.norm() == 0.0);
  CHECK(m1.a_dot_r.norm() == 0.0);

  ArrayGeometry g(12, 0.0085, 0.017);
  const auto m = response_matrices(g, 1.2, 4.0);
  CHECK((m.a - m.a.transpose()).norm() == 0.0);
  CHECK((m.a_dot_theta - m.a_dot_theta.transpose()).norm() < 1e-12);
  CHECK((m.a_dot_r - m.a_dot_r.transpose()).norm() < 1e-12);
  Eigen::JacobiSVD<CMat> svd(m.a);
  CHECK(svd.singularValues()(1) < 1e-10 * svd.singularValues()(0));
}

TEST_CASE("analytic derivatives match central differences", "[sensing_metrics]") {
  ArrayGeometry g(16, 0.0085, 0.017);
  Rng rng = make_rng(21);
  for (int i = 0; i < 50; ++i) {
    const double th = 0.3 + 2.5 * uniform01(rng);
    const double r = 2.0 + 18.0 * uniform01(rng);
    const double ht = 1e-6, hr = 1e-6 * r;  // relative step in range
    const auto m = response_matrices(g, th, r);
    const CMat fd_t = (response_matrices(g, th + ht, r).a - response_matrices(g, th - ht, r).a) / (2.0 * ht);
    const CMat fd_r = (response_matrices(g, th, r + hr).a - response_matrices(g, th, r - hr).a) / (2.0 * hr);
    CHECK(rel(m.a_dot_theta, fd_t) <= 1e-5);
    CHECK(rel(m.a_dot_r, fd_r) <= 1e-5);
  }
}

TEST_CASE("FIM structure", "[sensing_metrics]") {
  ArrayGeometry g(6, 0.0085, 0.017);
  Rng rng = make_rng(8);
  const CMat r = random_psd(rng, 6, 6);
  SensingTarget t = make_target(1.3, 3.0);
  const Mat j = fim(g, t, r);
  CHECK((j - j.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(j).eigenvalues()(0) >= -1e-9 * j.norm());

  SensingTarget t2 = t;
  t2.block_length = 32;
  CHECK((fim(g, t2, r) - 2.0 * j).norm() <= 1e-12 * j.norm());
  t2 = t;
  t2.echo_noise_power = 0.25;
  CHECK((fim(g, t2, r) - 2.0 * j).norm() <= 1e-12 * j.norm());

  t2 = t;
  t2.rcs_coefficient = 0.0;
  const Mat j0 = fim(g, t2, r);
  CHECK(j0.topRows(2).norm() == 0.0);
  CHECK(j0.leftCols(2).norm() == 0.0);

  const auto m = response_matrices(g, t.angle, t.range);
  const double j11 = 2.0 * t.block_length * std::norm(t.rcs_coefficient) / t.echo_noise_power *
                     (m.a_dot_theta * r * m.a_dot_theta.adjoint()).trace().real();
  CHECK(j(0, 0) == Approx(j11).epsilon(1e-12));
}

TEST_CASE("FIM equals the average over random waveforms", "[sensing_metrics]") {
  ArrayGeometry g(3, 0.0085, 0.017);
  Rng rng = make_rng(31);
  const CMat r = random_psd(rng, 3, 3);
  SensingTarget t = make_target(1.1, 2.0);
  t.block_length = 4;
  const auto m = response_matrices(g, t.angle, t.range);
  Eigen::SelfAdjointEigenSolver<CMat> es(r);
  const CMat f = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const CMat d[4] = {t.rcs_coefficient * m.a_dot_theta, t.rcs_coefficient * m.a_dot_r, m.a,
                     cplx(0.0, 1.0) * m.a};
  Mat acc = Mat::Zero(4, 4);
  const int reps = 20000;
  for (int k = 0; k < reps; ++k) {
    CMat x(3, t.block_length);
    for (int c = 0; c < t.block_length; ++c) x.col(c) = f * complex_normal_vector(rng, 3);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const CMat da = d[a] * x, db = d[b] * x;
        double s = 0.0;
        for (Index i = 0; i < da.size(); ++i) s += (std::conj(da.data()[i]) * db.data()[i]).real();
        acc(a, b) += 2.0 / t.echo_noise_power * s;
      }
  }
  acc /= reps;
  const Mat j = fim(g, t, r);
  CHECK((acc - j).norm() <= 0.03 * j.norm());
}

TEST_CASE("closed-form CRB equals the FIM inverse", "[sensing_metrics]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  Rng rng = make_rng(77);
  for (int i = 0; i < 100; ++i) {
    const CMat r = random_psd(rng, 8, 1 + i % 8);
    const SensingTarget t = make_target(0.5 + 2.0 * uniform01(rng), 2.0 + 10.0 * uniform01(rng));
    const Mat j = fim(g, t, r);
    CHECK(crb_theta(g, t, r) == Approx(restricted_crb(j, 0)).epsilon(1e-8));
    CHECK(crb_r(g, t, r) == Approx(restricted_crb(j, 1)).epsilon(1e-8));
  }
}

TEST_CASE("CRB scaling laws", "[sensing_metrics]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  Rng rng = make_rng(4);
  const CMat r = random_psd(rng, 8, 4);
  SensingTarget t = make_target(1.4, 5.0);
  SensingTarget t2 = t;
  t2.block_length *= 2;
  CHECK(crb_theta(g, t2, r) == Approx(0.5 * crb_theta(g, t, r)).epsilon(1e-12));
  CHECK(crb_r(g, t2, r) == Approx(0.5 * crb_r(g, t, r)).epsilon(1e-12));
  CHECK(crb_theta(g, t, 3.0 * r) == Approx(crb_theta(g, t, r) / 3.0).epsilon(1e-12));
  CHECK(crb_r(g, t, 3.0 * r) == Approx(crb_r(g, t, r) / 3.0).epsilon(1e-12));
}

TEST_CASE("unilluminated target is unidentifiable", "[sensing_metrics]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  const SensingTarget t = make_target(kPi / 2, 5.0);
  // Beam orthogonal to conj(v) and to every derivative direction leaves no information.
  CHECK_THROWS_AS(crb_theta(g, t, CMat::Zero(8, 8)), Error);
  try {
    crb_r(g, t, CMat::Zero(8, 8));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unidentifiable);
  }
}

TEST_CASE("target grid", "[sensing_metrics]") {
  SensingTarget t = make_target(1.5, 5.0);
  auto one = target_grid(t);
  REQUIRE(one.size() == 1);
  CHECK(one[0].angle == 1.5);
  CHECK(one[0].range == 5.0);

  t.angle_lower = 1.4;
  t.angle_upper = 1.6;
  t.range_lower = 4.5;
  t.range_upper = 5.5;
  t.grid_size = 4;
  auto four = target_grid(t);
  REQUIRE(four.size() == 4);
  CHECK(four[0].angle == 1.4);
  CHECK(four[0].range == 4.5);
  CHECK(four[3].angle == 1.6);
  CHECK(four[3].range == 5.5);

  t.grid_size = 7;
  auto seven = target_grid(t);
  REQUIRE(seven.size() == 7);
  for (const auto& p : seven) {
    CHECK(p.angle >= 1.4);
    CHECK(p.angle <= 1.6);
    CHECK(p.range >= 4.5);
    CHECK(p.range <= 5.5);
  }
}

TEST_CASE("Schur LMI agrees with the CRB comparison", "[sensing_metrics]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  Rng rng = make_rng(2024);
  int disagreements = 0, checked = 0;
  for (int i = 0; i < 200; ++i) {
    const CMat r = random_psd(rng, 8, 1 + i % 4);
    const SensingTarget t = make_target(1.0 + uniform01(rng), 3.0 + 4.0 * uniform01(rng));
    for (auto which : {CrbParameter::angle, CrbParameter::range}) {
      const double c = crb(g, t, r, which);
      const double gamma = c * std::exp(2.0 * uniform01(rng) - 1.0);
      if (std::abs(c - gamma) / gamma <= 1e-6) continue;
      ++checked;
      const CrbLmi lmi = crb_lmi(g, t, t.location(), gamma, which, false);
      if (lmi.is_psd(r) != (c <= gamma)) ++disagreements;
    }
  }
  CHECK(checked > 350);
  CHECK(disagreements == 0);
}

TEST_CASE("scaled CRB LMI", "[sensing_metrics]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  Rng rng = make_rng(6);
  const SensingTarget t = make_target(1.5, 4.0);
  const CMat r = random_psd(rng, 8, 3);
  const double gamma = crb_theta(g, t, r) * 1.3;
  const CrbLmi plain = crb_lmi(g, t, t.location(), gamma, CrbParameter::angle, false);
  const CrbLmi scaled = crb_lmi(g, t, t.location(), gamma, CrbParameter::angle, true);
  CHECK((plain.evaluate(r) - scaled.evaluate(r, 1.0)).norm() == 0.0);
  for (double a : {0.1, 2.0, 50.0}) CHECK(scaled.is_psd(a * r, a) == plain.is_psd(r));

  // Midpoint convexity of the scaled feasible set.
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const CMat r1 = random_psd(rng, 8, 2), r2 = random_psd(rng, 8, 2);
    const double x1 = 0.1 + uniform01(rng), x2 = 0.1 + uniform01(rng);
    if (scaled.is_psd(r1, x1) && scaled.is_psd(r2, x2) && !scaled.is_psd(0.5 * (r1 + r2), 0.5 * (x1 + x2), 1e-12))
      ++bad;
  }
  CHECK(bad == 0);
}
