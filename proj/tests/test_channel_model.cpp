#include <catch_amalgamated.hpp>

#include "nfsec/channel_model.hpp"
#include "nfsec/uncertainty_bounds.hpp"

using namespace nfsec;
using Catch::Approx;

namespace {

double brute_quad(const CMat& a, const CVec& g) {
  cplx s = 0.0;
  for (Index i = 0; i < g.size(); ++i)
    for (Index j = 0; j < g.size(); ++j) s += std::conj(g(i)) * a(i, j) * g(j);
  return s.real();
}

CovariancePair random_pair(Rng& rng, int n) { return {random_psd(rng, n, 2), random_psd(rng, n, 3)}; }

}  // namespace

TEST_CASE("LoS channel", "[channel_model]") {
  const CVec g1 = los_channel(ArrayGeometry(1, 0.01, 0.017), CartesianPoint{0.0, 10.0});
  CHECK(std::abs(g1(0)) == Approx(1.3528e-4).epsilon(1e-4));

  ArrayGeometry g(16, 0.0085, 0.017);
  const CartesianPoint l{0.0, 10.0};
  const CVec h = los_channel(g, l);
  const CVec v = steering_vector(g, l);
  const Vec b = path_loss_vector(g, l);
  double sq = 0.0;
  for (int n = 0; n < 16; ++n) {
    CHECK(std::abs(h(n) - v(n) * b(n)) < 1e-18);
    const double d = distance(l, g.element(n));
    sq += std::pow(0.017 / (4.0 * kPi * d), 2);
  }
  CHECK(h.squaredNorm() == Approx(sq).epsilon(1e-12));
  CHECK_THROWS_AS(los_channel(g, g.element(2)), Error);
}

TEST_CASE("channel sampling", "[channel_model]") {
  ArrayGeometry g(16, 0.0085, 0.017);
  EavesdropperProfile p;
  p.estimated_location = {1.0, 8.0};

  SECTION("point region returns the LoS channel") {
    const CVec s = sample_channel(p, g, 11, 0);
    CHECK((s - los_channel(g, p.estimated_location)).norm() == 0.0);
  }
  SECTION("draws stay inside both bounds and are reproducible") {
    p.location_error_bound = 0.1;
    p.nlos_norm_bound = 0.05 * los_channel(g, p.estimated_location).norm();
    const double emp = empirical_error(g, p.estimated_location, 0.1, 5000, 4);
    const CVec ghat = los_channel(g, p.estimated_location);
    for (int i = 0; i < 300; ++i) {
      Rng rng = make_rng(99, i);
      const ChannelDraw d = draw_channel(p, g, rng);
      CHECK(std::hypot(d.location_offset.x, d.location_offset.y) <= 0.1);
      CHECK(d.nlos.norm() <= p.nlos_norm_bound * (1.0 + 1e-12));
      const CVec c = sample_channel(p, g, 99, i);
      CHECK((c - d.channel).norm() == 0.0);
      CHECK((c - ghat).norm() <= 1.05 * emp + p.nlos_norm_bound);
    }
  }
}

TEST_CASE("SINR and harvested power", "[channel_model]") {
  CovariancePair c{CMat::Identity(3, 3), CMat::Zero(3, 3)};
  CVec e1 = CVec::Zero(3);
  e1(0) = 1.0;
  CHECK(cu_sinr(c, e1, 1.0) == Approx(1.0));
  CHECK(cu_sinr({CMat::Zero(3, 3), CMat::Identity(3, 3)}, e1, 1.0) == 0.0);
  CHECK(eav_sinr({CMat::Zero(3, 3), CMat::Identity(3, 3)}, e1, 1.0) == 0.0);

  CMat r0 = CMat::Zero(3, 3);
  r0(1, 1) = 2.0;
  CHECK(eav_sinr({r0, CMat::Identity(3, 3)}, e1, 1.0) == 0.0);

  CVec g2 = CVec::Ones(2);
  CHECK(harvested_power({CMat::Identity(2, 2) * 0.5, CMat::Identity(2, 2) * 0.5}, g2, 1.0) == Approx(2.0));
  CHECK(harvested_power({CMat::Identity(2, 2), CMat::Zero(2, 2)}, g2, 0.0) == 0.0);

  Rng rng = make_rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto cov = random_pair(rng, 6);
    const CVec g = complex_normal_vector(rng, 6);
    const double s2 = 0.3;
    const double expect = brute_quad(cov.r0, g) / (brute_quad(cov.r1, g) + s2);
    CHECK(cu_sinr(cov, g, s2) == Approx(expect).epsilon(1e-10));
    CHECK(eav_sinr(cov, g, s2) == Approx(expect).epsilon(1e-10));
    CHECK(harvested_power(cov, g, 0.7) == Approx(0.7 * brute_quad(cov.total(), g)).epsilon(1e-10));
    const double a = 3.7;
    CHECK(cu_sinr({a * cov.r0, a * cov.r1}, g, a * s2) == Approx(cu_sinr(cov, g, s2)).epsilon(1e-12));
    CHECK(harvested_power({2.0 * cov.r0, 2.0 * cov.r1}, g, 0.35) ==
          Approx(harvested_power(cov, g, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("covariance pair validation", "[channel_model]") {
  CovariancePair ok{CMat::Identity(2, 2), CMat::Identity(2, 2)};
  CHECK_NOTHROW(ok.validate(4.0));
  CHECK_THROWS_AS(ok.validate(3.0), Error);
  CovariancePair neg{-CMat::Identity(2, 2), CMat::Identity(2, 2)};
  CHECK_THROWS_AS(neg.validate(), Error);
  CMat nh = CMat::Identity(2, 2);
  nh(0, 1) = cplx(0.0, 1.0);
  CHECK_THROWS_AS((CovariancePair{nh, CMat::Identity(2, 2)}.validate()), Error);
}

TEST_CASE("empirical worst secrecy rate", "[channel_model]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  const CVec g0 = los_channel(g, CartesianPoint{0.0, 10.0});
  EavesdropperProfile e;
  e.index = 1;
  e.estimated_location = {3.0, 6.0};
  e.noise_power = 1e-9;
  const double s0 = 1e-9;

  CHECK(empirical_worst_secrecy_rate({CMat::Zero(8, 8), CMat::Identity(8, 8)}, g0, s0, {e}, g, 10, 1) == 0.0);

  Rng rng = make_rng(12);
  const CovariancePair cov = random_pair(rng, 8);
  const CVec ge = los_channel(g, e.estimated_location);
  const double expect = secrecy_rate(cu_sinr(cov, g0, s0), eav_sinr(cov, ge, e.noise_power));
  CHECK(empirical_worst_secrecy_rate(cov, g0, s0, {e}, g, 5, 3) == Approx(expect).epsilon(1e-12));

  e.location_error_bound = 0.2;
  e.nlos_norm_bound = 0.05 * ge.norm();
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {1, 10, 100, 1000}) {
    const double r = empirical_worst_secrecy_rate(cov, g0, s0, {e}, g, n, 3);
    CHECK(r <= prev + 1e-15);
    prev = r;
  }
}
