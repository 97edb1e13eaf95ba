#include <catch_amalgamated.hpp>

#include "nfsec/array_geometry.hpp"
#include "nfsec/random.hpp"

using namespace nfsec;
using Catch::Approx;

TEST_CASE("element positions", "[array_geometry]") {
  auto one = element_positions(ArrayGeometry(1, 0.01, 0.017));
  REQUIRE(one.size() == 1);
  CHECK(one[0].x == 0.0);
  CHECK(one[0].y == 0.0);

  auto two = element_positions(ArrayGeometry(2, 0.01, 0.017));
  CHECK(two[0].x == Approx(-0.005));
  CHECK(two[1].x == Approx(0.005));

  ArrayGeometry g64(64, 0.0085, 0.017);
  auto p = element_positions(g64);
  CHECK(p.front().x == Approx(-31.5 * 0.0085));
  CHECK(p.back().x == Approx(0.26775));
  for (int n = 0; n < 64; ++n) CHECK(p[n].x == -p[63 - n].x);
}

TEST_CASE("invalid geometry is rejected", "[array_geometry]") {
  CHECK_THROWS_AS(ArrayGeometry(0, 0.01, 0.017), Error);
  CHECK_THROWS_AS(ArrayGeometry(4, 0.0, 0.017), Error);
  CHECK_THROWS_AS(ArrayGeometry(4, 0.01, -1.0), Error);
}

TEST_CASE("element distance", "[array_geometry]") {
  ArrayGeometry g(8, 0.0085, 0.017);
  for (int n = 0; n < 8; ++n) {
    const double x = g.element_x(n);
    CHECK(element_distance(g, PolarPoint{kPi / 2, 10.0}, n) == Approx(std::sqrt(100.0 + x * x)).epsilon(1e-14));
  }
  CHECK(element_distance(ArrayGeometry(3, 0.01, 0.017), PolarPoint{1.0, 7.0}, 1) == Approx(7.0).epsilon(1e-15));

  ArrayGeometry g2(2, 0.0085, 0.017);
  const PolarPoint p{kPi / 3, 5.0};
  const CartesianPoint c = p.to_cartesian();
  for (int n = 0; n < 2; ++n) {
    const double brute = std::hypot(c.x - g2.element_x(n), c.y);
    CHECK(element_distance(g2, p, n) == Approx(brute).epsilon(1e-13));
    const double dx = std::abs(g2.element_x(n));
    CHECK(element_distance(g2, p, n) >= 5.0 - dx);
    CHECK(element_distance(g2, p, n) <= 5.0 + dx);
  }
  CHECK_THROWS_AS(element_distance(g2, p, 2), Error);
  CHECK_THROWS_AS(element_distance(g2, p, -1), Error);
}

TEST_CASE("steering vector", "[array_geometry]") {
  CHECK(steering_vector(ArrayGeometry(1, 0.01, 0.017), PolarPoint{1.0, 3.0})(0) == cplx(1.0, 0.0));
  const CVec v2 = steering_vector(ArrayGeometry(2, 0.0085, 0.017), PolarPoint{kPi / 2, 4.0});
  CHECK(std::abs(v2(1) - cplx(1.0, 0.0)) < 1e-14);

  // Cartesian phase oracle from absolute distances.
  ArrayGeometry g(8, 0.0085, 0.017);
  const PolarPoint p{kPi / 3, 3.0};
  const CartesianPoint c = p.to_cartesian();
  const CVec v = steering_vector(g, p);
  const auto el = element_positions(g);
  const double d0 = distance(c, el[0]);
  for (int n = 0; n < 8; ++n) {
    const cplx expect = std::polar(1.0, -2.0 * kPi / 0.017 * (distance(c, el[n]) - d0));
    CHECK(std::abs(v(n) - expect) < 1e-9);
    CHECK(std::abs(v(n)) == Approx(1.0).epsilon(1e-15));
  }
  CHECK(v(0) == cplx(1.0, 0.0));

  CHECK_THROWS_AS(steering_vector(g, el[3]), Error);
}

TEST_CASE("polar and Cartesian steering agree", "[array_geometry]") {
  ArrayGeometry g(32, 0.0085, 0.017);
  Rng rng = make_rng(3);
  for (int i = 0; i < 50; ++i) {
    const PolarPoint p{0.1 + 2.9 * uniform01(rng), 0.5 + 30.0 * uniform01(rng)};
    const CVec a = steering_vector(g, p);
    const CVec b = steering_vector(g, CartesianPoint{p.range * std::cos(p.angle), p.range * std::sin(p.angle)});
    for (int n = 0; n < g.size(); ++n) CHECK(std::abs(std::arg(a(n) * std::conj(b(n)))) <= 1e-12);
  }
}

TEST_CASE("path loss vector", "[array_geometry]") {
  const Vec b1 = path_loss_vector(ArrayGeometry(1, 0.01, 0.017), CartesianPoint{0.0, 10.0});
  CHECK(b1(0) == Approx(1.3528e-4).epsilon(1e-4));

  ArrayGeometry g(64, 0.0085, 0.017);
  const Vec sym = path_loss_vector(g, CartesianPoint{0.0, 7.0});
  for (int n = 0; n < 64; ++n) CHECK(sym(n) == Approx(sym(63 - n)).epsilon(1e-14));

  const CartesianPoint p{5.0, 10.0};
  const Vec b = path_loss_vector(g, p);
  const auto el = element_positions(g);
  for (int n = 0; n < 64; ++n) {
    const double d = std::hypot(p.x - el[n].x, p.y - el[n].y);
    CHECK(b(n) == Approx(0.017 / (4.0 * kPi * d)).epsilon(1e-14));
  }
  // Off-axis point: farther elements see smaller gain.
  for (int n = 1; n < 64; ++n) CHECK(b(n) > b(n - 1));
}

TEST_CASE("Rayleigh distance", "[array_geometry]") {
  CHECK(rayleigh_distance(ArrayGeometry(64, 0.0085, 0.017)) == Approx(2.0 * std::pow(63 * 0.0085, 2) / 0.017));
  CHECK(rayleigh_distance(ArrayGeometry(64, 0.0085, 0.017)) == Approx(33.7).margin(0.1));
  CHECK(rayleigh_distance(ArrayGeometry(2, 0.05, 0.1)) == Approx(0.05));
  CHECK(rayleigh_distance(ArrayGeometry(3, 0.05, 0.1)) == Approx(4.0 * rayleigh_distance(ArrayGeometry(2, 0.05, 0.1))));
  CHECK_THROWS_AS(rayleigh_distance(ArrayGeometry(1, 0.05, 0.1)), Error);
}
