#pragma once

// Near-field uniform linear array: element layout along the x-axis, spherical
// wavefront steering vectors and free-space path loss.

#include <cmath>
#include <vector>

#include "nfsec/core.hpp"

namespace nfsec {

struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;
};

struct PolarPoint {
  double angle = kPi / 2;  // radians, measured from the array axis
  double range = 1.0;      // meters

  CartesianPoint to_cartesian() const {
    return {range * std::cos(angle), range * std::sin(angle)};
  }
};

inline PolarPoint to_polar(const CartesianPoint& p) {
  return {std::atan2(p.y, p.x), std::hypot(p.x, p.y)};
}

inline double distance(const CartesianPoint& a, const CartesianPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Points closer than this to an element are rejected.
inline constexpr double kDegenerateDistance = 1e-9;

class ArrayGeometry {
 public:
  ArrayGeometry() = default;
  ArrayGeometry(int n_elements, double spacing, double wavelength)
      : n_(n_elements), d_(spacing), lambda_(wavelength) {
    require(n_elements >= 1, ErrorCode::invalid_argument, "array needs at least one element");
    require(spacing > 0.0, ErrorCode::invalid_argument, "element spacing must be positive");
    require(wavelength > 0.0, ErrorCode::invalid_argument, "wavelength must be positive");
  }

  int size() const { return n_; }
  double spacing() const { return d_; }
  double wavelength() const { return lambda_; }
  double wavenumber() const { return 2.0 * kPi / lambda_; }

  /// δ_n = (2n − N + 1)/2.
  double offset(int n) const { return (2.0 * n - n_ + 1.0) / 2.0; }

  /// x-coordinate δ_n·d of element n.
  double element_x(int n) const { return offset(n) * d_; }

  CartesianPoint element(int n) const { return {element_x(n), 0.0}; }

  double aperture() const { return (n_ - 1) * d_; }

 private:
  int n_ = 1;
  double d_ = 0.5;
  double lambda_ = 1.0;
};

inline std::vector<CartesianPoint> element_positions(const ArrayGeometry& geom) {
  std::vector<CartesianPoint> out;
  out.reserve(geom.size());
  for (int n = 0; n < geom.size(); ++n) out.push_back(geom.element(n));
  return out;
}

inline void check_index(const ArrayGeometry& geom, int n) {
  require(n >= 0 && n < geom.size(), ErrorCode::index_out_of_range,
          "element index " + std::to_string(n) + " outside [0, " + std::to_string(geom.size()) + ")");
}

inline double element_distance(const ArrayGeometry& geom, const PolarPoint& p, int n) {
  check_index(geom, n);
  const double dx = geom.element_x(n);
  const double r2 = p.range * p.range + dx * dx - 2.0 * dx * p.range * std::cos(p.angle);
  return std::sqrt(std::max(r2, 0.0));
}

inline double element_distance(const ArrayGeometry& geom, const CartesianPoint& p, int n) {
  check_index(geom, n);
  return distance(p, geom.element(n));
}

inline double min_element_distance(const ArrayGeometry& geom, const CartesianPoint& p) {
  double best = distance(p, geom.element(0));
  for (int n = 1; n < geom.size(); ++n) best = std::min(best, distance(p, geom.element(n)));
  return best;
}

inline void check_not_degenerate(const ArrayGeometry& geom, const CartesianPoint& p) {
  require(min_element_distance(geom, p) >= kDegenerateDistance, ErrorCode::degenerate_point,
          "point coincides with an array element");
}

namespace detail {

// r^(n) − r^(0) as (r_n² − r_0²)/(r_n + r_0); the squared difference is formed
// analytically so large ranges do not cancel.
inline double path_difference(const ArrayGeometry& geom, double x, double y, int n) {
  const double xn = geom.element_x(n);
  const double x0 = geom.element_x(0);
  const double rn = std::hypot(x - xn, y);
  const double r0 = std::hypot(x - x0, y);
  const double sq_diff = (xn - x0) * (xn + x0 - 2.0 * x);
  return sq_diff / (rn + r0);
}

}  // namespace detail

inline CVec steering_vector(const ArrayGeometry& geom, const CartesianPoint& p) {
  check_not_degenerate(geom, p);
  const double k = geom.wavenumber();
  CVec v(geom.size());
  v(0) = 1.0;
  for (int n = 1; n < geom.size(); ++n) {
    v(n) = std::polar(1.0, -k * detail::path_difference(geom, p.x, p.y, n));
  }
  return v;
}

inline CVec steering_vector(const ArrayGeometry& geom, const PolarPoint& p) {
  return steering_vector(geom, p.to_cartesian());
}

inline Vec path_loss_vector(const ArrayGeometry& geom, const CartesianPoint& p) {
  check_not_degenerate(geom, p);
  Vec b(geom.size());
  for (int n = 0; n < geom.size(); ++n) {
    b(n) = geom.wavelength() / (4.0 * kPi * distance(p, geom.element(n)));
  }
  return b;
}

inline double rayleigh_distance(const ArrayGeometry& geom) {
  require(geom.size() >= 2, ErrorCode::invalid_argument, "Rayleigh distance needs N >= 2");
  const double d = geom.aperture();
  return 2.0 * d * d / geom.wavelength();
}

}  // namespace nfsec
