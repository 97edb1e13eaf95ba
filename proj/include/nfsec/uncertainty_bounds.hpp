#pragma once

// Approximate upper bound φ_k on the LoS channel error caused by a bounded
// location error, with Monte-Carlo (exact and Taylor-approximated) references.

#include <cmath>
#include <cstdint>

#include "nfsec/channel_model.hpp"

namespace nfsec {

using QMatrix = Eigen::Matrix2d;

namespace detail {

inline Eigen::Vector2d unit_towards(const CartesianPoint& l, const CartesianPoint& u) {
  Eigen::Vector2d d(l.x - u.x, l.y - u.y);
  return d / d.norm();
}

inline CartesianPoint shifted(const CartesianPoint& l, const CartesianPoint& dl) {
  return {l.x + dl.x, l.y + dl.y};
}

}  // namespace detail

inline QMatrix q_matrix(const ArrayGeometry& geom, const CartesianPoint& l_hat) {
  check_not_degenerate(geom, l_hat);
  const Eigen::Vector2d q0 = detail::unit_towards(l_hat, geom.element(0));
  QMatrix q = QMatrix::Zero();
  for (int n = 1; n < geom.size(); ++n) {
    const Eigen::Vector2d dq = detail::unit_towards(l_hat, geom.element(n)) - q0;
    const double dn = element_distance(geom, l_hat, n);
    q += dq * dq.transpose() / (dn * dn);
  }
  const double k = geom.wavenumber();
  return k * k * q;
}

/// Largest eigenvalue of a symmetric 2×2 matrix from its trace and determinant.
inline double lambda_max(const QMatrix& q) {
  const double half_tr = 0.5 * (q(0, 0) + q(1, 1));
  const double diff = 0.5 * (q(0, 0) - q(1, 1));
  const double off = 0.5 * (q(0, 1) + q(1, 0));
  return half_tr + std::hypot(diff, off);
}

inline double pi_bound(const ArrayGeometry& geom, const CartesianPoint& l_hat, double epsilon) {
  check_not_degenerate(geom, l_hat);
  require(epsilon >= 0.0, ErrorCode::invalid_argument, "epsilon must be >= 0");
  require(epsilon < min_element_distance(geom, l_hat), ErrorCode::bound_blowup,
          "location error radius reaches an array element");
  double s = 0.0;
  for (int n = 0; n < geom.size(); ++n) {
    const double g = element_distance(geom, l_hat, n) - epsilon;
    s += 1.0 / (g * g);
  }
  return s;
}

/// φ_k, the approximate bound on ‖los(l̂+Δl) − los(l̂)‖ for ‖Δl‖ ≤ ε.
inline double los_error_bound(const ArrayGeometry& geom, const CartesianPoint& l_hat, double epsilon) {
  const double pi_eps = pi_bound(geom, l_hat, epsilon);
  double pi_zero = 0.0;
  for (int n = 0; n < geom.size(); ++n) {
    const double d = element_distance(geom, l_hat, n);
    pi_zero += 1.0 / (d * d);
  }
  double radicand = epsilon * epsilon * lambda_max(q_matrix(geom, l_hat)) + (pi_eps - pi_zero);
  require(radicand >= -1e-15, ErrorCode::negative_radicand, "error-bound radicand is negative");
  radicand = std::max(radicand, 0.0);
  return geom.wavelength() / (4.0 * kPi) * std::sqrt(radicand);
}

/// Certified-ball radius φ_k + δ_k for an eavesdropper profile.
inline double total_error_radius(const ArrayGeometry& geom, const EavesdropperProfile& p) {
  return los_error_bound(geom, p.estimated_location, p.location_error_bound) + p.nlos_norm_bound;
}

namespace detail {

// Offsets for sample i: every fifth sample sits on the boundary circle. One
// sequential stream, so the first n offsets do not depend on the total count.
template <class F>
double max_over_offsets(double epsilon, int n_samples, std::uint64_t seed, F&& f) {
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  if (epsilon == 0.0) return 0.0;
  Rng rng = make_rng(seed, 0x5EEDu);
  double best = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    best = std::max(best, f(random_disk_offset(rng, epsilon, i % 5 == 0)));
  }
  return best;
}

}  // namespace detail

inline double empirical_error(const ArrayGeometry& geom, const CartesianPoint& l_hat, double epsilon,
                              int n_samples, std::uint64_t seed) {
  const CVec g_hat = los_channel(geom, l_hat);
  return detail::max_over_offsets(epsilon, n_samples, seed, [&](const CartesianPoint& dl) {
    return (los_channel(geom, detail::shifted(l_hat, dl)) - g_hat).norm();
  });
}

/// Same sampling as empirical_error, but the cross term uses the first-order
/// expansion of the distances; the 1/d² terms stay exact.
inline double approx_error(const ArrayGeometry& geom, const CartesianPoint& l_hat, double epsilon,
                           int n_samples, std::uint64_t seed) {
  check_not_degenerate(geom, l_hat);
  const int n_el = geom.size();
  std::vector<Eigen::Vector2d> q(n_el);
  std::vector<double> d(n_el);
  for (int n = 0; n < n_el; ++n) {
    q[n] = detail::unit_towards(l_hat, geom.element(n));
    d[n] = element_distance(geom, l_hat, n);
  }
  const double k = geom.wavenumber();
  const double scale = geom.wavelength() / (4.0 * kPi);
  return detail::max_over_offsets(epsilon, n_samples, seed, [&](const CartesianPoint& dl) {
    const Eigen::Vector2d v(dl.x, dl.y);
    const CartesianPoint l = detail::shifted(l_hat, dl);
    double ups = 0.0;
    for (int n = 0; n < n_el; ++n) {
      const double dn_new = element_distance(geom, l, n);
      const double phase = k * (q[n] - q[0]).dot(v);
      ups += 1.0 / (dn_new * dn_new) + 1.0 / (d[n] * d[n]) - 2.0 * std::cos(phase) / (d[n] * (d[n] + q[n].dot(v)));
    }
    return scale * std::sqrt(std::max(ups, 0.0));
  });
}

struct ErrorBoundReport {
  double phi_k = 0.0;
  double total_bound = 0.0;
  double empirical_max = 0.0;
  double approx_max = 0.0;
  double reference_norm = 0.0;  // ‖ĝ_k‖ (LoS part)

  double normalized_phi() const { return phi_k / reference_norm; }
  double normalized_empirical() const { return empirical_max / reference_norm; }
  double normalized_approx() const { return approx_max / reference_norm; }
};

inline ErrorBoundReport error_bound_report(const ArrayGeometry& geom, const CartesianPoint& l_hat, double epsilon,
                                           double nlos_bound, int n_samples, std::uint64_t seed) {
  ErrorBoundReport r;
  r.phi_k = los_error_bound(geom, l_hat, epsilon);
  r.total_bound = r.phi_k + nlos_bound;
  r.empirical_max = empirical_error(geom, l_hat, epsilon, n_samples, seed);
  r.approx_max = approx_error(geom, l_hat, epsilon, n_samples, seed);
  r.reference_norm = los_channel(geom, l_hat).norm();
  return r;
}

}  // namespace nfsec
