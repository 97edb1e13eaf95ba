#pragma once

// Target response matrix A = v vᵀ and its analytic derivatives, the Fisher
// information for [θ, r, Re β, Im β], closed-form CRBs, and their
// Schur-complement LMI form.

#include <cmath>
#include <vector>

#include "nfsec/array_geometry.hpp"

namespace nfsec {

struct SensingTarget {
  double angle = kPi / 2;  // θ_s
  double range = 5.0;      // r_s
  cplx rcs_coefficient{1.0, 0.0};  // β_s
  double echo_noise_power = 1.0;   // σ_s²
  int block_length = 64;           // T
  double angle_lower = kPi / 2;
  double angle_upper = kPi / 2;
  double range_lower = 5.0;
  double range_upper = 5.0;
  int grid_size = 1;  // M

  PolarPoint location() const { return {angle, range}; }

  void validate() const {
    require(angle_lower <= angle && angle <= angle_upper, ErrorCode::invalid_argument, "target angle outside bounds");
    require(range_lower <= range && range <= range_upper, ErrorCode::invalid_argument, "target range outside bounds");
    require(range_lower > 0.0, ErrorCode::invalid_argument, "range bounds must be positive");
    require(std::abs(rcs_coefficient) > 0.0, ErrorCode::invalid_argument, "|beta_s| must be positive");
    require(echo_noise_power > 0.0, ErrorCode::invalid_argument, "echo noise power must be positive");
    require(block_length >= 1, ErrorCode::invalid_argument, "block length must be >= 1");
    require(grid_size >= 1, ErrorCode::invalid_argument, "grid size must be >= 1");
  }

  /// σ_s² / (2|β_s|² T), the prefactor shared by both CRBs.
  double crb_prefactor() const {
    return echo_noise_power / (2.0 * std::norm(rcs_coefficient) * block_length);
  }
};

/// Steering vector with its partial derivatives in angle and range.
struct SteeringJet {
  CVec v;
  CVec dv_theta;
  CVec dv_range;
};

inline SteeringJet steering_jet(const ArrayGeometry& geom, double theta, double range) {
  const CartesianPoint p = PolarPoint{theta, range}.to_cartesian();
  check_not_degenerate(geom, p);
  const int n_el = geom.size();
  const double k = geom.wavenumber();
  SteeringJet jet{steering_vector(geom, p), CVec(n_el), CVec(n_el)};
  const double s = std::sin(theta);
  const double c = std::cos(theta);
  auto d_theta = [&](int n) {
    const double x = geom.element_x(n);
    return x * range * s / element_distance(geom, PolarPoint{theta, range}, n);
  };
  auto d_range = [&](int n) {
    const double x = geom.element_x(n);
    return (range - x * c) / element_distance(geom, PolarPoint{theta, range}, n);
  };
  const double t0 = d_theta(0);
  const double r0 = d_range(0);
  const cplx mj{0.0, -k};
  for (int n = 0; n < n_el; ++n) {
    jet.dv_theta(n) = mj * (d_theta(n) - t0) * jet.v(n);
    jet.dv_range(n) = mj * (d_range(n) - r0) * jet.v(n);
  }
  return jet;
}

struct ResponseMatrices {
  CMat a;
  CMat a_dot_theta;
  CMat a_dot_r;
};

inline ResponseMatrices response_matrices(const ArrayGeometry& geom, double theta, double range) {
  const SteeringJet jet = steering_jet(geom, theta, range);
  const CMat a = jet.v * jet.v.transpose();
  const CMat at = jet.dv_theta * jet.v.transpose();
  const CMat ar = jet.dv_range * jet.v.transpose();
  return {a, at + at.transpose(), ar + ar.transpose()};
}

/// 4×4 FIM for ξ = [θ_s, r_s, Re β_s, Im β_s] with XXᴴ = T·R.
inline Mat fim(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r) {
  const auto m = response_matrices(geom, target.angle, target.range);
  const cplx beta = target.rcs_coefficient;
  const double t = target.block_length;
  // Columns of ∂x̂/∂ξ_i, written as matrices D_i with ∂x̂ = vec(D_i X).
  const CMat d[4] = {beta * m.a_dot_theta, beta * m.a_dot_r, m.a, cplx(0.0, 1.0) * m.a};
  Mat j(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      // tr(Xᴴ D_aᴴ D_b X) = T·tr(D_b R D_aᴴ)
      const double val = 2.0 * t / target.echo_noise_power * (d[b] * r * d[a].adjoint()).trace().real();
      j(a, b) = val;
      j(b, a) = val;
    }
  }
  return j;
}

enum class CrbParameter { angle, range };

namespace detail {

inline double closed_form_crb(const CMat& a, const CMat& a_dot, const CMat& r, double prefactor) {
  const double taa = (a * r * a.adjoint()).trace().real();
  const double tdd = (a_dot * r * a_dot.adjoint()).trace().real();
  const cplx tad = (a * r * a_dot.adjoint()).trace();
  const double den = tdd * taa - std::norm(tad);
  require(taa > 0.0 && den > 1e-14 * std::max(tdd * taa, 1e-300), ErrorCode::unidentifiable,
          "target direction is not illuminated");
  return prefactor * taa / den;
}

}  // namespace detail

inline double crb(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r, CrbParameter which) {
  const auto m = response_matrices(geom, target.angle, target.range);
  return detail::closed_form_crb(m.a, which == CrbParameter::angle ? m.a_dot_theta : m.a_dot_r, r,
                                 target.crb_prefactor());
}

inline double crb_theta(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r) {
  return crb(geom, target, r, CrbParameter::angle);
}

inline double crb_r(const ArrayGeometry& geom, const SensingTarget& target, const CMat& r) {
  return crb(geom, target, r, CrbParameter::range);
}

/// Mesh over the target's uncertainty box: a ⌈√M⌉×⌈√M⌉ lattice (angle-major,
/// endpoints included) truncated to M points.
inline std::vector<PolarPoint> target_grid(const SensingTarget& target) {
  require(target.grid_size >= 1, ErrorCode::invalid_argument, "grid size must be >= 1");
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(target.grid_size))));
  auto axis = [side](double lo, double hi, double nominal, int i) {
    if (side == 1) return nominal;
    return lo + (hi - lo) * i / (side - 1);
  };
  std::vector<PolarPoint> grid;
  for (int i = 0; i < side && static_cast<int>(grid.size()) < target.grid_size; ++i) {
    for (int j = 0; j < side && static_cast<int>(grid.size()) < target.grid_size; ++j) {
      grid.push_back({axis(target.angle_lower, target.angle_upper, target.angle, i),
                      axis(target.range_lower, target.range_upper, target.range, j)});
    }
  }
  return grid;
}

/// 2×2 Schur-complement LMI equivalent to CRB ≤ Γ:
///   [[tr(ȦRȦᴴ) − c·s, tr(ȦRAᴴ)], [tr(ARȦᴴ), tr(ARAᴴ)]] ⪰ 0
/// with c = σ_s²/(2|β_s|²TΓ) and s = ξ when scaled (else 1). Each entry is
/// tr(G R) for the stored coefficient matrices.
struct CrbLmi {
  CMat g11;  // ȦᴴȦ
  CMat g12;  // AᴴȦ, so that entry (0,1) = tr(g12 R)
  CMat g22;  // AᴴA
  double offset = 0.0;
  bool scaled_by_xi = false;

  Eigen::Matrix2cd evaluate(const CMat& r, double xi = 1.0) const {
    const double s = scaled_by_xi ? xi : 1.0;
    Eigen::Matrix2cd m;
    m(0, 0) = (g11 * r).trace().real() - offset * s;
    m(0, 1) = (g12 * r).trace();
    m(1, 0) = std::conj(m(0, 1));
    m(1, 1) = (g22 * r).trace().real();
    return m;
  }

  bool is_psd(const CMat& r, double xi = 1.0, double tol = 0.0) const {
    const auto m = evaluate(r, xi);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0) >= -tol * (1.0 + m.norm());
  }
};

inline CrbLmi crb_lmi(const ArrayGeometry& geom, const SensingTarget& target, const PolarPoint& point,
                      double threshold, CrbParameter which, bool scaled_by_xi) {
  require(threshold > 0.0, ErrorCode::invalid_argument, "CRB threshold must be positive");
  const auto m = response_matrices(geom, point.angle, point.range);
  const CMat& ad = which == CrbParameter::angle ? m.a_dot_theta : m.a_dot_r;
  CrbLmi lmi;
  lmi.g11 = ad.adjoint() * ad;
  lmi.g12 = m.a.adjoint() * ad;
  lmi.g22 = m.a.adjoint() * m.a;
  lmi.offset = target.crb_prefactor() / threshold;
  lmi.scaled_by_xi = scaled_by_xi;
  return lmi;
}

}  // namespace nfsec
