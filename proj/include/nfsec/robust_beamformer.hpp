#pragma once

// Robust secure beamforming: Charnes-Cooper-scaled SDP for a fixed
// eavesdropping SINR level γ_R, a 1D search over γ_R, rank-one recovery,
// exact worst-case certification, and the separate / MRT / ZF benchmarks.
//
// Internally the SDP is solved in normalized units so that every block has
// O(1) entries: V_i = ξ'R_i/P with ξ' = ξσ₀², h₀ = g₀·sqrt(P/σ₀²), and each
// S-procedure block is scaled by diag(I, 1/‖ĝ_k‖).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nfsec/channel_model.hpp"
#include "nfsec/sdp/solver.hpp"
#include "nfsec/sensing_metrics.hpp"
#include "nfsec/uncertainty_bounds.hpp"

namespace nfsec {

struct Scenario {
  ArrayGeometry geometry;
  CartesianPoint cu_location{0.0, 10.0};
  ChannelVector cu_channel;
  double cu_noise = 1e-8;
  std::vector<EavesdropperProfile> eavesdroppers;  // ERs, then the target
  SensingTarget target;
  double power_budget = 1.0;
  double eh_threshold = 1e-7;
  double eh_efficiency = 1.0;
  double crb_theta_threshold = 0.1;  // +inf drops the angle CRB LMIs
  double crb_range_threshold = 0.1;  // +inf drops the range CRB LMIs

  void validate() const {
    require(cu_channel.size() == geometry.size(), ErrorCode::invalid_argument, "CU channel length must equal N");
    require(cu_channel.norm() > 0.0, ErrorCode::invalid_argument, "CU channel must be nonzero");
    require(cu_noise > 0.0, ErrorCode::invalid_argument, "CU noise must be positive");
    require(power_budget > 0.0, ErrorCode::invalid_argument, "power budget P must be positive");
    require(eh_threshold >= 0.0, ErrorCode::invalid_argument, "EH threshold Q must be >= 0");
    require(eh_efficiency > 0.0 && eh_efficiency <= 1.0, ErrorCode::invalid_argument,
            "EH efficiency must lie in (0, 1]");
    require(crb_theta_threshold > 0.0 && crb_range_threshold > 0.0, ErrorCode::invalid_argument,
            "CRB thresholds must be positive");
    int targets = 0;
    for (const auto& e : eavesdroppers) {
      e.validate();
      if (!e.is_energy_receiver) ++targets;
    }
    require(targets <= 1, ErrorCode::invalid_argument, "at most one eavesdropper profile may be the target");
    target.validate();
  }

  /// Certified ball radius φ_k + δ_k per eavesdropper profile.
  std::vector<double> error_radii() const {
    std::vector<double> r;
    for (const auto& e : eavesdroppers) r.push_back(total_error_radius(geometry, e));
    return r;
  }

  int n_energy_receivers() const {
    int k = 0;
    for (const auto& e : eavesdroppers) k += e.is_energy_receiver ? 1 : 0;
    return k;
  }

  /// SINR of MRT at full power with no AN.
  double mrt_sinr() const { return power_budget * cu_channel.squaredNorm() / cu_noise; }
};

enum class Method { joint, separate, mrt, zf };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::joint: return "joint";
    case Method::separate: return "separate";
    case Method::mrt: return "mrt";
    case Method::zf: return "zf";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  if (s == "joint") return Method::joint;
  if (s == "separate") return Method::separate;
  if (s == "mrt") return Method::mrt;
  if (s == "zf") return Method::zf;
  throw Error(ErrorCode::invalid_argument, "unknown method '" + s + "'");
}

// ---------------------------------------------------------------------------
// Exact worst cases over a complex ball.

/// min over ‖x‖ ≤ ρ of xᴴAx + 2Re(bᴴx) for Hermitian A (trust-region subproblem,
/// including the hard case).
inline double ball_quadratic_min(const CMat& a, const CVec& b, double rho) {
  const int n = static_cast<int>(a.rows());
  if (rho <= 0.0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a));
  const Vec lam = es.eigenvalues();
  const CVec bt = es.eigenvectors().adjoint() * b;
  auto norm_at = [&](double mu) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = lam(i) + mu;
      s += std::norm(bt(i)) / (d * d);
    }
    return std::sqrt(s);
  };
  auto value_of = [&](const CVec& xt) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += lam(i) * std::norm(xt(i)) + 2.0 * (std::conj(bt(i)) * xt(i)).real();
    return v;
  };
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  const double lmin = lam(0);
  // Interior solution when A ≻ 0 and the unconstrained minimizer is inside.
  if (lmin > 1e-14 * scale && norm_at(0.0) <= rho) {
    CVec xt(n);
    for (int i = 0; i < n; ++i) xt(i) = -bt(i) / lam(i);
    return value_of(xt);
  }
  const double mu_lo = std::max(0.0, -lmin);
  // Hard case: b has (almost) no weight on the bottom eigenspace.
  double tail = 0.0;
  for (int i = 0; i < n; ++i)
    if (lam(i) - lmin <= 1e-12 * scale) tail += std::norm(bt(i));
  CVec xt = CVec::Zero(n);
  if (tail <= 1e-24 * std::max(1e-300, b.squaredNorm())) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      if (lam(i) - lmin > 1e-12 * scale) {
        xt(i) = -bt(i) / (lam(i) + mu_lo);
        s += std::norm(xt(i));
      }
    }
    if (s <= rho * rho) {
      int j = 0;
      xt(j) = std::sqrt(rho * rho - s);
      return value_of(xt);
    }
  }
  double lo = mu_lo;
  double hi = mu_lo + b.norm() / rho + 1e-300;
  while (norm_at(hi) > rho) hi = mu_lo + 2.0 * (hi - mu_lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (norm_at(mid) > rho) lo = mid; else hi = mid;
  }
  for (int i = 0; i < n; ++i) xt(i) = -bt(i) / (lam(i) + hi);
  return value_of(xt);
}

/// max over ‖Δ‖ ≤ ρ of (ĝ+Δ)ᴴS(ĝ+Δ).
inline double ball_quadratic_max(const CMat& s, const CVec& center, double rho) {
  const CVec b = -(s * center);
  return quad_form(s, center) - ball_quadratic_min(-s, b, rho);
}

/// min over ‖Δ‖ ≤ ρ of (ĝ+Δ)ᴴS(ĝ+Δ).
inline double ball_quadratic_min_value(const CMat& s, const CVec& center, double rho) {
  return quad_form(s, center) + ball_quadratic_min(s, s * center, rho);
}

/// Exact worst-case SINR over the ball by bisection on γ.
inline double worst_case_sinr(const CovariancePair& cov, const CVec& center, double rho, double noise) {
  const double hi_amp = center.norm() + rho;
  const double r0n = std::max(0.0, hermitian_eigenvalues(cov.r0).maxCoeff());
  double hi = r0n * hi_amp * hi_amp / noise * (1.0 + 1e-9) + 1e-300;
  double lo = 0.0;
  auto ok = [&](double g) { return ball_quadratic_max(cov.r0 - g * cov.r1, center, rho) <= g * noise; };
  if (ok(0.0)) return 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

inline double worst_case_harvested(const CovariancePair& cov, const CVec& center, double rho, double efficiency) {
  return efficiency * std::max(0.0, ball_quadratic_min_value(cov.total(), center, rho));
}

struct Certificate {
  std::vector<double> worst_sinr;       // per eavesdropper profile
  std::vector<double> worst_harvested;  // per ER (NaN for the target)
  std::vector<double> crb_theta;        // per target grid point
  std::vector<double> crb_range;
  double max_sinr = 0.0;
};

inline Certificate certify(const Scenario& sc, const CovariancePair& cov) {
  Certificate c;
  const auto radii = sc.error_radii();
  for (size_t k = 0; k < sc.eavesdroppers.size(); ++k) {
    const auto& e = sc.eavesdroppers[k];
    const CVec center = los_channel(sc.geometry, e.estimated_location);
    c.worst_sinr.push_back(worst_case_sinr(cov, center, radii[k], e.noise_power));
    c.max_sinr = std::max(c.max_sinr, c.worst_sinr.back());
    c.worst_harvested.push_back(e.is_energy_receiver
                                    ? worst_case_harvested(cov, center, radii[k], sc.eh_efficiency)
                                    : std::numeric_limits<double>::quiet_NaN());
  }
  const CMat r = cov.total();
  for (const auto& p : target_grid(sc.target)) {
    SensingTarget t = sc.target;
    t.angle = p.angle;
    t.range = p.range;
    c.crb_theta.push_back(crb_theta(sc.geometry, t, r));
    c.crb_range.push_back(crb_r(sc.geometry, t, r));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Normalized fixed-γ_R joint SDP.

namespace detail {

// R̂_i (normalized) = L V Lᴴ + ξ'·F; an empty lift means identity, an empty
// fixed part means zero, `variable = false` means no V.
struct CovarianceParam {
  bool variable = true;
  CMat lift;
  CMat fixed;
};

struct P4Model {
  sdp::SdpProblem problem;
  int v0 = -1;
  int v1 = -1;
  int xi = -1;
  std::vector<int> lambda;
  std::vector<double> lambda_scale;
  std::vector<int> eta;
  double objective_scale = 1.0;  // ‖h₀‖²
  CovarianceParam p0;
  CovarianceParam p1;
};

inline CMat lift_or_identity(const CovarianceParam& p, int n) {
  return p.lift.size() ? p.lift : CMat(CMat::Identity(n, n));
}

// Linear forms for Re/Im tr(G·R̂_i): the V part and the ξ' coefficient contributed by F.
inline void add_trace(sdp::LinearForm& re, sdp::LinearForm* im, const sdp::SdpProblem& prob, int var,
                      const CovarianceParam& p, int xi, int n, const CMat& g, double scale) {
  if (p.variable) {
    const CMat l = lift_or_identity(p, n);
    const CMat gl = l.adjoint() * g * l;
    re.add(prob.trace_form_real(var, gl, scale));
    if (im) im->add(prob.trace_form_imag(var, gl, scale));
  }
  if (p.fixed.size()) {
    const cplx t = (g * p.fixed).trace();
    re.add(xi, scale * t.real());
    if (im) im->add(xi, scale * t.imag());
  }
}

// Adds coeff·W R̂_i Wᴴ to a complex LMI.
inline void add_congruence(sdp::ComplexLmi& lmi, int var, const CovarianceParam& p, int xi, int n, const CMat& w,
                           double coeff) {
  if (p.variable) lmi.add_congruence(var, w * lift_or_identity(p, n), coeff);
  if (p.fixed.size()) {
    sdp::LinearForm f;
    f.add(xi, coeff);
    lmi.add_dense(f, w * p.fixed * w.adjoint());
  }
}

struct BuildFlags {
  bool eh = true;
  bool crb = true;
};

inline P4Model build_normalized(const Scenario& sc, double gamma, const CovarianceParam& p0,
                                const CovarianceParam& p1, const std::vector<double>& radii, BuildFlags flags) {
  const int n = sc.geometry.size();
  const double pw = sc.power_budget;
  P4Model m;
  m.p0 = p0;
  m.p1 = p1;
  auto& prob = m.problem;
  if (p0.variable) m.v0 = prob.add_matrix_var("R0", p0.lift.size() ? static_cast<int>(p0.lift.cols()) : n);
  if (p1.variable) m.v1 = prob.add_matrix_var("R1", p1.lift.size() ? static_cast<int>(p1.lift.cols()) : n);
  m.xi = prob.add_scalar_var("xi", 1e-10);

  const CVec h0 = sc.cu_channel * std::sqrt(pw / sc.cu_noise);
  m.objective_scale = h0.squaredNorm();
  const CMat h0h = h0 * h0.adjoint();

  sdp::LinearForm obj;
  add_trace(obj, nullptr, prob, m.v0, p0, m.xi, n, h0h, 1.0 / m.objective_scale);
  prob.set_objective(obj);

  sdp::LinearForm norm;
  add_trace(norm, nullptr, prob, m.v1, p1, m.xi, n, h0h, 1.0);
  norm.add(m.xi, 1.0);
  prob.add_equality("normalization", norm, 1.0);

  sdp::LinearForm power;
  add_trace(power, nullptr, prob, m.v0, p0, m.xi, n, CMat::Identity(n, n), 1.0);
  add_trace(power, nullptr, prob, m.v1, p1, m.xi, n, CMat::Identity(n, n), 1.0);
  power.add(m.xi, -1.0);
  prob.add_inequality("power", power, 0.0);

  for (size_t k = 0; k < sc.eavesdroppers.size(); ++k) {
    const auto& e = sc.eavesdroppers[k];
    const CVec g = los_channel(sc.geometry, e.estimated_location);
    const double gn = g.norm();
    const CVec u = g / gn;
    const double rho = radii[k] / gn;
    CMat w(n + 1, n);
    w.topRows(n) = CMat::Identity(n, n);
    w.row(n) = u.adjoint();
    CMat corner_i = CMat::Zero(n + 1, n + 1);
    corner_i.topLeftCorner(n, n) = CMat::Identity(n, n);
    corner_i(n, n) = -rho * rho;
    CMat corner = CMat::Zero(n + 1, n + 1);
    corner(n, n) = 1.0;

    // Worst-case SINR ≤ γ: [[λI − S, −Su], [−uᴴS, −λρ² − uᴴSu + γξ'/snr]] ⪰ 0, S = R̂₀ − γR̂₁.
    const double snr = pw * g.squaredNorm() / e.noise_power;
    const int lam = prob.add_scalar_var("lambda_" + std::to_string(e.index), 0.0);
    m.lambda.push_back(lam);
    sdp::ComplexLmi sinr("sinr_" + std::to_string(e.index), n + 1);
    // Divided through by 1 + γ for conditioning; λ is reported unscaled.
    const double sg = 1.0 / (1.0 + gamma);
    m.lambda_scale.push_back(1.0 + gamma);
    add_congruence(sinr, m.v0, p0, m.xi, n, w, -sg);
    add_congruence(sinr, m.v1, p1, m.xi, n, w, gamma * sg);
    sdp::LinearForm fl;
    fl.add(lam, 1.0);
    sinr.add_dense(fl, corner_i);
    sdp::LinearForm fx;
    fx.add(m.xi, gamma * sg / snr);
    sinr.add_dense(fx, corner);
    prob.add_lmi(sinr);

    if (flags.eh && e.is_energy_receiver && sc.eh_threshold > 0.0) {
      // Worst-case harvested power ≥ Q: [[ηI + T, Tu], [uᴴT, uᴴTu − ηρ² − ξ'Q/(ζP‖ĝ‖²)]] ⪰ 0.
      const int eta = prob.add_scalar_var("eta_" + std::to_string(e.index), 0.0);
      m.eta.push_back(eta);
      sdp::ComplexLmi eh("eh_" + std::to_string(e.index), n + 1);
      add_congruence(eh, m.v0, p0, m.xi, n, w, 1.0);
      add_congruence(eh, m.v1, p1, m.xi, n, w, 1.0);
      sdp::LinearForm fe;
      fe.add(eta, 1.0);
      eh.add_dense(fe, corner_i);
      sdp::LinearForm fq;
      fq.add(m.xi, -sc.eh_threshold / (sc.eh_efficiency * pw * g.squaredNorm()));
      eh.add_dense(fq, corner);
      prob.add_lmi(eh);
    } else {
      m.eta.push_back(-1);
    }
  }

  if (flags.crb) {
    const auto grid = target_grid(sc.target);
    for (size_t gi = 0; gi < grid.size(); ++gi) {
      for (const CrbParameter which : {CrbParameter::angle, CrbParameter::range}) {
        const double thr = which == CrbParameter::angle ? sc.crb_theta_threshold : sc.crb_range_threshold;
        if (!std::isfinite(thr)) continue;
        const CrbLmi c = crb_lmi(sc.geometry, sc.target, grid[gi], thr, which, true);
        const double s1 = 1.0 / std::sqrt(std::max(c.g11.trace().real(), 1e-300));
        const double s2 = 1.0 / std::sqrt(std::max(c.g22.trace().real(), 1e-300));
        sdp::LinearForm e11, e12r, e12i, e22;
        for (const auto* pp : {&p0, &p1}) {
          const int var = pp == &p0 ? m.v0 : m.v1;
          add_trace(e11, nullptr, prob, var, *pp, m.xi, n, c.g11, s1 * s1);
          add_trace(e12r, &e12i, prob, var, *pp, m.xi, n, c.g12, s1 * s2);
          add_trace(e22, nullptr, prob, var, *pp, m.xi, n, c.g22, s2 * s2);
        }
        e11.add(m.xi, -s1 * s1 * c.offset / pw);
        const std::string name = std::string(which == CrbParameter::angle ? "crb_theta_" : "crb_r_") +
                                 std::to_string(gi);
        sdp::ComplexLmi lmi(name, 2);
        Eigen::Matrix2cd b11 = Eigen::Matrix2cd::Zero(), b12r = Eigen::Matrix2cd::Zero(),
                         b12i = Eigen::Matrix2cd::Zero(), b22 = Eigen::Matrix2cd::Zero();
        b11(0, 0) = 1.0;
        b22(1, 1) = 1.0;
        b12r(0, 1) = b12r(1, 0) = 1.0;
        b12i(0, 1) = cplx(0.0, 1.0);
        b12i(1, 0) = cplx(0.0, -1.0);
        lmi.add_dense(e11, b11).add_dense(e12r, b12r).add_dense(e12i, b12i).add_dense(e22, b22);
        prob.add_lmi(lmi);
      }
    }
  }
  return m;
}

// Unscaled covariances R_i = P·R̂_i/ξ' from a solved model.
inline CovariancePair recover(const Scenario& sc, const P4Model& m, const sdp::SdpSolution& s) {
  const int n = sc.geometry.size();
  const double xi = s.y(m.xi);
  auto part = [&](const CovarianceParam& p, int var) {
    CMat r = CMat::Zero(n, n);
    if (p.variable) {
      const CMat l = lift_or_identity(p, n);
      r += l * s.matrices[var] * l.adjoint();
    }
    if (p.fixed.size()) r += xi * p.fixed;
    return CMat(hermitian_part(r) * (sc.power_budget / xi));
  };
  return {part(m.p0, m.v0), part(m.p1, m.v1)};
}

inline CMat orthonormal_complement(const CVec& g) {
  const int n = static_cast<int>(g.size());
  Eigen::HouseholderQR<CMat> qr(CMat(g / g.norm()));
  const CMat q = qr.householderQ() * CMat::Identity(n, n);
  return q.rightCols(n - 1);
}

}  // namespace detail

struct FixedGammaSolution {
  sdp::SdpStatus status = sdp::SdpStatus::numerical_failure;
  double gamma_r = 0.0;
  CMat r0_hat;  // ξ·R₀
  CMat r1_hat;  // ξ·R₁
  double xi = 0.0;
  std::vector<double> lambda;  // per eavesdropper profile
  std::vector<double> eta;     // per ER (NaN where no EH LMI)
  double objective = 0.0;      // g₀ᴴR̂₀g₀
  CovariancePair covariances;  // R⋆ = R̂/ξ
  int iterations = 0;
  double relative_gap = 0.0;
  std::string message;

  bool feasible() const { return status == sdp::SdpStatus::optimal; }
};

namespace detail {

inline FixedGammaSolution finish_fixed(const Scenario& sc, double gamma, const P4Model& m,
                                       const sdp::SdpSolution& s) {
  FixedGammaSolution out;
  out.status = s.status;
  out.gamma_r = gamma;
  out.iterations = s.iterations;
  out.relative_gap = s.relative_gap;
  out.message = s.message;
  if (!s.optimal()) return out;
  const double unit = sc.power_budget / sc.cu_noise;  // R̂ = unit·(normalized R̂)
  out.covariances = recover(sc, m, s);
  const double xi_n = s.y(m.xi);
  out.xi = xi_n / sc.cu_noise;
  out.r0_hat = out.covariances.r0 * out.xi;
  out.r1_hat = out.covariances.r1 * out.xi;
  out.objective = s.objective * m.objective_scale;
  for (size_t k = 0; k < m.lambda.size(); ++k) out.lambda.push_back(s.y(m.lambda[k]) * m.lambda_scale[k] * unit);
  for (int e : m.eta) out.eta.push_back(e >= 0 ? s.y(e) * unit : std::numeric_limits<double>::quiet_NaN());
  return out;
}

inline std::pair<CovarianceParam, CovarianceParam> method_params(const Scenario& sc, Method method,
                                                                 const CMat* fixed_r1) {
  CovarianceParam p0, p1;
  switch (method) {
    case Method::joint: break;
    case Method::mrt: p0.lift = CMat(sc.cu_channel / sc.cu_channel.norm()); break;
    case Method::zf: p1.lift = orthonormal_complement(sc.cu_channel); break;
    case Method::separate:
      require(fixed_r1 != nullptr, ErrorCode::invalid_argument, "separate design needs the stage-1 covariance");
      p1.variable = false;
      p1.fixed = *fixed_r1 / sc.power_budget;
      break;
  }
  return {p0, p1};
}

}  // namespace detail

/// Joint-design SDP at a fixed γ_R.
inline sdp::SdpProblem build_p4(const Scenario& sc, double gamma_r) {
  require(gamma_r > 0.0, ErrorCode::invalid_argument, "gamma_R must be positive");
  sc.validate();
  return detail::build_normalized(sc, gamma_r, {}, {}, sc.error_radii(), {}).problem;
}

inline FixedGammaSolution solve_fixed_gamma(const Scenario& sc, double gamma_r, double tol = 1e-8,
                                            Method method = Method::joint, const CMat* fixed_r1 = nullptr) {
  require(gamma_r > 0.0, ErrorCode::invalid_argument, "gamma_R must be positive");
  sc.validate();
  const auto [p0, p1] = detail::method_params(sc, method, fixed_r1);
  detail::BuildFlags flags;
  if (method == Method::separate) flags = {false, false};  // implied by R₁ from stage 1
  const auto m = detail::build_normalized(sc, gamma_r, p0, p1, sc.error_radii(), flags);
  const auto s = sdp::solve(m.problem, tol);
  return detail::finish_fixed(sc, gamma_r, m, s);
}

/// Proposition-style rank-one recovery: R₀* = R₀g gᴴR₀/(gᴴR₀g), R₁* = R₀ + R₁ − R₀*.
inline CovariancePair rank_one_reconstruct(const CMat& r0, const CMat& r1, const CVec& g0) {
  const CVec rg = r0 * g0;
  const double q = g0.dot(rg).real();
  const CMat total = r0 + r1;
  if (!(q > 1e-12 * std::abs(r0.trace().real()))) return {CMat::Zero(r0.rows(), r0.cols()), total};
  CMat r0s = rg * rg.adjoint() / q;
  r0s = hermitian_part(r0s);
  return {r0s, total - r0s};
}

struct SearchPoint {
  double gamma_r = 0.0;
  double rate = -std::numeric_limits<double>::infinity();
  std::string status;
};

struct BeamformerResult {
  Method method = Method::joint;
  CovariancePair covariances;
  double gamma_r = 0.0;       // certified worst-case eavesdropping SINR
  double enforced_gamma = 0.0;
  double cu_sinr = 0.0;
  double secrecy_rate = 0.0;
  std::vector<SearchPoint> trace;
  Certificate certificate;
  double stage1_power = std::numeric_limits<double>::quiet_NaN();  // separate design only
};

struct SearchOptions {
  double gamma_min = 1e-4;
  double gamma_max = 0.0;  // 0 selects the MRT SINR
  int n_points = 24;
  int golden_steps = 6;
  double tol = 1e-8;
};

inline double certified_secrecy_rate(const BeamformerResult& r) {
  return secrecy_rate(r.cu_sinr, r.gamma_r);
}

namespace detail {

struct Evaluated {
  bool ok = false;
  double rate = -std::numeric_limits<double>::infinity();
  CovariancePair cov;
  std::string status;
};

inline Evaluated evaluate_gamma(const Scenario& sc, Method method, double gamma, double tol, const CMat* fixed) {
  Evaluated e;
  FixedGammaSolution s;
  try {
    s = solve_fixed_gamma(sc, gamma, tol, method, fixed);
  } catch (const Error& err) {
    e.status = err.what();
    return e;
  }
  e.status = sdp::to_string(s.status);
  if (!s.feasible()) return e;
  e.cov = method == Method::mrt
              ? s.covariances
              : rank_one_reconstruct(s.covariances.r0, s.covariances.r1, sc.cu_channel);
  e.ok = true;
  e.rate = log2p1(cu_sinr(e.cov, sc.cu_channel, sc.cu_noise)) - log2p1(gamma);
  return e;
}

}  // namespace detail

/// Stage 1 of the separate design: least-power R₁ meeting the CRB and
/// worst-case EH constraints with R₀ = 0.
inline CMat separate_stage1(const Scenario& sc, double tol = 1e-8) {
  sc.validate();
  const int n = sc.geometry.size();
  const double pw = sc.power_budget;
  const auto radii = sc.error_radii();
  sdp::SdpProblem prob;
  const int v = prob.add_matrix_var("R1", n);
  prob.set_objective(prob.trace_form_real(v, CMat::Identity(n, n), -1.0));
  for (size_t k = 0; k < sc.eavesdroppers.size(); ++k) {
    const auto& e = sc.eavesdroppers[k];
    if (!e.is_energy_receiver || sc.eh_threshold <= 0.0) continue;
    const CVec g = los_channel(sc.geometry, e.estimated_location);
    const double gn = g.norm();
    const double rho = radii[k] / gn;
    CMat w(n + 1, n);
    w.topRows(n) = CMat::Identity(n, n);
    w.row(n) = (g / gn).adjoint();
    CMat ci = CMat::Zero(n + 1, n + 1);
    ci.topLeftCorner(n, n) = CMat::Identity(n, n);
    ci(n, n) = -rho * rho;
    CMat corner = CMat::Zero(n + 1, n + 1);
    corner(n, n) = -sc.eh_threshold / (sc.eh_efficiency * pw * g.squaredNorm());
    const int eta = prob.add_scalar_var("eta_" + std::to_string(e.index), 0.0);
    sdp::ComplexLmi eh("eh_" + std::to_string(e.index), n + 1);
    eh.add_congruence(v, w, 1.0);
    sdp::LinearForm fe;
    fe.add(eta, 1.0);
    eh.add_dense(fe, ci);
    eh.add_constant(corner);
    prob.add_lmi(eh);
  }
  const auto grid = target_grid(sc.target);
  for (size_t gi = 0; gi < grid.size(); ++gi) {
    for (const CrbParameter which : {CrbParameter::angle, CrbParameter::range}) {
      const double thr = which == CrbParameter::angle ? sc.crb_theta_threshold : sc.crb_range_threshold;
      if (!std::isfinite(thr)) continue;
      const CrbLmi c = crb_lmi(sc.geometry, sc.target, grid[gi], thr, which, false);
      const double s1 = 1.0 / std::sqrt(std::max(c.g11.trace().real(), 1e-300));
      const double s2 = 1.0 / std::sqrt(std::max(c.g22.trace().real(), 1e-300));
      sdp::ComplexLmi lmi("crb_" + std::to_string(gi), 2);
      Eigen::Matrix2cd b11 = Eigen::Matrix2cd::Zero(), b12r = Eigen::Matrix2cd::Zero(),
                       b12i = Eigen::Matrix2cd::Zero(), b22 = Eigen::Matrix2cd::Zero();
      b11(0, 0) = 1.0;
      b22(1, 1) = 1.0;
      b12r(0, 1) = b12r(1, 0) = 1.0;
      b12i(0, 1) = cplx(0.0, 1.0);
      b12i(1, 0) = cplx(0.0, -1.0);
      lmi.add_dense(prob.trace_form_real(v, c.g11, s1 * s1), b11);
      lmi.add_dense(prob.trace_form_real(v, c.g12, s1 * s2), b12r);
      lmi.add_dense(prob.trace_form_imag(v, c.g12, s1 * s2), b12i);
      lmi.add_dense(prob.trace_form_real(v, c.g22, s2 * s2), b22);
      lmi.add_constant(-s1 * s1 * c.offset / pw * b11);
      prob.add_lmi(lmi);
    }
  }
  if (prob.lmis().empty()) return CMat::Zero(n, n);
  const auto s = sdp::solve(prob, tol);
  require(s.status != sdp::SdpStatus::infeasible, ErrorCode::infeasible, "separate design: stage 1 infeasible");
  require(s.optimal(), ErrorCode::numerical_failure, "separate design: stage 1 failed (" + s.message + ")");
  const CMat r1 = hermitian_part(s.matrices[v]) * pw;
  require(r1.trace().real() <= pw * (1.0 + 1e-9), ErrorCode::infeasible,
          "separate design: stage-1 power exceeds P");
  return r1;
}

/// Log-spaced grid over γ_R, then one golden-section pass around the best node.
inline BeamformerResult one_d_search(const Scenario& sc, Method method = Method::joint, SearchOptions opt = {}) {
  sc.validate();
  require(opt.n_points >= 2, ErrorCode::invalid_argument, "search needs at least 2 points");
  const double gmax = opt.gamma_max > 0.0 ? opt.gamma_max : sc.mrt_sinr();
  require(opt.gamma_min > 0.0 && gmax > opt.gamma_min, ErrorCode::invalid_argument, "invalid gamma range");

  BeamformerResult res;
  res.method = method;
  CMat stage1;
  const CMat* fixed = nullptr;
  if (method == Method::separate) {
    stage1 = separate_stage1(sc, opt.tol);
    res.stage1_power = stage1.trace().real();
    fixed = &stage1;
  }

  std::vector<double> grid(opt.n_points);
  const double l0 = std::log(opt.gamma_min);
  const double l1 = std::log(gmax);
  for (int i = 0; i < opt.n_points; ++i) grid[i] = std::exp(l0 + (l1 - l0) * i / (opt.n_points - 1));

  int best = -1;
  detail::Evaluated best_eval;
  double best_gamma = 0.0;
  for (int i = 0; i < opt.n_points; ++i) {
    auto e = detail::evaluate_gamma(sc, method, grid[i], opt.tol, fixed);
    res.trace.push_back({grid[i], e.rate, e.status});
    if (e.ok && (best < 0 || e.rate > best_eval.rate)) {
      best = i;
      best_eval = e;
      best_gamma = grid[i];
    }
  }
  require(best >= 0, ErrorCode::all_infeasible, std::string(to_string(method)) + ": no feasible gamma_R in range");

  // Golden section on log γ between the neighbours of the best node.
  double a = std::log(grid[std::max(0, best - 1)]);
  double b = std::log(grid[std::min(opt.n_points - 1, best + 1)]);
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval_log = [&](double lg) {
    auto e = detail::evaluate_gamma(sc, method, std::exp(lg), opt.tol, fixed);
    res.trace.push_back({std::exp(lg), e.rate, e.status});
    if (e.ok && e.rate > best_eval.rate) {
      best_eval = e;
      best_gamma = std::exp(lg);
    }
    return e.rate;
  };
  if (opt.golden_steps > 0 && b > a) {
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = eval_log(c);
    double fd = eval_log(d);
    for (int it = 2; it < opt.golden_steps; ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = eval_log(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = eval_log(d);
      }
    }
  }

  res.covariances = best_eval.cov;
  res.enforced_gamma = best_gamma;
  res.certificate = certify(sc, res.covariances);
  res.gamma_r = std::max(best_gamma, res.certificate.max_sinr);
  res.cu_sinr = cu_sinr(res.covariances, sc.cu_channel, sc.cu_noise);
  res.secrecy_rate = certified_secrecy_rate(res);
  return res;
}

inline BeamformerResult benchmark_separate(const Scenario& sc, SearchOptions opt = {}) {
  return one_d_search(sc, Method::separate, opt);
}

inline BeamformerResult benchmark_mrt(const Scenario& sc, SearchOptions opt = {}) {
  return one_d_search(sc, Method::mrt, opt);
}

inline BeamformerResult benchmark_zf(const Scenario& sc, SearchOptions opt = {}) {
  return one_d_search(sc, Method::zf, opt);
}

}  // namespace nfsec
