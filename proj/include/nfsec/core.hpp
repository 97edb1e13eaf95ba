#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace nfsec {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
  invalid_argument,
  index_out_of_range,
  degenerate_point,
  bound_blowup,
  negative_radicand,
  unidentifiable,
  rank_deficient,
  infeasible,
  numerical_failure,
  all_infeasible,
  config,
  io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::degenerate_point: return "degenerate-point";
    case ErrorCode::bound_blowup: return "bound-blowup";
    case ErrorCode::negative_radicand: return "negative-radicand";
    case ErrorCode::unidentifiable: return "unidentifiable";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::all_infeasible: return "all-infeasible";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

inline double log2p1(double x) { return std::log2(1.0 + x); }

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Re(xᴴ A x) for Hermitian A.
inline double quad_form(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }

inline CMat hermitian_part(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline bool is_hermitian(const CMat& a, double tol = 1e-9) {
  if (a.rows() != a.cols()) return false;
  const double scale = 1.0 + a.norm();
  return (a - a.adjoint()).norm() <= tol * scale;
}

inline Vec hermitian_eigenvalues(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const CMat& a) { return hermitian_eigenvalues(a)(0); }

}  // namespace nfsec
