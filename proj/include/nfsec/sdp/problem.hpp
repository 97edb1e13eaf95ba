#pragma once

// Conic program in the form
//   maximize  cᵀy + c₀
//   s.t.      C_b + Σ_terms (affine in y) ⪰ 0      for every LMI block b
//             f_iᵀy = e_i,  g_jᵀy ≤ h_j
// where y stacks the real coordinates of Hermitian matrix variables (each
// implicitly PSD unless declared otherwise) and scalar variables.

#include <optional>
#include <string>
#include <vector>

#include "nfsec/sdp/embed.hpp"

namespace nfsec::sdp {

struct Term {
  int index = 0;
  double coeff = 0.0;
  bool operator==(const Term&) const = default;
};

struct LinearForm {
  std::vector<Term> terms;
  double constant = 0.0;

  LinearForm& add(int index, double coeff) {
    if (coeff != 0.0) terms.push_back({index, coeff});
    return *this;
  }
  LinearForm& add(const LinearForm& other, double scale = 1.0) {
    for (const auto& t : other.terms) add(t.index, scale * t.coeff);
    constant += scale * other.constant;
    return *this;
  }
  double evaluate(const Vec& y) const {
    double s = constant;
    for (const auto& t : terms) s += t.coeff * y(t.index);
    return s;
  }
  bool operator==(const LinearForm&) const = default;
};

inline bool same_matrix(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

struct MatrixVar {
  std::string name;
  int dim = 0;
  int offset = 0;
  bool psd = true;
  int n_params() const { return dim * dim; }
  bool operator==(const MatrixVar&) const = default;
};

struct ScalarVar {
  std::string name;
  int offset = 0;
  std::optional<double> lower;
  bool operator==(const ScalarVar&) const = default;
};

/// coeff · T · embed(V) · Tᵀ with T of size m × 2·dim(V).
struct CongruenceTerm {
  int var = 0;
  Mat map;
  double coeff = 1.0;
  bool operator==(const CongruenceTerm& o) const {
    return var == o.var && coeff == o.coeff && same_matrix(map, o.map);
  }
};

/// (f·y) · B with B symmetric m × m. The constant of f is folded into the LMI constant.
struct DenseTerm {
  LinearForm form;
  Mat basis;
  bool operator==(const DenseTerm& o) const { return form == o.form && same_matrix(basis, o.basis); }
};

struct Lmi {
  std::string name;
  int dim = 0;
  Mat constant;
  std::vector<CongruenceTerm> congruences;
  std::vector<DenseTerm> dense;
  bool operator==(const Lmi& o) const {
    return name == o.name && dim == o.dim && same_matrix(constant, o.constant) && congruences == o.congruences &&
           dense == o.dense;
  }
};

struct LinearConstraint {
  std::string name;
  LinearForm form;
  double rhs = 0.0;
  bool operator==(const LinearConstraint&) const = default;
};

/// Hermitian-valued LMI assembled in complex form; converted to its real
/// embedding on insertion.
class ComplexLmi {
 public:
  ComplexLmi(std::string name, int dim) : name_(std::move(name)), dim_(dim), constant_(CMat::Zero(dim, dim)) {}

  ComplexLmi& add_constant(const CMat& c) {
    constant_ += c;
    return *this;
  }
  /// coeff · L V Lᴴ with L of size dim × dim(V).
  ComplexLmi& add_congruence(int var, const CMat& l, double coeff = 1.0) {
    congruences_.push_back({var, embed_map(l), coeff});
    return *this;
  }
  ComplexLmi& add_dense(const LinearForm& f, const CMat& b) {
    dense_.push_back({f, b});
    return *this;
  }

  Lmi to_real() const {
    Lmi out;
    out.name = name_;
    out.dim = 2 * dim_;
    out.constant = embed_complex(hermitian_part(constant_));
    out.congruences = congruences_;
    for (const auto& [f, b] : dense_) {
      const Mat e = embed_complex(b);
      out.constant += f.constant * e;
      LinearForm g = f;
      g.constant = 0.0;
      out.dense.push_back({g, e});
    }
    return out;
  }

 private:
  std::string name_;
  int dim_;
  CMat constant_;
  std::vector<CongruenceTerm> congruences_;
  std::vector<std::pair<LinearForm, CMat>> dense_;
};

class SdpProblem {
 public:
  int add_matrix_var(const std::string& name, int dim, bool psd = true) {
    require(dim >= 1, ErrorCode::invalid_argument, "matrix variable needs dim >= 1");
    matrix_vars_.push_back({name, dim, n_vars_, psd});
    n_vars_ += dim * dim;
    return static_cast<int>(matrix_vars_.size()) - 1;
  }

  /// Returns the coordinate index of the new scalar.
  int add_scalar_var(const std::string& name, std::optional<double> lower = std::nullopt) {
    scalar_vars_.push_back({name, n_vars_, lower});
    return n_vars_++;
  }

  void add_lmi(const Lmi& lmi) { lmis_.push_back(lmi); }
  void add_lmi(const ComplexLmi& lmi) { lmis_.push_back(lmi.to_real()); }

  void add_equality(const std::string& name, const LinearForm& f, double rhs) {
    equalities_.push_back({name, f, rhs});
  }
  /// f·y ≤ rhs.
  void add_inequality(const std::string& name, const LinearForm& f, double rhs) {
    inequalities_.push_back({name, f, rhs});
  }

  void set_objective(const LinearForm& f) { objective_ = f; }

  /// Re tr(G V) and Im tr(G V) as linear forms over the coordinates of V.
  LinearForm trace_form_real(int var, const CMat& g, double scale = 1.0) const {
    return trace_form(var, g, scale, false);
  }
  LinearForm trace_form_imag(int var, const CMat& g, double scale = 1.0) const {
    return trace_form(var, g, scale, true);
  }

  CMat matrix_value(int var, const Vec& y) const {
    const auto& mv = matrix_vars_.at(var);
    return hermitian_from_params(y.data() + mv.offset, mv.dim);
  }

  Mat evaluate_lmi(const Lmi& lmi, const Vec& y) const {
    Mat z = lmi.constant;
    for (const auto& t : lmi.congruences) {
      z += t.coeff * t.map * embed_complex(matrix_value(t.var, y)) * t.map.transpose();
    }
    for (const auto& d : lmi.dense) z += d.form.evaluate(y) * d.basis;
    return z;
  }

  void validate() const {
    for (const auto& lmi : lmis_) {
      require(lmi.constant.rows() == lmi.dim && lmi.constant.cols() == lmi.dim, ErrorCode::invalid_argument,
              "LMI " + lmi.name + ": constant has wrong size");
      for (const auto& t : lmi.congruences) {
        require(t.var >= 0 && t.var < static_cast<int>(matrix_vars_.size()), ErrorCode::invalid_argument,
                "LMI " + lmi.name + ": unknown matrix variable");
        require(t.map.rows() == lmi.dim && t.map.cols() == 2 * matrix_vars_[t.var].dim,
                ErrorCode::invalid_argument, "LMI " + lmi.name + ": congruence map has wrong size");
      }
      for (const auto& d : lmi.dense) {
        require(d.basis.rows() == lmi.dim && d.basis.cols() == lmi.dim, ErrorCode::invalid_argument,
                "LMI " + lmi.name + ": dense basis has wrong size");
        check_form(d.form);
      }
    }
    for (const auto& c : equalities_) check_form(c.form);
    for (const auto& c : inequalities_) check_form(c.form);
    check_form(objective_);
  }

  int n_vars() const { return n_vars_; }
  const std::vector<MatrixVar>& matrix_vars() const { return matrix_vars_; }
  const std::vector<ScalarVar>& scalar_vars() const { return scalar_vars_; }
  const std::vector<Lmi>& lmis() const { return lmis_; }
  const std::vector<LinearConstraint>& equalities() const { return equalities_; }
  const std::vector<LinearConstraint>& inequalities() const { return inequalities_; }
  const LinearForm& objective() const { return objective_; }

  bool operator==(const SdpProblem&) const = default;

  // Raw setters used by the deserializer.
  void restore(int n_vars, std::vector<MatrixVar> mv, std::vector<ScalarVar> sv, std::vector<Lmi> lmis,
               std::vector<LinearConstraint> eqs, std::vector<LinearConstraint> ineqs, LinearForm obj) {
    n_vars_ = n_vars;
    matrix_vars_ = std::move(mv);
    scalar_vars_ = std::move(sv);
    lmis_ = std::move(lmis);
    equalities_ = std::move(eqs);
    inequalities_ = std::move(ineqs);
    objective_ = std::move(obj);
    validate();
  }

 private:
  LinearForm trace_form(int var, const CMat& g, double scale, bool imag) const {
    const auto& mv = matrix_vars_.at(var);
    require(g.rows() == mv.dim && g.cols() == mv.dim, ErrorCode::invalid_argument, "trace form size mismatch");
    const CVec c = trace_coefficients(g);
    LinearForm f;
    for (int p = 0; p < mv.n_params(); ++p) f.add(mv.offset + p, scale * (imag ? c(p).imag() : c(p).real()));
    return f;
  }

  void check_form(const LinearForm& f) const {
    for (const auto& t : f.terms)
      require(t.index >= 0 && t.index < n_vars_, ErrorCode::invalid_argument, "linear form index out of range");
  }

  int n_vars_ = 0;
  std::vector<MatrixVar> matrix_vars_;
  std::vector<ScalarVar> scalar_vars_;
  std::vector<Lmi> lmis_;
  std::vector<LinearConstraint> equalities_;
  std::vector<LinearConstraint> inequalities_;
  LinearForm objective_;
};

}  // namespace nfsec::sdp
