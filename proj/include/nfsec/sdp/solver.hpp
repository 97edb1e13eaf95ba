#pragma once

// Infeasible primal-dual interior-point method (HKM direction, Mehrotra
// predictor-corrector) for SdpProblem.
//
// Blocks whose data is the real embedding of a complex LMI are solved in
// complex Hermitian form at half the size; other blocks are carried as
// Hermitian matrices with real data. With Z_b = C_b + A_b(y) the problem is
//   max cᵀy  s.t.  Z ⪰ 0,  Ey = e,
// its companion is  min <C,X> + eᵀw  s.t.  A*(X) − Eᵀw = −c, X ⪰ 0, and the
// duality gap is Σ_b Re tr(X_b Z_b).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nfsec/sdp/problem.hpp"

namespace nfsec::sdp {

enum class SdpStatus { optimal, infeasible, numerical_failure };

inline const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 100;
  double step_fraction = 0.98;
  bool verbose = false;
  // On breakdown, the best iterate is accepted when all measures are below this.
  double fallback_tol = 1e-6;
  // Stop once the best iterate meets fallback_tol and has not improved for this many iterations.
  int patience = 6;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  Vec y;
  std::vector<CMat> matrices;   // one per matrix variable
  std::vector<double> scalars;  // one per scalar variable
  double objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;           // Σ <X_b, Z_b>
  double relative_gap = 0.0;  // |pobj − dobj| / (1 + |pobj| + |dobj|)
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  int iterations = 0;
  std::string message;
  std::vector<CMat> lmi_duals;  // X for each user LMI (complex form when detected)

  bool optimal() const { return status == SdpStatus::optimal; }
};

namespace detail {

// Coordinate index of Re/Im of entry (a, b), a < b, inside an n×n Hermitian variable.
struct ParamIndex {
  int n;
  std::vector<int> re;
  std::vector<int> im;
  explicit ParamIndex(int dim) : n(dim), re(dim * dim, -1), im(dim * dim, -1) {
    int k = 0;
    const int m = n * (n - 1) / 2;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b, ++k) {
        re[a * n + b] = n + k;
        im[a * n + b] = n + m + k;
      }
  }
};

struct CongTerm {
  int offset = 0;
  int n = 0;
  bool identity = true;
  CMat l;  // m × n when not identity
  double coeff = 1.0;
  const ParamIndex* idx = nullptr;
};

struct DenseTermC {
  std::vector<Term> form;
  CMat b;
};

struct Block {
  int dim = 0;
  CMat c;
  std::vector<CongTerm> cong;
  std::vector<DenseTermC> dense;
  int source = -1;  // user LMI index, or −1 for implicit blocks
  int group = -1;   // dense-support group
  int group_row = 0;
};

// Blocks whose dense forms share one support are assembled with one GEMM.
struct DenseGroup {
  std::vector<int> support;
  Mat f;  // stacked (Σ K_b) × |support|
  std::vector<int> blocks;
};

inline bool is_embedding(const Mat& m) {
  if (m.rows() % 2 || m.cols() % 2) return false;
  const Index r = m.rows() / 2, c = m.cols() / 2;
  const double tol = 1e-14 * (1.0 + m.cwiseAbs().maxCoeff());
  return (m.topLeftCorner(r, c) - m.bottomRightCorner(r, c)).cwiseAbs().maxCoeff() <= tol &&
         (m.topRightCorner(r, c) + m.bottomLeftCorner(r, c)).cwiseAbs().maxCoeff() <= tol;
}

inline CMat complex_part(const Mat& m) {
  const Index r = m.rows() / 2, c = m.cols() / 2;
  CMat out(r, c);
  out.real() = m.topLeftCorner(r, c);
  out.imag() = m.bottomLeftCorner(r, c);
  return out;
}

inline CMat herm(const CMat& a) { return 0.5 * (a + a.adjoint()); }

inline double re_inner(const CMat& a, const CMat& b) {
  // Re tr(A B) for Hermitian A, B.
  return (a.real().array() * b.real().array()).sum() + (a.imag().array() * b.imag().array()).sum();
}

// out[p] += scale · Re tr(H_p G).
inline void add_traces(const CMat& g, const CongTerm& t, double scale, double* out) {
  const int n = t.n;
  for (int a = 0; a < n; ++a) out[a] += scale * g(a, a).real();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      out[t.idx->re[a * n + b]] += scale * (g(a, b).real() + g(b, a).real());
      out[t.idx->im[a * n + b]] += scale * (g(a, b).imag() - g(b, a).imag());
    }
}

inline CMat param_matrix(const Vec& y, const CongTerm& t) { return hermitian_from_params(y.data() + t.offset, t.n); }

inline CMat block_value(const Block& b, const Vec& y, bool with_constant) {
  CMat z = with_constant ? b.c : CMat(CMat::Zero(b.dim, b.dim));
  for (const auto& t : b.cong) {
    const CMat v = param_matrix(y, t);
    if (t.identity) z += t.coeff * v;
    else z += t.coeff * (t.l * v * t.l.adjoint());
  }
  for (const auto& d : b.dense) {
    double s = 0.0;
    for (const auto& tm : d.form) s += tm.coeff * y(tm.index);
    if (s != 0.0) z += s * d.b;
  }
  return z;
}

inline void block_adjoint(const Block& b, const CMat& w, Vec& out) {
  for (const auto& t : b.cong) {
    if (t.identity) add_traces(w, t, t.coeff, out.data() + t.offset);
    else add_traces(t.l.adjoint() * w * t.l, t, t.coeff, out.data() + t.offset);
  }
  for (const auto& d : b.dense) {
    const double tr = re_inner(d.b, w);
    for (const auto& tm : d.form) out(tm.index) += tm.coeff * tr;
  }
}

// M[p_a, q_c] += cc · Re tr(H_p P H_q Q) with P = L_aᴴ X L_c, Q = L_cᴴ Z⁻¹ L_a.
inline void cong_pair(const CMat& p, const CMat& q, const CongTerm& ta, const CongTerm& tc, double cc, Mat& m) {
  const int na = ta.n, nc = tc.n;
  const int oa = ta.offset, oc = tc.offset;
  const int* rea = ta.idx->re.data();
  const int* ima = ta.idx->im.data();
  const int* rec = tc.idx->re.data();
  const int* imc = tc.idx->im.data();
  for (int a = 0; a < na; ++a) {
    for (int b = a; b < na; ++b) {
      const bool pd = a == b;
      const int pre = pd ? oa + a : oa + rea[a * na + b];
      const int pim = pd ? -1 : oa + ima[a * na + b];
      for (int c = 0; c < nc; ++c) {
        // d == c
        {
          const cplx t1 = p(b, c) * q(c, a);
          if (pd) {
            m(pre, oc + c) += cc * t1.real();
          } else {
            const cplx t3 = p(a, c) * q(c, b);
            m(pre, oc + c) += cc * (t1 + t3).real();
            m(pim, oc + c) += cc * (t3.imag() - t1.imag());
          }
        }
        for (int d = c + 1; d < nc; ++d) {
          const int qre = oc + rec[c * nc + d];
          const int qim = oc + imc[c * nc + d];
          if (pd) {
            const cplx t1 = p(a, c) * q(d, a);
            const cplx t2 = p(a, d) * q(c, a);
            m(pre, qre) += cc * (t1 + t2).real();
            m(pre, qim) += cc * (t2.imag() - t1.imag());
          } else {
            const cplx t1 = p(b, c) * q(d, a);
            const cplx t2 = p(b, d) * q(c, a);
            const cplx t3 = p(a, c) * q(d, b);
            const cplx t4 = p(a, d) * q(c, b);
            m(pre, qre) += cc * (t1 + t2 + t3 + t4).real();
            m(pre, qim) += cc * -(t1 - t2 + t3 - t4).imag();
            m(pim, qre) += cc * -(t1 + t2 - t3 - t4).imag();
            m(pim, qim) += cc * (-t1 + t2 + t3 - t4).real();
          }
        }
      }
    }
  }
}

// Congruence-congruence and congruence-dense parts of the Schur complement.
inline void block_schur(const Block& b, const CMat& x, const CMat& zi, Mat& m) {
  const int nc = static_cast<int>(b.cong.size());
  std::vector<CMat> xl(nc), zl(nc);
  for (int a = 0; a < nc; ++a) {
    xl[a] = b.cong[a].identity ? x : CMat(x * b.cong[a].l);
    zl[a] = b.cong[a].identity ? zi : CMat(zi * b.cong[a].l);
  }
  for (int a = 0; a < nc; ++a) {
    const CongTerm& ta = b.cong[a];
    for (int c = 0; c < nc; ++c) {
      const CongTerm& tc = b.cong[c];
      const CMat p = ta.identity ? xl[c] : CMat(ta.l.adjoint() * xl[c]);
      const CMat q = tc.identity ? zl[a] : CMat(tc.l.adjoint() * zl[a]);
      cong_pair(p, q, ta, tc, ta.coeff * tc.coeff, m);
    }
  }
  if (nc == 0 || b.dense.empty()) return;
  std::vector<double> h;
  for (const auto& d : b.dense) {
    const CMat xbz = x * d.b * zi;
    for (int a = 0; a < nc; ++a) {
      const CongTerm& ta = b.cong[a];
      const CMat g = ta.identity ? xbz : CMat(ta.l.adjoint() * xbz * ta.l);
      h.assign(static_cast<size_t>(ta.n) * ta.n, 0.0);
      add_traces(g, ta, ta.coeff, h.data());
      for (const auto& tm : d.form) {
        for (int pp = 0; pp < ta.n * ta.n; ++pp) {
          const double v = h[pp] * tm.coeff;
          m(ta.offset + pp, tm.index) += v;
          m(tm.index, ta.offset + pp) += v;
        }
      }
    }
  }
}

// Dense-dense coupling matrix S_kl = Re tr(B_k X B_l Z⁻¹).
inline Mat dense_coupling(const Block& b, const CMat& x, const CMat& zi) {
  const int nd = static_cast<int>(b.dense.size());
  Mat s(nd, nd);
  if (b.dim == 1) {
    const double xz = x(0, 0).real() * zi(0, 0).real();
    for (int k = 0; k < nd; ++k)
      for (int l = 0; l < nd; ++l) s(k, l) = (b.dense[k].b(0, 0) * b.dense[l].b(0, 0)).real() * xz;
    return s;
  }
  std::vector<CMat> bx(nd), bz(nd);
  for (int k = 0; k < nd; ++k) {
    bx[k] = b.dense[k].b * x;
    bz[k] = b.dense[k].b * zi;
  }
  for (int k = 0; k < nd; ++k)
    for (int l = k; l < nd; ++l) {
      // Re tr(BX_k · BZ_l) = Re Σ_ij BX_k(i,j) BZ_l(j,i)
      const double v = (bx[k].array() * bz[l].transpose().array()).sum().real();
      s(k, l) = v;
      s(l, k) = v;
    }
  return s;
}

// Largest step α ≤ 1 (damped by `fraction`) keeping S + α dS ⪰ 0; 0 when S is not PD.
inline double max_step(const CMat& s, const CMat& ds, double fraction) {
  if (s.rows() == 1) {
    const double sv = s(0, 0).real(), dv = ds(0, 0).real();
    if (sv <= 0.0) return 0.0;
    return dv >= 0.0 ? 1.0 : std::min(1.0, fraction * sv / -dv);
  }
  Eigen::LLT<CMat> llt(s);
  if (llt.info() != Eigen::Success) return 0.0;
  const CMat t = llt.matrixL().solve(ds);
  const CMat w = llt.matrixL().solve(t.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(herm(w), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, fraction / -lmin);
}

inline CMat inverse_hpd(const CMat& s, bool& ok) {
  if (s.rows() == 1) {
    ok = s(0, 0).real() > 0.0;
    return CMat::Constant(1, 1, ok ? 1.0 / s(0, 0).real() : 1.0);
  }
  Eigen::LLT<CMat> llt(s);
  ok = llt.info() == Eigen::Success;
  if (!ok) return CMat::Identity(s.rows(), s.cols());
  return herm(llt.solve(CMat::Identity(s.rows(), s.cols())));
}

}  // namespace detail

class InteriorPointSolver {
 public:
  explicit InteriorPointSolver(const SdpProblem& problem, SolverOptions options = {})
      : prob_(problem), opt_(options) {
    prob_.validate();
    compile();
  }

  SdpSolution solve();

 private:
  const detail::ParamIndex* index_for(int n) {
    auto it = indices_.find(n);
    if (it == indices_.end()) it = indices_.emplace(n, std::make_unique<detail::ParamIndex>(n)).first;
    return it->second.get();
  }

  detail::CongTerm identity_term(int offset, int n, double coeff) {
    detail::CongTerm t;
    t.offset = offset;
    t.n = n;
    t.coeff = coeff;
    t.idx = index_for(n);
    return t;
  }

  detail::Block compile_lmi(const Lmi& l) {
    using namespace detail;
    Block b;
    bool structured = detail::is_embedding(l.constant);
    for (const auto& t : l.congruences) structured = structured && detail::is_embedding(t.map);
    for (const auto& d : l.dense) structured = structured && detail::is_embedding(d.basis);
    const Mat c_sym = 0.5 * (l.constant + l.constant.transpose());
    if (structured) {
      b.dim = l.dim / 2;
      b.c = herm(complex_part(c_sym));
      for (const auto& t : l.congruences) {
        const auto& mv = prob_.matrix_vars()[t.var];
        CongTerm ct = identity_term(mv.offset, mv.dim, t.coeff);
        ct.identity = false;
        ct.l = complex_part(t.map);
        b.cong.push_back(std::move(ct));
      }
      for (const auto& d : l.dense) {
        const CMat bc = herm(complex_part(0.5 * (d.basis + d.basis.transpose())));
        b.dense.push_back({d.form.terms, bc});
        if (d.form.constant != 0.0) b.c += d.form.constant * bc;
      }
    } else {
      // Real data; congruences are expanded into one dense term per coordinate.
      b.dim = l.dim;
      b.c = c_sym.cast<cplx>();
      for (const auto& t : l.congruences) {
        const auto& mv = prob_.matrix_vars()[t.var];
        const auto basis = hermitian_basis(mv.dim);
        for (int p = 0; p < mv.n_params(); ++p) {
          Mat e = Mat::Zero(2 * mv.dim, 2 * mv.dim);
          for (const auto& en : basis[p]) e(en.row, en.col) = en.value;
          const Mat bp = t.coeff * t.map * e * t.map.transpose();
          b.dense.push_back({{{mv.offset + p, 1.0}}, (0.5 * (bp + bp.transpose())).cast<cplx>()});
        }
      }
      for (const auto& d : l.dense) {
        const Mat bs = 0.5 * (d.basis + d.basis.transpose());
        b.dense.push_back({d.form.terms, bs.cast<cplx>()});
        if (d.form.constant != 0.0) b.c += d.form.constant * bs.cast<cplx>();
      }
    }
    return b;
  }

  void compile() {
    using namespace detail;
    nv_ = prob_.n_vars();
    for (const auto& mv : prob_.matrix_vars()) {
      if (!mv.psd) continue;
      Block b;
      b.dim = mv.dim;
      b.c = CMat::Zero(b.dim, b.dim);
      b.cong.push_back(identity_term(mv.offset, mv.dim, 1.0));
      blocks_.push_back(std::move(b));
    }
    for (const auto& sv : prob_.scalar_vars()) {
      if (!sv.lower) continue;
      Block b;
      b.dim = 1;
      b.c = CMat::Constant(1, 1, -*sv.lower);
      b.dense.push_back({{{sv.offset, 1.0}}, CMat::Ones(1, 1)});
      blocks_.push_back(std::move(b));
    }
    for (const auto& ineq : prob_.inequalities()) {
      Block b;
      b.dim = 1;
      b.c = CMat::Constant(1, 1, ineq.rhs - ineq.form.constant);
      std::vector<Term> f;
      for (const auto& t : ineq.form.terms) f.push_back({t.index, -t.coeff});
      b.dense.push_back({f, CMat::Ones(1, 1)});
      blocks_.push_back(std::move(b));
    }
    const auto& lmis = prob_.lmis();
    for (size_t i = 0; i < lmis.size(); ++i) {
      Block b = compile_lmi(lmis[i]);
      b.source = static_cast<int>(i);
      blocks_.push_back(std::move(b));
    }
    // Group dense forms by support.
    std::map<std::vector<int>, int> by_support;
    for (size_t bi = 0; bi < blocks_.size(); ++bi) {
      Block& b = blocks_[bi];
      if (b.dense.empty()) continue;
      std::vector<int> sup;
      for (const auto& d : b.dense)
        for (const auto& tm : d.form) sup.push_back(tm.index);
      std::sort(sup.begin(), sup.end());
      sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
      auto it = by_support.find(sup);
      if (it == by_support.end()) {
        it = by_support.emplace(sup, static_cast<int>(groups_.size())).first;
        groups_.push_back({sup, Mat(0, static_cast<Index>(sup.size())), {}});
      }
      DenseGroup& g = groups_[it->second];
      const int k = static_cast<int>(b.dense.size());
      b.group = it->second;
      b.group_row = static_cast<int>(g.f.rows());
      Mat f = Mat::Zero(k, static_cast<Index>(sup.size()));
      for (int r = 0; r < k; ++r)
        for (const auto& tm : b.dense[r].form) {
          const auto pos = std::lower_bound(sup.begin(), sup.end(), tm.index) - sup.begin();
          f(r, pos) += tm.coeff;
        }
      Mat stacked(g.f.rows() + k, g.f.cols());
      stacked << g.f, f;
      g.f = std::move(stacked);
      g.blocks.push_back(static_cast<int>(bi));
    }
    c_ = Vec::Zero(nv_);
    for (const auto& t : prob_.objective().terms) c_(t.index) += t.coeff;
    const auto& eqs = prob_.equalities();
    e_mat_ = Mat::Zero(static_cast<Index>(eqs.size()), nv_);
    e_rhs_ = Vec::Zero(static_cast<Index>(eqs.size()));
    for (size_t i = 0; i < eqs.size(); ++i) {
      for (const auto& t : eqs[i].form.terms) e_mat_(static_cast<Index>(i), t.index) += t.coeff;
      e_rhs_(static_cast<Index>(i)) = eqs[i].rhs - eqs[i].form.constant;
    }
    n_total_ = 0;
    for (const auto& b : blocks_) n_total_ += b.dim;
  }

  Vec adjoint(const std::vector<CMat>& w) const {
    Vec out = Vec::Zero(nv_);
    for (size_t i = 0; i < blocks_.size(); ++i) detail::block_adjoint(blocks_[i], w[i], out);
    return out;
  }

  Mat schur(const std::vector<CMat>& x, const std::vector<CMat>& zi) const {
    Mat m = Mat::Zero(nv_, nv_);
    for (size_t i = 0; i < blocks_.size(); ++i) detail::block_schur(blocks_[i], x[i], zi[i], m);
    for (const auto& g : groups_) {
      Mat sf(g.f.rows(), g.f.cols());
      for (int bi : g.blocks) {
        const auto& b = blocks_[bi];
        const int k = static_cast<int>(b.dense.size());
        sf.middleRows(b.group_row, k) = detail::dense_coupling(b, x[bi], zi[bi]) * g.f.middleRows(b.group_row, k);
      }
      const Mat sub = g.f.transpose() * sf;
      const int ns = static_cast<int>(g.support.size());
      for (int j = 0; j < ns; ++j)
        for (int i = 0; i < ns; ++i) m(g.support[i], g.support[j]) += sub(i, j);
    }
    return m;
  }

  double block_norm_estimate(const detail::Block& b) const {
    double s = 0.0;
    for (const auto& t : b.cong) {
      const double tn = t.identity ? 1.0 : t.l.squaredNorm() / std::max<Index>(1, t.l.cols());
      s = std::max(s, std::abs(t.coeff) * tn);
    }
    for (const auto& d : b.dense) {
      double fm = 0.0;
      for (const auto& tm : d.form) fm = std::max(fm, std::abs(tm.coeff));
      s = std::max(s, fm * d.b.norm());
    }
    return s;
  }

  const SdpProblem& prob_;
  SolverOptions opt_;
  std::map<int, std::unique_ptr<detail::ParamIndex>> indices_;
  std::vector<detail::Block> blocks_;
  std::vector<detail::DenseGroup> groups_;
  Vec c_;
  Mat e_mat_;
  Vec e_rhs_;
  int nv_ = 0;
  int n_total_ = 0;
};

inline SdpSolution InteriorPointSolver::solve() {
  using namespace detail;
  const int nb = static_cast<int>(blocks_.size());
  const int ne = static_cast<int>(e_rhs_.size());
  SdpSolution sol;
  require(nb > 0, ErrorCode::invalid_argument, "problem has no conic constraints");

  std::vector<CMat> x(nb), z(nb), zi(nb), rz(nb);
  const double c_norm = 1.0 + c_.norm();
  double cdata_norm = 0.0;
  for (const auto& b : blocks_) cdata_norm += b.c.squaredNorm();
  cdata_norm = 1.0 + std::sqrt(cdata_norm);
  for (int i = 0; i < nb; ++i) {
    const auto& b = blocks_[i];
    const double na = block_norm_estimate(b);
    const double m = b.dim;
    double cmax = 0.0;
    for (const auto& t : b.cong)
      for (int p = 0; p < t.n * t.n; ++p) cmax = std::max(cmax, std::abs(c_(t.offset + p)));
    for (const auto& d : b.dense)
      for (const auto& tm : d.form) cmax = std::max(cmax, std::abs(c_(tm.index)));
    const double sx = std::max({10.0, std::sqrt(m), m * (1.0 + cmax) / (1.0 + na)});
    const double sz = std::max({10.0, std::sqrt(m), na, b.c.norm()});
    x[i] = sx * CMat::Identity(b.dim, b.dim);
    z[i] = sz * CMat::Identity(b.dim, b.dim);
  }
  Vec y = Vec::Zero(nv_);
  Vec w = Vec::Zero(ne);

  const double e_norm = 1.0 + e_rhs_.norm();
  int stall = 0;
  struct Best {
    double measure = std::numeric_limits<double>::infinity();
    int it = -1;
    Vec y;
    std::vector<CMat> x;
    SdpSolution stats;
  } best;
  for (int it = 0;; ++it) {
    double rz_norm2 = 0.0, gap = 0.0, cx = 0.0;
    bool ok = true;
    for (int i = 0; i < nb; ++i) {
      rz[i] = block_value(blocks_[i], y, true) - z[i];
      rz_norm2 += rz[i].squaredNorm();
      gap += re_inner(x[i], z[i]);
      cx += re_inner(blocks_[i].c, x[i]);
      bool inv_ok = true;
      zi[i] = inverse_hpd(z[i], inv_ok);
      ok = ok && inv_ok;
    }
    const Vec ax = adjoint(x);
    const Vec rd = -c_ - ax + e_mat_.transpose() * w;
    const Vec re = e_rhs_ - e_mat_ * y;
    const double pobj = c_.dot(y) + prob_.objective().constant;
    const double dobj = cx + e_rhs_.dot(w) + prob_.objective().constant;
    const double pinf = std::max(std::sqrt(rz_norm2) / cdata_norm, re.norm() / e_norm);
    const double dinf = rd.norm() / c_norm;
    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double rel_gap = std::abs(pobj - dobj) / scale;
    const double rel_xz = gap / scale;
    sol.iterations = it;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.gap = gap;
    sol.relative_gap = rel_gap;
    sol.primal_infeasibility = pinf;
    sol.dual_infeasibility = dinf;
    if (opt_.verbose) {
      std::fprintf(stderr, "it %2d pobj %.9e dobj %.9e gap %.2e pinf %.2e dinf %.2e\n", it, pobj, dobj, rel_xz,
                   pinf, dinf);
    }
    if (!ok) {
      sol.status = SdpStatus::numerical_failure;
      sol.message = "slack matrix lost positive definiteness";
      break;
    }
    const double measure = std::max({rel_gap, rel_xz, pinf, dinf});
    if (measure <= opt_.tol) {
      sol.status = SdpStatus::optimal;
      sol.message = "converged";
      break;
    }
    if (measure < best.measure) {
      best.measure = measure;
      best.it = it;
      best.y = y;
      best.x = x;
      best.stats = sol;
    }
    if (best.measure <= opt_.fallback_tol && it - best.it >= opt_.patience) {
      sol.status = SdpStatus::numerical_failure;
      sol.message = "progress stalled";
      break;
    }
    // Farkas-type certificate: A*(X) − Eᵀw ≈ 0 with <C,X> + eᵀw < 0.
    const double t = -(cx + e_rhs_.dot(w));
    if (t > 0.0 && (ax - e_mat_.transpose() * w).norm() / t < 1e-8) {
      sol.status = SdpStatus::infeasible;
      sol.message = "infeasibility certificate found";
      break;
    }
    if (it == opt_.max_iterations) {
      sol.status = SdpStatus::numerical_failure;
      sol.message = "iteration limit reached";
      break;
    }

    const Mat m = schur(x, zi);
    // Jacobi-scaled Cholesky: M = D Ms D with unit diagonal Ms.
    const Vec dsc = m.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt();
    const Vec dinv = dsc.cwiseInverse();
    Mat ms = dinv.asDiagonal() * m * dinv.asDiagonal();
    Eigen::LLT<Mat> llt(ms);
    double reg = 0.0;
    while (llt.info() != Eigen::Success) {
      reg = reg == 0.0 ? 1e-14 : reg * 10.0;
      if (reg > 1e-6) break;
      ms.diagonal().array() += reg - (reg == 1e-14 ? 0.0 : reg / 10.0);
      llt.compute(ms);
    }
    if (llt.info() != Eigen::Success) {
      sol.status = SdpStatus::numerical_failure;
      sol.message = "Schur complement is not positive definite";
      break;
    }
    auto m_solve = [&](const auto& r) -> Mat { return dinv.asDiagonal() * llt.solve(dinv.asDiagonal() * r); };
    Mat minv_et;
    Eigen::LDLT<Mat> schur_e;
    if (ne > 0) {
      minv_et = m_solve(e_mat_.transpose());
      schur_e.compute(e_mat_ * minv_et);
    }
    auto solve_once = [&](const Vec& r, const Vec& q, Vec& dy, Vec& dw) {
      const Vec minv_r = m_solve(r);
      if (ne > 0) {
        dw = schur_e.solve(e_mat_ * minv_r - q);
        dy = minv_r - minv_et * dw;
      } else {
        dw = Vec::Zero(0);
        dy = minv_r;
      }
    };
    // [M Eᵀ; E 0][dy; dw] = [r; re], with two rounds of iterative refinement.
    auto solve_newton = [&](const Vec& r, Vec& dy, Vec& dw) {
      solve_once(r, re, dy, dw);
      for (int k = 0; k < 2; ++k) {
        Vec r1 = r - m.selfadjointView<Eigen::Lower>() * dy;
        if (ne > 0) r1 -= e_mat_.transpose() * dw;
        const Vec q1 = ne > 0 ? Vec(re - e_mat_ * dy) : Vec(Vec::Zero(0));
        Vec ddy, ddw;
        solve_once(r1, q1, ddy, ddw);
        dy += ddy;
        if (ne > 0) dw += ddw;
      }
    };
    // dX = herm(τZ⁻¹ − X dZ Z⁻¹ − Cc) − X; A*(dX) − Eᵀdw = rd gives M dy + Eᵀ(w + dw) = r.
    auto direction = [&](double tau, const std::vector<CMat>* corr, Vec& dy, Vec& dw, std::vector<CMat>& dz,
                         std::vector<CMat>& dx) {
      std::vector<CMat> rhs(nb);
      for (int i = 0; i < nb; ++i) {
        CMat r = tau * zi[i] - x[i] * rz[i] * zi[i];
        if (corr) r -= (*corr)[i];
        rhs[i] = herm(r);
      }
      // −A*(X) − rd = c − Eᵀw is substituted analytically; the system is solved for w + dw.
      const Vec r = adjoint(rhs) + c_;
      solve_newton(r, dy, dw);
      if (ne > 0) dw -= w;
      dz.resize(nb);
      dx.resize(nb);
      for (int i = 0; i < nb; ++i) {
        dz[i] = block_value(blocks_[i], dy, false) + rz[i];
        dx[i] = herm(CMat(tau * zi[i] - x[i] * dz[i] * zi[i])) - x[i];
        if (corr) dx[i] -= (*corr)[i];
      }
    };
    auto steps = [&](const std::vector<CMat>& dx, const std::vector<CMat>& dz, double frac, double& ap,
                     double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (int i = 0; i < nb; ++i) {
        ap = std::min(ap, max_step(x[i], dx[i], frac));
        ad = std::min(ad, max_step(z[i], dz[i], frac));
      }
    };

    const double mu = gap / n_total_;
    Vec dy, dw;
    std::vector<CMat> dz, dx;
    direction(0.0, nullptr, dy, dw, dz, dx);
    double ap, ad;
    steps(dx, dz, 1.0, ap, ad);
    double gap_aff = 0.0;
    for (int i = 0; i < nb; ++i) gap_aff += re_inner(x[i] + ap * dx[i], z[i] + ad * dz[i]);
    const double sigma = std::clamp(std::pow(std::max(0.0, gap_aff / n_total_) / mu, 3.0), 0.0, 1.0);
    std::vector<CMat> corr(nb);
    for (int i = 0; i < nb; ++i) corr[i] = herm(CMat(dx[i] * dz[i] * zi[i]));
    direction(sigma * mu, &corr, dy, dw, dz, dx);
    steps(dx, dz, opt_.step_fraction, ap, ad);
    for (int i = 0; i < nb; ++i) {
      x[i] = herm(CMat(x[i] + ap * dx[i]));
      z[i] = herm(CMat(z[i] + ad * dz[i]));
    }
    if (opt_.verbose) std::fprintf(stderr, "   ap %.3e ad %.3e sigma %.2e reg %.1e\n", ap, ad, sigma, reg);
    y += ad * dy;
    if (ne > 0) w += ap * dw;
    if (std::max(ap, ad) < 1e-10) {
      if (++stall >= 3) {
        sol.status = SdpStatus::numerical_failure;
        sol.message = "step length stagnated";
        break;
      }
    } else {
      stall = 0;
    }
  }

  if (sol.status == SdpStatus::numerical_failure && best.measure <= opt_.fallback_tol) {
    const std::string why = sol.message;
    sol = best.stats;
    sol.status = SdpStatus::optimal;
    sol.message = "converged to reduced accuracy (" + why + ")";
    y = best.y;
    x = best.x;
  }
  sol.y = y;
  for (size_t i = 0; i < prob_.matrix_vars().size(); ++i)
    sol.matrices.push_back(prob_.matrix_value(static_cast<int>(i), y));
  for (const auto& sv : prob_.scalar_vars()) sol.scalars.push_back(y(sv.offset));
  for (int i = 0; i < nb; ++i)
    if (blocks_[i].source >= 0) sol.lmi_duals.push_back(x[i]);
  return sol;
}

inline SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {}) {
  InteriorPointSolver solver(problem, options);
  return solver.solve();
}

inline SdpSolution solve(const SdpProblem& problem, double tol) {
  SolverOptions o;
  o.tol = tol;
  return solve(problem, o);
}

/// Largest scaled violation of any constraint at y: for PSD blocks
/// −λmin/(1+‖Z‖), for (in)equalities the residual over (1+|rhs|).
inline double max_violation(const SdpProblem& problem, const Vec& y) {
  double worst = 0.0;
  for (size_t i = 0; i < problem.matrix_vars().size(); ++i) {
    const auto& mv = problem.matrix_vars()[i];
    if (!mv.psd) continue;
    const CMat v = problem.matrix_value(static_cast<int>(i), y);
    worst = std::max(worst, -min_eigenvalue(v) / (1.0 + v.norm()));
  }
  for (const auto& sv : problem.scalar_vars())
    if (sv.lower) worst = std::max(worst, (*sv.lower - y(sv.offset)) / (1.0 + std::abs(*sv.lower)));
  for (const auto& l : problem.lmis()) {
    const Mat z = problem.evaluate_lmi(l, y);
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (z + z.transpose()), Eigen::EigenvaluesOnly);
    worst = std::max(worst, -es.eigenvalues()(0) / (1.0 + z.norm()));
  }
  for (const auto& c : problem.equalities())
    worst = std::max(worst, std::abs(c.form.evaluate(y) - c.rhs) / (1.0 + std::abs(c.rhs)));
  for (const auto& c : problem.inequalities())
    worst = std::max(worst, (c.form.evaluate(y) - c.rhs) / (1.0 + std::abs(c.rhs)));
  return worst;
}

}  // namespace nfsec::sdp
