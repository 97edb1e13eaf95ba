#pragma once

#include <vector>

#include "nfsec/core.hpp"

namespace nfsec::sdp {

/// [[Re H, −Im H], [Im H, Re H]] for Hermitian H.
inline Mat embed_complex(const CMat& h) {
  require(is_hermitian(h), ErrorCode::invalid_argument, "embed_complex needs a Hermitian matrix");
  const Index n = h.rows();
  Mat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return 0.5 * (out + out.transpose());
}

/// Same block layout for a rectangular complex map L, so that
/// embed(L H Lᴴ) = embed_map(L)·embed(H)·embed_map(L)ᵀ.
inline Mat embed_map(const CMat& l) {
  const Index m = l.rows();
  const Index n = l.cols();
  Mat out(2 * m, 2 * n);
  out.topLeftCorner(m, n) = l.real();
  out.topRightCorner(m, n) = -l.imag();
  out.bottomLeftCorner(m, n) = l.imag();
  out.bottomRightCorner(m, n) = l.real();
  return out;
}

inline CMat unembed(const Mat& e) {
  const Index n = e.rows() / 2;
  CMat h(n, n);
  h.real() = 0.5 * (e.topLeftCorner(n, n) + e.bottomRightCorner(n, n));
  h.imag() = 0.5 * (e.bottomLeftCorner(n, n) - e.topRightCorner(n, n));
  return hermitian_part(h);
}

// Real parameterization of an n×n Hermitian matrix with n² coordinates:
// first the n diagonal entries, then Re H[a,b] for a<b, then Im H[a,b] for a<b.

struct EmbedEntry {
  int row;
  int col;
  double value;
};

/// Nonzeros of embed(E_p) for basis element p (≤ 4 entries, both triangles listed).
inline std::vector<std::vector<EmbedEntry>> hermitian_basis(int n) {
  std::vector<std::vector<EmbedEntry>> basis;
  basis.reserve(static_cast<size_t>(n) * n);
  for (int a = 0; a < n; ++a) basis.push_back({{a, a, 1.0}, {n + a, n + a, 1.0}});
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      basis.push_back({{a, b, 1.0}, {b, a, 1.0}, {n + a, n + b, 1.0}, {n + b, n + a, 1.0}});
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      basis.push_back({{a, n + b, -1.0}, {b, n + a, 1.0}, {n + a, b, 1.0}, {n + b, a, -1.0}});
  return basis;
}

/// Coordinates → Hermitian matrix.
inline CMat hermitian_from_params(const double* y, int n) {
  CMat h = CMat::Zero(n, n);
  int p = 0;
  for (int a = 0; a < n; ++a) h(a, a) = y[p++];
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      h(a, b).real(y[p]);
      h(b, a).real(y[p]);
      ++p;
    }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      h(a, b).imag(y[p]);
      h(b, a).imag(-y[p]);
      ++p;
    }
  return h;
}

inline Vec params_from_hermitian(const CMat& h) {
  const int n = static_cast<int>(h.rows());
  Vec y(n * n);
  int p = 0;
  for (int a = 0; a < n; ++a) y(p++) = h(a, a).real();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) y(p++) = 0.5 * (h(a, b).real() + h(b, a).real());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) y(p++) = 0.5 * (h(a, b).imag() - h(b, a).imag());
  return y;
}

/// Complex coefficients c_p = tr(G·H_p), so tr(G·H(y)) = Σ_p c_p y_p for any square G.
inline CVec trace_coefficients(const CMat& g) {
  const int n = static_cast<int>(g.rows());
  CVec c(n * n);
  int p = 0;
  const cplx j{0.0, 1.0};
  for (int a = 0; a < n; ++a) c(p++) = g(a, a);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) c(p++) = g(a, b) + g(b, a);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) c(p++) = j * (g(b, a) - g(a, b));
  return c;
}

}  // namespace nfsec::sdp
