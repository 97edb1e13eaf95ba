#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "nfsec/core.hpp"

namespace nfsec {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(mix_seed(seed, stream)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// CN(0, 1) sample.
inline cplx complex_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

inline CVec complex_normal_vector(Rng& rng, int n) {
  CVec v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_normal(rng);
  return v;
}

/// Uniform direction on the unit sphere of Cⁿ.
inline CVec random_unit_vector(Rng& rng, int n) {
  CVec v = complex_normal_vector(rng, n);
  double nv = v.norm();
  while (nv < 1e-300) {
    v = complex_normal_vector(rng, n);
    nv = v.norm();
  }
  return v / nv;
}

/// Uniform point in the complex ball of radius `radius` (real dimension 2n).
inline CVec random_in_ball(Rng& rng, int n, double radius) {
  const double u = uniform01(rng);
  return random_unit_vector(rng, n) * (radius * std::pow(u, 1.0 / (2.0 * n)));
}

/// Random PSD matrix G Gᴴ with G an n×rank complex Gaussian matrix.
inline CMat random_psd(Rng& rng, int n, int rank) {
  CMat g(n, rank);
  for (int j = 0; j < rank; ++j) g.col(j) = complex_normal_vector(rng, n);
  return g * g.adjoint();
}

inline CMat random_hermitian(Rng& rng, int n) {
  CMat g(n, n);
  for (int j = 0; j < n; ++j) g.col(j) = complex_normal_vector(rng, n);
  return hermitian_part(g);
}

}  // namespace nfsec
