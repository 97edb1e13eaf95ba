#pragma once

// LoS + bounded-NLoS near-field channels, the location-driven uncertainty
// region around each eavesdropper, and pointwise link metrics.

#include <cstdint>
#include <optional>
#include <vector>

#include "nfsec/array_geometry.hpp"
#include "nfsec/random.hpp"

namespace nfsec {

using ChannelVector = CVec;

struct EavesdropperProfile {
  int index = 0;
  CartesianPoint estimated_location;
  double location_error_bound = 0.0;  // ε_k, meters
  double nlos_norm_bound = 0.0;       // δ_k, channel units
  double noise_power = 1.0;           // σ_k², watts
  bool is_energy_receiver = true;     // false for the sensing target

  void validate() const {
    require(location_error_bound >= 0.0, ErrorCode::invalid_argument, "location error bound must be >= 0");
    require(nlos_norm_bound >= 0.0, ErrorCode::invalid_argument, "NLoS bound must be >= 0");
    require(noise_power > 0.0, ErrorCode::invalid_argument, "noise power must be > 0");
  }
};

struct CovariancePair {
  CMat r0;  // information beam
  CMat r1;  // sensing / powering / artificial-noise beam

  CMat total() const { return r0 + r1; }
  double trace_power() const { return (r0 + r1).trace().real(); }

  void validate(std::optional<double> power_budget = std::nullopt) const {
    require(r0.rows() == r0.cols() && r1.rows() == r1.cols() && r0.rows() == r1.rows(),
            ErrorCode::invalid_argument, "covariances must be square and of equal size");
    require(is_hermitian(r0) && is_hermitian(r1), ErrorCode::invalid_argument, "covariances must be Hermitian");
    for (const CMat* r : {&r0, &r1}) {
      const double tr = std::abs(r->trace().real());
      require(min_eigenvalue(*r) >= -1e-8 * std::max(tr, 1e-300), ErrorCode::invalid_argument,
              "covariances must be positive semidefinite");
    }
    if (power_budget) {
      require(trace_power() <= *power_budget + 1e-6, ErrorCode::invalid_argument, "power budget exceeded");
    }
  }
};

/// Geometric channel v(l) ⊙ b(l).
inline ChannelVector los_channel(const ArrayGeometry& geom, const CartesianPoint& location) {
  const CVec v = steering_vector(geom, location);
  const Vec b = path_loss_vector(geom, location);
  return v.cwiseProduct(b.cast<cplx>());
}

/// δ_k chosen as a fraction of the LoS magnitude at the estimated location.
inline double nlos_bound_from_fraction(const ArrayGeometry& geom, const CartesianPoint& location,
                                       double fraction) {
  return fraction * los_channel(geom, location).norm();
}

/// One draw from Ψ_k with its components exposed.
struct ChannelDraw {
  CartesianPoint location_offset;  // Δl
  CVec nlos;                       // NLoS part
  ChannelVector channel;           // los(l̂ + Δl) + NLoS
};

/// Uniform offset in the disk of radius `radius`; `on_boundary` pins |Δl| = radius.
inline CartesianPoint random_disk_offset(Rng& rng, double radius, bool on_boundary = false) {
  const double phi = 2.0 * kPi * uniform01(rng);
  const double rho = on_boundary ? radius : radius * std::sqrt(uniform01(rng));
  return {rho * std::cos(phi), rho * std::sin(phi)};
}

inline ChannelDraw draw_channel(const EavesdropperProfile& profile, const ArrayGeometry& geom, Rng& rng) {
  ChannelDraw out;
  out.location_offset = random_disk_offset(rng, profile.location_error_bound);
  const CartesianPoint l{profile.estimated_location.x + out.location_offset.x,
                         profile.estimated_location.y + out.location_offset.y};
  const double nlos_norm = profile.nlos_norm_bound * uniform01(rng);
  out.nlos = random_unit_vector(rng, geom.size()) * nlos_norm;
  out.channel = los_channel(geom, l) + out.nlos;
  return out;
}

/// Deterministic draw from Ψ_k: the same (seed, draw) always gives the same channel.
inline ChannelVector sample_channel(const EavesdropperProfile& profile, const ArrayGeometry& geom,
                                    std::uint64_t seed, std::uint64_t draw = 0) {
  Rng rng = make_rng(seed, draw);
  return draw_channel(profile, geom, rng).channel;
}

inline double sinr(const CovariancePair& cov, const ChannelVector& g, double noise_power) {
  const double signal = quad_form(cov.r0, g);
  const double interference = quad_form(cov.r1, g);
  return std::max(signal, 0.0) / (std::max(interference, 0.0) + noise_power);
}

inline double cu_sinr(const CovariancePair& cov, const ChannelVector& g0, double noise_power) {
  require(noise_power > 0.0, ErrorCode::invalid_argument, "noise power must be > 0");
  return sinr(cov, g0, noise_power);
}

inline double eav_sinr(const CovariancePair& cov, const ChannelVector& gk, double noise_power) {
  require(noise_power > 0.0, ErrorCode::invalid_argument, "noise power must be > 0");
  return sinr(cov, gk, noise_power);
}

inline double harvested_power(const CovariancePair& cov, const ChannelVector& gk, double efficiency) {
  require(efficiency >= 0.0 && efficiency <= 1.0, ErrorCode::invalid_argument, "efficiency must lie in [0, 1]");
  return efficiency * quad_form(cov.r0 + cov.r1, gk);
}

inline double secrecy_rate(double cu_sinr_value, double eav_sinr_value) {
  return positive_part(log2p1(cu_sinr_value) - log2p1(eav_sinr_value));
}

/// Monte-Carlo estimate of the worst-case secrecy rate; an optimistic estimate
/// because finite sampling under-covers Ψ_k.
inline double empirical_worst_secrecy_rate(const CovariancePair& cov, const ChannelVector& g0, double cu_noise,
                                           const std::vector<EavesdropperProfile>& profiles,
                                           const ArrayGeometry& geom, int n_samples, std::uint64_t seed) {
  require(n_samples >= 1, ErrorCode::invalid_argument, "n_samples must be >= 1");
  const double gamma0 = cu_sinr(cov, g0, cu_noise);
  double worst = 0.0;
  for (const auto& p : profiles) {
    for (int i = 0; i < n_samples; ++i) {
      const auto g = sample_channel(p, geom, mix_seed(seed, static_cast<std::uint64_t>(p.index)),
                                    static_cast<std::uint64_t>(i));
      worst = std::max(worst, eav_sinr(cov, g, p.noise_power));
    }
  }
  return secrecy_rate(gamma0, worst);
}

}  // namespace nfsec
