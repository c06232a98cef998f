// SPDX-License-Identifier: Apache-2.0
//
// Time-varying frequency-selective MIMO channel synthesized per resource
// element. Each delay tap carries an independent Jakes-spectrum process per
// antenna pair (sum of sinusoids); the frequency response is formed directly
// from the tap gains, so no time-domain waveform or cyclic prefix exists.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ddst/grid.hpp"
#include "ddst/numerics.hpp"

namespace ddst {

inline constexpr double kSpeedOfLight = 299792458.0;

struct Tap {
  double delay_s = 0.0;
  double power = 1.0;  // linear
};

enum class SpatialCorrelation { None, Kronecker };

struct ChannelConfig {
  int n_t = 4;
  int n_r = 16;
  int subcarriers = 72;
  int symbols = 28;
  double subcarrier_spacing_hz = 30e3;
  double carrier_frequency_hz = 2e9;
  double delay_spread_s = 363e-9;
  double ue_speed_mps = 0.0;
  std::vector<Tap> pdp;  // tap powers sum to 1
  SpatialCorrelation spatial = SpatialCorrelation::None;
  ComplexMatrix r_tx;  // n_t x n_t, used for Kronecker
  ComplexMatrix r_rx;  // n_r x n_r, used for Kronecker
  int sinusoids_per_tap = 32;

  /// OFDM symbol duration including the normal cyclic prefix
  /// (14 symbols per slot, slot = 1 ms * 15 kHz / spacing).
  double symbol_duration_s() const;
  double doppler_hz() const;
  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

/// TDL-C normalized profile (3GPP TR 38.901) scaled to `delay_spread_s`,
/// powers normalized to sum 1.
std::vector<Tap> tdl_c_profile(double delay_spread_s);

/// Scales tap powers to sum 1. Throws ConfigError for empty or non-positive.
std::vector<Tap> normalize_pdp(std::vector<Tap> taps);

/// Exponential correlation model R_ij = coeff^|i-j|.
ComplexMatrix exponential_correlation(int n, double coeff);

struct ChannelRealization {
  ChannelTensor h;  // K x T x N_r x N_t
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

ChannelRealization generate_channel(const ChannelConfig& cfg, RngStream& rng);

/// y^k(t) = H^k(t) s^k(t) + w^k(t), AWGN of per-entry variance noise_variance.
/// Noise is drawn in (k, t, m) order so the result does not depend on the
/// number of worker threads.
ResourceGrid apply_channel(const ResourceGrid& tx, const ChannelRealization& ch,
                           double noise_variance, RngStream& rng);

/// Pooled sample covariance of vec(H^k(t)) (column-major vec, index m + N_r n)
/// over all k, t and realizations.
ComplexMatrix estimate_spatial_covariance(std::span<const ChannelRealization> ensemble);

/// Genie spatial covariance implied by the configuration (R_tx kron R_rx).
ComplexMatrix genie_spatial_covariance(const ChannelConfig& cfg);

/// sum |est - truth|^2 / sum |truth|^2.
double nmse(const ChannelTensor& estimate, const ChannelTensor& truth);

/// Frequency correlation E[h^k h^{k'}*] = sum_l p_l exp(-j 2 pi dk df tau_l),
/// dk = k - k'.
cplx frequency_correlation(const ChannelConfig& cfg, double dk);

/// Temporal correlation J0(2 pi f_D dt T_sym) for a lag of `dt` symbols.
double time_correlation(const ChannelConfig& cfg, double dt);

namespace kernels {
// Serial reference and OpenMP versions; results are bitwise identical.
void apply_channel_serial(const ResourceGrid& tx, const ChannelTensor& h,
                          std::span<const cplx> noise, ResourceGrid& rx);
void apply_channel_omp(const ResourceGrid& tx, const ChannelTensor& h,
                       std::span<const cplx> noise, ResourceGrid& rx);

/// Frequency synthesis h(k,t) = sum_l F(k,l) G_l(t), gains laid out as
/// [t][l][m][n].
void synthesize_serial(const ComplexMatrix& phase, std::span<const cplx> gains,
                       ChannelTensor& h);
void synthesize_omp(const ComplexMatrix& phase, std::span<const cplx> gains,
                    ChannelTensor& h);
}  // namespace kernels

}  // namespace ddst
