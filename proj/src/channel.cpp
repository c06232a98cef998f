// SPDX-License-Identifier: Apache-2.0
#include "ddst/channel.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "ddst/error.hpp"

namespace ddst {

double ChannelConfig::symbol_duration_s() const {
  return (1.0 / subcarrier_spacing_hz) * 15.0 / 14.0;
}

double ChannelConfig::doppler_hz() const {
  return ue_speed_mps * carrier_frequency_hz / kSpeedOfLight;
}

void ChannelConfig::validate() const {
  if (n_t < 1 || n_r < 1) throw ConfigError("channel: antenna counts must be >= 1");
  if (subcarriers < 1 || symbols < 1) throw ConfigError("channel: K and T must be >= 1");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("channel: subcarrier spacing must be > 0");
  if (!(carrier_frequency_hz > 0.0)) throw ConfigError("channel: carrier frequency must be > 0");
  if (!(ue_speed_mps >= 0.0)) throw ConfigError("channel: ue speed must be >= 0");
  if (!(delay_spread_s >= 0.0)) throw ConfigError("channel: delay spread must be >= 0");
  if (sinusoids_per_tap < 1) throw ConfigError("channel: sinusoids_per_tap must be >= 1");
  if (pdp.empty()) throw ConfigError("channel: empty power delay profile");
  double total = 0.0;
  for (const auto& tap : pdp) {
    if (!(tap.power >= 0.0) || !(tap.delay_s >= 0.0)) {
      throw ConfigError("channel: tap delays and powers must be non-negative");
    }
    total += tap.power;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ConfigError("channel: tap powers must sum to 1, got " + std::to_string(total));
  }
  if (spatial == SpatialCorrelation::Kronecker) {
    if (r_tx.rows() != n_t || r_tx.cols() != n_t || r_rx.rows() != n_r || r_rx.cols() != n_r) {
      throw ConfigError("channel: Kronecker correlation matrices have wrong size");
    }
  }
}

std::vector<Tap> normalize_pdp(std::vector<Tap> taps) {
  if (taps.empty()) throw ConfigError("pdp: no taps");
  double total = 0.0;
  for (const auto& t : taps) {
    if (!(t.power >= 0.0)) throw ConfigError("pdp: negative tap power");
    total += t.power;
  }
  if (!(total > 0.0)) throw ConfigError("pdp: total power must be positive");
  for (auto& t : taps) t.power /= total;
  return taps;
}

std::vector<Tap> tdl_c_profile(double delay_spread_s) {
  // Normalized delay, power [dB].
  static constexpr std::array<std::array<double, 2>, 24> kTdlC{{
      {0.0, -4.4},     {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},
      {0.2176, -2.5},  {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},
      {0.6584, -7.4},  {0.7935, -7.1},  {0.8213, -10.7}, {0.9336, -11.1},
      {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},  {2.7105, -13.2},
      {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
      {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8},
  }};
  std::vector<Tap> taps;
  taps.reserve(kTdlC.size());
  for (const auto& row : kTdlC) {
    taps.push_back({row[0] * delay_spread_s, std::pow(10.0, row[1] / 10.0)});
  }
  return normalize_pdp(std::move(taps));
}

ComplexMatrix exponential_correlation(int n, double coeff) {
  if (!(coeff >= 0.0 && coeff < 1.0)) {
    throw ConfigError("exponential_correlation: coefficient must be in [0, 1)");
  }
  ComplexMatrix r(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r(i, j) = std::pow(coeff, std::abs(i - j));
  return r;
}

namespace kernels {

void apply_channel_serial(const ResourceGrid& tx, const ChannelTensor& h,
                          std::span<const cplx> noise, ResourceGrid& rx) {
  const int kk = h.subcarriers(), tt = h.symbols();
  for (int k = 0; k < kk; ++k) {
    for (int t = 0; t < tt; ++t) {
      auto y = rx.re(k, t);
      y.noalias() = h.matrix(k, t) * tx.re(k, t);
      y += Eigen::Map<const ComplexVector>(&noise[rx.index(k, t, 0)], rx.antennas());
    }
  }
}

void apply_channel_omp(const ResourceGrid& tx, const ChannelTensor& h,
                       std::span<const cplx> noise, ResourceGrid& rx) {
  const int kk = h.subcarriers(), tt = h.symbols();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < kk; ++k) {
    for (int t = 0; t < tt; ++t) {
      auto y = rx.re(k, t);
      y.noalias() = h.matrix(k, t) * tx.re(k, t);
      y += Eigen::Map<const ComplexVector>(&noise[rx.index(k, t, 0)], rx.antennas());
    }
  }
}

namespace {

using StridedMap =
    Eigen::Map<ComplexMatrix, Eigen::Unaligned, Eigen::OuterStride<Eigen::Dynamic>>;
using ConstGainMap = Eigen::Map<const ComplexMatrix>;

void synthesize_symbol(const ComplexMatrix& phase, std::span<const cplx> gains,
                       ChannelTensor& h, int t) {
  const Eigen::Index taps = phase.cols();
  const Eigen::Index pairs = static_cast<Eigen::Index>(h.n_r()) * h.n_t();
  ConstGainMap g(gains.data() + t * taps * pairs, taps, pairs);
  StridedMap out(&h(0, t, 0, 0), h.subcarriers(), pairs,
                 Eigen::OuterStride<Eigen::Dynamic>(h.symbols() * pairs));
  out.noalias() = phase * g;
}

}  // namespace

void synthesize_serial(const ComplexMatrix& phase, std::span<const cplx> gains,
                       ChannelTensor& h) {
  for (int t = 0; t < h.symbols(); ++t) synthesize_symbol(phase, gains, h, t);
}

void synthesize_omp(const ComplexMatrix& phase, std::span<const cplx> gains,
                    ChannelTensor& h) {
  const int tt = h.symbols();
#pragma omp parallel for schedule(static)
  for (int t = 0; t < tt; ++t) synthesize_symbol(phase, gains, h, t);
}

}  // namespace kernels

ChannelRealization generate_channel(const ChannelConfig& cfg, RngStream& rng) {
  cfg.validate();
  const int kk = cfg.subcarriers, tt = cfg.symbols, nr = cfg.n_r, nt = cfg.n_t;
  const int taps = static_cast<int>(cfg.pdp.size());
  const int ns = cfg.sinusoids_per_tap;
  const std::size_t pairs = static_cast<std::size_t>(nr) * nt;
  const double fd = cfg.doppler_hz();
  const bool static_channel = fd == 0.0;
  const int t_eval = static_channel ? 1 : tt;

  // Tap gains g_l(t) for every antenna pair, layout [t][l][m][n].
  std::vector<cplx> gains(static_cast<std::size_t>(tt) * taps * pairs);
  std::vector<double> omega(ns), phi(ns);
  const double w_scale = 2.0 * kPi * fd * cfg.symbol_duration_s();
  for (int l = 0; l < taps; ++l) {
    const double amp = std::sqrt(cfg.pdp[l].power / ns);
    for (std::size_t p = 0; p < pairs; ++p) {
      for (int i = 0; i < ns; ++i) {
        omega[i] = w_scale * std::cos(2.0 * kPi * rng.uniform());
        phi[i] = 2.0 * kPi * rng.uniform();
      }
      for (int t = 0; t < t_eval; ++t) {
        cplx acc = 0.0;
        for (int i = 0; i < ns; ++i) acc += std::polar(1.0, omega[i] * t + phi[i]);
        gains[(static_cast<std::size_t>(t) * taps + l) * pairs + p] = amp * acc;
      }
    }
  }

  if (cfg.spatial == SpatialCorrelation::Kronecker) {
    const ComplexMatrix l_tx = Eigen::LLT<ComplexMatrix>(cfg.r_tx).matrixL();
    const ComplexMatrix l_rx = Eigen::LLT<ComplexMatrix>(cfg.r_rx).matrixL();
    for (int t = 0; t < t_eval; ++t) {
      for (int l = 0; l < taps; ++l) {
        Eigen::Map<ComplexMatrix> g(&gains[(static_cast<std::size_t>(t) * taps + l) * pairs],
                                    nr, nt);
        const ComplexMatrix correlated = l_rx * g * l_tx.transpose();
        g = correlated;
      }
    }
  }

  ComplexMatrix phase(kk, taps);
  for (int k = 0; k < kk; ++k)
    for (int l = 0; l < taps; ++l)
      phase(k, l) = std::polar(1.0, -2.0 * kPi * k * cfg.subcarrier_spacing_hz * cfg.pdp[l].delay_s);

  ChannelRealization out{ChannelTensor(kk, tt, nr, nt), rng.seed(), rng.stream()};
  if (static_channel) {
    ChannelTensor first(kk, 1, nr, nt);
    kernels::synthesize_serial(phase, gains, first);
    for (int k = 0; k < kk; ++k)
      for (int t = 0; t < tt; ++t) out.h.matrix(k, t) = first.matrix(k, 0);
  } else {
    kernels::synthesize_omp(phase, gains, out.h);
  }
  return out;
}

ResourceGrid apply_channel(const ResourceGrid& tx, const ChannelRealization& ch,
                           double noise_variance, RngStream& rng) {
  const auto& h = ch.h;
  if (tx.subcarriers() != h.subcarriers() || tx.symbols() != h.symbols() ||
      tx.antennas() != h.n_t()) {
    throw DimensionError("apply_channel: transmit grid does not match channel shape");
  }
  ResourceGrid rx(h.subcarriers(), h.symbols(), h.n_r());
  const auto noise = complex_gaussian(rx.size(), noise_variance, rng);
  kernels::apply_channel_omp(tx, h, noise, rx);
  return rx;
}

ComplexMatrix estimate_spatial_covariance(std::span<const ChannelRealization> ensemble) {
  if (ensemble.empty()) throw DimensionError("estimate_spatial_covariance: empty ensemble");
  const int nr = ensemble.front().h.n_r(), nt = ensemble.front().h.n_t();
  CovarianceAccumulator acc(static_cast<Eigen::Index>(nr) * nt);
  ComplexVector v(static_cast<Eigen::Index>(nr) * nt);
  for (const auto& ch : ensemble) {
    if (ch.h.n_r() != nr || ch.h.n_t() != nt) {
      throw DimensionError("estimate_spatial_covariance: mixed antenna counts");
    }
    for (int k = 0; k < ch.h.subcarriers(); ++k) {
      for (int t = 0; t < ch.h.symbols(); ++t) {
        const auto hm = ch.h.matrix(k, t);
        for (int n = 0; n < nt; ++n)
          for (int m = 0; m < nr; ++m) v(m + nr * n) = hm(m, n);
        acc.add(v);
      }
    }
  }
  return acc.covariance();
}

ComplexMatrix genie_spatial_covariance(const ChannelConfig& cfg) {
  if (cfg.spatial == SpatialCorrelation::None) {
    return ComplexMatrix::Identity(cfg.n_r * cfg.n_t, cfg.n_r * cfg.n_t);
  }
  return kron(cfg.r_tx, cfg.r_rx);
}

double nmse(const ChannelTensor& estimate, const ChannelTensor& truth) {
  if (!estimate.same_shape(truth)) throw DimensionError("nmse: shape mismatch");
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    err += std::norm(estimate.data()[i] - truth.data()[i]);
    ref += std::norm(truth.data()[i]);
  }
  if (!(ref > 0.0)) throw DomainError("nmse: reference channel is all zero");
  return err / ref;
}

cplx frequency_correlation(const ChannelConfig& cfg, double dk) {
  cplx acc = 0.0;
  for (const auto& tap : cfg.pdp) {
    acc += tap.power * std::polar(1.0, -2.0 * kPi * dk * cfg.subcarrier_spacing_hz * tap.delay_s);
  }
  return acc;
}

double time_correlation(const ChannelConfig& cfg, double dt) {
  const double x = 2.0 * kPi * cfg.doppler_hz() * std::abs(dt) * cfg.symbol_duration_s();
  return std::cyl_bessel_j(0.0, x);
}

}  // namespace ddst
