// SPDX-License-Identifier: Apache-2.0
//
// Flat JSON simulation configuration. Every key is optional; unknown keys
// are rejected so that typos cannot silently fall back to defaults.
//
//   n_t, n_r, subcarriers, symbols, slot_symbols
//   subcarrier_spacing_hz, carrier_frequency_hz, delay_spread_s, ue_speed_kmh
//   pdp                  "tdl-c" | "single-tap" | "custom"
//   pdp_delays_s, pdp_powers_db        (custom profile only)
//   spatial_correlation  "none" | "kronecker"
//   tx_correlation, rx_correlation     exponential model coefficients
//   sinusoids_per_tap
//   scheme               "full-ddst" | "mix" | "op-tdm" | "op-1p" | "op-2p"
//   ddst_ratio, rho, pilot_symbols, modulation
//   code                 "ldpc-4032-2016" | "ldpc-648-324" | path to alist
//   min_sum_scale, max_decoder_iterations, llr_clip
//   snr_db (list), trials, seed, workers
//   receiver             "op-lmmse" | "ddst-ls" | "ddst-lmmse" | "mix-interp"
//   genie_reference      also run the genie-CSI variant of the chain
//   hard_iterations, despread_span ("cycle" | "frame")
//   rspat_source         "genie" | "estimated"
//   rspat_training_realizations
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddst/channel.hpp"
#include "ddst/phy.hpp"
#include "ddst/receivers.hpp"

namespace ddst {

struct SimulationConfig {
  int n_t = 4;
  int n_r = 16;
  int subcarriers = 72;
  int symbols = 28;
  int slot_symbols = 14;
  double subcarrier_spacing_hz = 30e3;
  double carrier_frequency_hz = 2e9;
  double delay_spread_s = 363e-9;
  double ue_speed_kmh = 0.0;
  std::string pdp = "tdl-c";
  std::vector<double> pdp_delays_s;
  std::vector<double> pdp_powers_db;
  std::string spatial_correlation = "none";
  double tx_correlation = 0.0;
  double rx_correlation = 0.0;
  int sinusoids_per_tap = 32;

  std::string scheme = "mix";
  double ddst_ratio = 0.25;
  double rho = 0.3;
  int pilot_symbols = 4;
  int modulation = 16;

  std::string code = "ldpc-4032-2016";
  double min_sum_scale = 0.75;
  int max_decoder_iterations = 25;
  double llr_clip = kDefaultLlrClip;

  std::vector<double> snr_db{0.0, 5.0, 10.0};
  int trials = 2000;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: OpenMP default

  std::string receiver = "mix-interp";
  bool genie_reference = true;
  int hard_iterations = 3;
  std::string despread_span = "frame";
  std::string rspat_source = "genie";
  int rspat_training_realizations = 64;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  ChannelConfig channel_config() const;
  PlanConfig plan_config() const;
  ReceiverOptions receiver_options() const;
};

SimulationConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SimulationConfig& c);
SimulationConfig load_config(const std::string& path);

/// Resolves the `code` key to an alist path (built-in names map into the data
/// directory, which DDST_DATA_DIR in the environment overrides).
std::string resolve_code_path(const std::string& code);

}  // namespace ddst
