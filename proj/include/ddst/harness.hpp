// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo link simulation, metrics and result files.
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "ddst/channel.hpp"
#include "ddst/coding.hpp"
#include "ddst/config.hpp"
#include "ddst/phy.hpp"
#include "ddst/receivers.hpp"

namespace ddst {

inline constexpr int kReSubcarriersPerRb = 12;
inline constexpr int kResPerRb = 12 * 14;

/// Everything derived from a SimulationConfig that stays fixed over a sweep.
struct LinkSetup {
  SimulationConfig cfg;
  ChannelConfig channel;
  FramePlan plan;
  DdstParams ddst;      // meaningful for DDST schemes only
  ComplexMatrix pilot;  // N_t x T
  Constellation constellation;
  std::shared_ptr<const LdpcCode> code;
  Segmentation seg;
  MinSumOptions decoder;
  ReceiverOptions receiver;
  ComplexMatrix r_spat;
  /// Per RE (k * T + t): slot and position within slot_data_res, -1 if the
  /// RE carries no data.
  std::vector<int> re_slot;
  std::vector<int> re_pos;

  int bits_per_slot() const { return plan.slot_capacity() * constellation.bits_per_symbol(); }
  int info_bits_per_codeword() const { return seg.info_bits_per_codeword(*code); }
  ReceiverContext context(double sigma2) const;
};

/// Builds the setup; `code` may be passed to avoid re-loading the alist.
LinkSetup make_link_setup(const SimulationConfig& cfg,
                          std::shared_ptr<const LdpcCode> code = nullptr);

/// Plan, capacities and fixed receiver choices, for metadata and `info`.
nlohmann::json describe_setup(const LinkSetup& setup);

/// Transmit side and propagation of one trial, independent of SNR.
struct FrameSample {
  std::uint64_t trial = 0;
  ChannelRealization channel;
  /// info[n][slot]: codewords x info_bits_per_codeword bits.
  std::vector<std::vector<std::vector<std::uint8_t>>> info;
  /// coded[n][slot]: bits_per_slot bits including padding.
  std::vector<std::vector<std::vector<std::uint8_t>>> coded;
  TxFrame frame;
  std::vector<cplx> unit_noise;  // CN(0, 1), K x T x N_r
};

/// Trial `trial` draws from streams derived from (seed, trial) only.
FrameSample make_sample(const LinkSetup& setup, std::uint64_t trial);

/// Received grid for noise variance sigma2 (unit noise scaled by sigma).
ResourceGrid receive(const FrameSample& s, double sigma2);

/// Coded bit of antenna n at RE (k, t), bit q; -1 where no data is mapped.
int coded_bit_at(const LinkSetup& setup, const FrameSample& s, int k, int t, int n, int q);

struct LinkCounts {
  double nmse_err = 0.0;
  double nmse_ref = 0.0;
  std::uint64_t raw_errors = 0;
  std::uint64_t raw_bits = 0;
  std::uint64_t info_errors = 0;
  std::uint64_t info_bits = 0;
  std::uint64_t block_errors = 0;
  std::uint64_t blocks = 0;
  std::uint64_t frames = 0;

  void merge(const LinkCounts& o);
};

/// Decodes every codeword of the frame from `llr` and counts errors.
LinkCounts score_llrs(const LinkSetup& setup, const FrameSample& s, const LlrGrid& llr);

struct MetricsRecord {
  std::string scheme;
  double snr_db = 0.0;
  double nmse = 0.0;
  double ber_raw = 0.0;
  double ber_coded = 0.0;
  double bler = 0.0;
  double throughput = 0.0;  // bits per slot
  std::uint64_t trials = 0;
  std::uint64_t codewords = 0;
  double wall_time_s = 0.0;  // not written to result files
};

/// R = N_RB * 168 * omega * code_rate * Q * (1 - BLER).
double throughput(double bler, double omega, double code_rate, int q, int n_rb);

MetricsRecord make_record(const std::string& label, double snr_db, const LinkCounts& c,
                          const LinkSetup& setup);

/// Record label of a sweep variant: scheme name, plus "-genie" for genie CSI.
std::string variant_label(const SimulationConfig& cfg, bool genie);

/// One record per (SNR, variant); the genie variant follows the estimated one
/// when genie_reference is set. Bitwise deterministic for a fixed seed and
/// any worker count.
std::vector<MetricsRecord> run_sweep(const SimulationConfig& cfg);
std::vector<MetricsRecord> run_sweep(const LinkSetup& setup);

/// Writes `path` (CSV) and `path + ".json"` (sidecar).
void emit_results(const std::vector<MetricsRecord>& records, const SimulationConfig& cfg,
                  const std::string& path, const nlohmann::json& extra = {});
std::string format_number(double v);

}  // namespace ddst
