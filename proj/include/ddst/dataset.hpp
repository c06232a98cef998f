// SPDX-License-Identifier: Apache-2.0
//
// Dataset exchange with external (learned) receivers through the tensor
// container.
//
// Exported per sample i (name "sample_%06d/<kind>", one payload file per kind):
//   rx         c64 (K, T, N_r)
//   ls_per_re  c64 (|K1|, T, N_r, N_t)
//   despread   c64 (|K1|, P, N_r, N_t)       block means over N_cycle symbols
//   h_true     c64 (K, T, N_r, N_t)
//   tx_bits    f32 (K, T, N_t, Q)            coded bits, -1 where no data
//   info_bits  f32 (N_t, slots, codewords, info bits per codeword)
//   sigma2     f32 (1)
// metadata: config, plan description, split, and per sample
// {trial, seed, snr_db, sigma2} (sigma2 in full precision).
//
// Imports scored by score_external (same sample names):
//   h_est      c64 (K, T, N_r, N_t)     mode "estimates"
//   llr        f32 (K, T, N_t, Q)       mode "llrs", L = log P(b=1)/P(b=0)
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddst/harness.hpp"

namespace ddst {

enum class Split { Train, Val, Test };

Split parse_split(const std::string& s);
std::string split_name(Split s);
/// First trial index of a split; splits draw from disjoint trial ranges.
std::uint64_t split_offset(Split s);

std::string sample_name(std::size_t i, const std::string& kind);

/// Sample i uses trial split_offset + i and SNR snr_db[i % snr_db.size()].
void export_dataset(const SimulationConfig& cfg, Split split, std::size_t samples,
                    const std::string& out_dir);

enum class ScoreMode { Estimates, Llrs };
ScoreMode parse_score_mode(const std::string& s);

/// One record per distinct SNR in the dataset, scheme "external".
std::vector<MetricsRecord> score_external(const std::string& dataset_dir,
                                          const std::string& import_dir, ScoreMode mode);

/// Configuration stored in a dataset's metadata.
SimulationConfig dataset_config(const std::string& dataset_dir);

}  // namespace ddst
