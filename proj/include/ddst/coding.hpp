// SPDX-License-Identifier: Apache-2.0
//
// Binary LDPC codes given by a sparse parity-check matrix.
//
// LLR convention everywhere in this module's interface: L = log P(b=1)/P(b=0),
// i.e. a positive value favours bit 1.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ddst {

class LdpcCode {
public:
  /// Builds a code from the check-node adjacency (variable indices per check).
  /// The information set is chosen by GF(2) elimination; redundant checks
  /// reduce the dimension accordingly.
  LdpcCode(int n, std::vector<std::vector<int>> checks);

  static LdpcCode from_alist(std::istream& in);
  static LdpcCode load_alist(const std::string& path);
  void write_alist(std::ostream& out) const;

  int n() const { return n_; }
  int k() const { return k_; }
  int m() const { return static_cast<int>(checks_.size()); }
  double rate() const { return static_cast<double>(k_) / n_; }

  const std::vector<std::vector<int>>& checks() const { return checks_; }
  const std::vector<std::vector<int>>& variables() const { return vars_; }
  /// Codeword positions that carry the information bits, in info order.
  const std::vector<int>& info_positions() const { return info_pos_; }
  const std::vector<int>& parity_positions() const { return parity_pos_; }

  /// Systematic encoding: info bit i lands at info_positions()[i].
  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;
  std::vector<std::uint8_t> extract_info(std::span<const std::uint8_t> codeword) const;
  bool is_codeword(std::span<const std::uint8_t> codeword) const;

private:
  int n_ = 0;
  int k_ = 0;
  std::vector<std::vector<int>> checks_;
  std::vector<std::vector<int>> vars_;
  std::vector<int> info_pos_;
  std::vector<int> parity_pos_;
  int words_ = 0;                       // 64-bit words per generator row
  std::vector<std::uint64_t> parity_gen_;  // (n-k) rows over the k info bits
};

/// Progressive edge growth with constant column degree. Among the checks
/// farthest from a variable the one of lowest current degree is chosen, which
/// keeps check degrees close to n * column_degree / m.
LdpcCode peg_construct(int n, int m, int column_degree, std::uint64_t seed);

struct MinSumOptions {
  double scale = 0.75;
  int max_iterations = 25;
};

struct DecodeResult {
  std::vector<std::uint8_t> info;
  std::vector<std::uint8_t> codeword;
  bool converged = false;
  int iterations = 0;
};

/// Normalized min-sum with flooding schedule; stops as soon as the hard
/// decision satisfies every check.
DecodeResult ldpc_decode(std::span<const double> llrs, const LdpcCode& code,
                         const MinSumOptions& opts = {});

/// Mapping of LDPC codewords onto the coded bits available to one transmit
/// antenna in one slot.
///
/// capacity >= n: floor(capacity/n) full codewords followed by zero padding.
/// n/2 <= capacity < n: one codeword, shortened (known-zero information bits,
/// not transmitted) and punctured (parity bits not transmitted) so that
/// exactly `capacity` bits remain. Half of the removed bits are shortened,
/// which keeps the effective rate close to the mother code rate.
struct Segmentation {
  int capacity_bits = 0;
  int codewords = 0;
  int shortened = 0;
  int punctured = 0;
  int pad_bits = 0;
  std::vector<int> shortened_positions;   // subset of info positions
  std::vector<int> transmitted_positions; // ascending codeword positions

  int transmitted_per_codeword() const { return static_cast<int>(transmitted_positions.size()); }
  int info_bits_per_codeword(const LdpcCode& c) const { return c.k() - shortened; }
};

Segmentation segment_payload(int capacity_bits, const LdpcCode& code);

/// Encodes info blocks (codewords x info_bits_per_codeword) into the
/// `capacity_bits` transmitted stream including padding.
std::vector<std::uint8_t> encode_segment(std::span<const std::uint8_t> info,
                                         const LdpcCode& code, const Segmentation& seg);

/// Expands the received LLRs of codeword `index` to a full-length LLR vector:
/// shortened bits get a large negative (known zero) value, punctured bits 0.
std::vector<double> recover_llrs(std::span<const double> stream_llrs, int index,
                                 const LdpcCode& code, const Segmentation& seg);

/// Info bits of a decoded codeword with shortened positions removed.
std::vector<std::uint8_t> segment_info(std::span<const std::uint8_t> info,
                                       const LdpcCode& code, const Segmentation& seg);

}  // namespace ddst
