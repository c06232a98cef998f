// SPDX-License-Identifier: Apache-2.0
//
// Constellations, pilot sequences, DDST precoding and frame assembly.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ddst/grid.hpp"
#include "ddst/numerics.hpp"

namespace ddst {

/// Square Gray-labeled QAM with unit average energy.
///
/// A label is a Q-bit integer read MSB first (b_0 ... b_{Q-1}). The first Q/2
/// bits select the in-phase level and the remaining Q/2 the quadrature level.
/// On each axis level i (amplitude 2i - L + 1 before scaling) carries the
/// binary-reflected Gray code i ^ (i >> 1), so for 16-QAM the bit pairs
/// 00, 01, 11, 10 map to -3, -1, +1, +3 (divided by sqrt(10)).
class Constellation {
public:
  static Constellation qam(int order);

  int order() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return q_; }
  /// Point indexed by its label.
  const std::vector<cplx>& points() const { return points_; }
  cplx point(int label) const { return points_[label]; }
  int bit(int label, int q) const { return (label >> (q_ - 1 - q)) & 1; }

  /// Label of the nearest point in Euclidean distance (per-axis slicer).
  int slice(cplx u) const;
  cplx nearest(cplx u) const { return points_[slice(u)]; }

  int levels_per_axis() const { return levels_; }
  double scale() const { return scale_; }

private:
  int q_ = 0;
  int levels_ = 0;
  double scale_ = 1.0;
  std::vector<cplx> points_;
  std::vector<int> level_to_gray_;
};

/// N_t x T matrix with rows p_n(t) = exp(j 2 pi n t / N_t) for n = 1..N_t
/// (row index n - 1), t = 0..T-1. Requires T divisible by N_t.
ComplexMatrix build_pilot_matrix(int n_t, int symbols);

/// J = (1/P) 1_P kron I_{N_cycle}, P = T / N_cycle.
ComplexMatrix ddst_matrix(int symbols, int n_cycle);

struct DdstPrecoded {
  ComplexMatrix d_tilde;  // D (I - J)
  ComplexMatrix e;        // D J
};

/// Row-wise perturbation for an N_t x T data matrix.
DdstPrecoded ddst_precode(const ComplexMatrix& d, const ComplexMatrix& j);

/// alpha = sqrt((1 - rho) / (1 - 1/P)).
double power_factor(double rho, int p);

struct DdstParams {
  double rho = 1.0 / 7.0;
  int n_cycle = 4;
  int p = 7;
  double alpha = 1.0;
  ComplexMatrix j;

  static DdstParams make(int symbols, int n_t, double rho);
};

/// Q-bit groups (MSB first) to constellation points.
std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation& c);

enum class Scheme { FullDdst, Mix, OpTdm, Op1P, Op2P };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);
inline bool is_op(Scheme s) { return s == Scheme::OpTdm || s == Scheme::Op1P || s == Scheme::Op2P; }

struct PilotRe {
  int k = 0;
  int t = 0;
  int n = 0;  // transmit antenna
  cplx value;
};

struct PlanConfig {
  Scheme scheme = Scheme::FullDdst;
  int subcarriers = 72;
  int symbols = 28;
  int n_t = 4;
  int slot_symbols = 14;
  double ddst_ratio = 1.0;  // Mix only
  double rho = 1.0 / 7.0;   // DDST schemes
  int pilot_symbols = 4;    // OP-TDM only
};

/// Resource allocation of one frame.
struct FramePlan {
  PlanConfig cfg;
  std::vector<int> k1;                 // DDST subcarriers, ascending
  std::vector<int> k2;                 // pure-data subcarriers, ascending
  std::vector<std::uint8_t> is_ddst;   // per subcarrier
  std::vector<int> pilot_symbols;      // OP: symbols reserved for pilots
  std::vector<std::uint8_t> is_pilot_symbol;  // per symbol
  std::vector<PilotRe> op_pilots;      // OP: every non-zero pilot RE
  /// Data REs (k, t) of each slot in mapping order (t-major, then k); the
  /// same positions are used on every transmit antenna.
  std::vector<std::vector<std::pair<int, int>>> slot_data_res;

  int subcarriers() const { return cfg.subcarriers; }
  int symbols() const { return cfg.symbols; }
  int n_t() const { return cfg.n_t; }
  int slots() const { return cfg.symbols / cfg.slot_symbols; }
  bool ddst(int k) const { return is_ddst[k] != 0; }
  bool data_re(int /*k*/, int t) const { return is_pilot_symbol[t] == 0; }
  /// Data REs per antenna per slot.
  int slot_capacity() const { return static_cast<int>(slot_data_res.front().size()); }
  int frame_capacity() const { return slot_capacity() * slots(); }
  /// Fraction of REs carrying data symbols.
  double omega() const;
};

FramePlan make_frame_plan(const PlanConfig& cfg);

struct TxFrame {
  ResourceGrid grid;          // s_n^k(t)
  ResourceGrid data;          // d_n^k(t) before perturbation (zero off data REs)
  ResourceGrid perturbation;  // e_n^k(t) on DDST subcarriers, zero elsewhere
};

/// `payload` holds frame_capacity() symbols per antenna, antenna-major, each
/// antenna's symbols in slot order following plan.slot_data_res.
TxFrame assemble_frame(const FramePlan& plan, const DdstParams& ddst,
                       std::span<const cplx> payload);

}  // namespace ddst
