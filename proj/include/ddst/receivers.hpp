// SPDX-License-Identifier: Apache-2.0
//
// Model-based receiver processing: block and per-RE channel estimation,
// interference cancellation, LMMSE detection, iterative hard refinement,
// OP baselines and max-log soft demapping.
//
// Per-subcarrier block matrices follow the N x T convention (rows are
// antennas, columns are symbols). vec() of an N_r x N_t channel matrix is
// column-major: element (m, n) sits at m + N_r n.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ddst/channel.hpp"
#include "ddst/grid.hpp"
#include "ddst/numerics.hpp"
#include "ddst/phy.hpp"

namespace ddst {

enum class EstimateMethod { LsBlock, LmmseBlock, LsPerRe, Despread, Interp, OpLmmse, Genie, Import };

struct ChannelEstimate {
  ChannelTensor h;                  // K x T x N_r x N_t
  EstimateMethod method = EstimateMethod::Genie;
  std::vector<std::uint8_t> valid;  // K x T, 1 where the estimate is defined

  bool is_valid(int k, int t) const {
    return valid[static_cast<std::size_t>(k) * h.symbols() + t] != 0;
  }
};

/// Per-RE detector output over the whole grid; entries off data REs are 0.
struct DetectionOutput {
  ResourceGrid u;                 // K x T x N_t
  std::vector<double> sigma2_eff; // K x T x N_t, same indexing as u
};

/// L_{n,q}^k(t), positive favours bit 1.
struct LlrGrid {
  int subcarriers = 0, symbols = 0, n_t = 0, q = 0;
  std::vector<double> llr;

  LlrGrid() = default;
  LlrGrid(int k, int t, int nt, int qq)
      : subcarriers(k), symbols(t), n_t(nt), q(qq),
        llr(static_cast<std::size_t>(k) * t * nt * qq, 0.0) {}
  std::size_t index(int k, int t, int n, int b) const {
    return ((static_cast<std::size_t>(k) * symbols + t) * n_t + n) * q + b;
  }
  double& operator()(int k, int t, int n, int b) { return llr[index(k, t, n, b)]; }
  double operator()(int k, int t, int n, int b) const { return llr[index(k, t, n, b)]; }
};

inline constexpr double kDefaultLlrClip = 30.0;
/// Lower bound applied to the effective noise variance so that noiseless
/// inputs still produce finite (clipped) LLRs.
inline constexpr double kMinEffectiveNoise = 1e-10;
/// Upper bound, reached when a stream has no usable channel (bias mu -> 0);
/// such streams are detected as 0 and demap to near-zero LLRs.
inline constexpr double kMaxEffectiveNoise = 1e10;

// ---------------------------------------------------------------------------
// Block-fading DDST receiver (one subcarrier at a time)

/// H_LS = Y P^H / (T sqrt(rho)); Y is N_r x T.
ComplexMatrix ls_block(const ComplexMatrix& y, const ComplexMatrix& pilot, double rho);

/// LMMSE smoothing matrix W = R^H (R + sigma2/(T rho) I)^{-1} acting on
/// column-major vec(H_LS).
ComplexMatrix lmmse_block_filter(const ComplexMatrix& r_spat, double sigma2, int symbols,
                                 double rho);
ComplexMatrix apply_vec_filter(const ComplexMatrix& w, const ComplexMatrix& h_ls);
ComplexMatrix lmmse_block(const ComplexMatrix& h_ls, const ComplexMatrix& r_spat, double sigma2,
                          int symbols, double rho);

/// Z = Y (I - J).
ComplexMatrix cancel_data(const ComplexMatrix& y, const ComplexMatrix& j);

/// U = (H^H H + (1 - 1/P) sigma2 I)^{-1} H^H Z with H already scaled by alpha.
ComplexMatrix lmmse_detect_block(const ComplexMatrix& z, const ComplexMatrix& h_scaled,
                                 double sigma2, int p);

/// Diagonal of (H^H H + reg I)^{-1} H^H H.
Eigen::VectorXd lmmse_bias(const ComplexMatrix& h, double reg);

/// D <- slice(U), then iterations - 1 updates D <- slice(U + D J).
ComplexMatrix iterative_hard_detect(const ComplexMatrix& u, const ComplexMatrix& j,
                                    const Constellation& c, int iterations);

// ---------------------------------------------------------------------------
// Per-RE processing for DDST subcarriers

/// h_{m,n}(t) = conj(p_n(t)) y_m^k(t) / sqrt(rho) for one DDST RE, N_r x N_t.
ComplexMatrix ls_per_re(const ResourceGrid& rx, int k, int t, const FramePlan& plan,
                        const ComplexMatrix& pilot, double rho);

/// Per-RE LS on every DDST subcarrier: |K1| x T x N_r x N_t.
ChannelTensor ls_per_re_all(const ResourceGrid& rx, const FramePlan& plan,
                            const ComplexMatrix& pilot, double rho);

/// Means over consecutive blocks of `block` symbols: input (S, T, N_r, N_t),
/// output (S, T/block, N_r, N_t).
ChannelTensor despread(const ChannelTensor& ls, int block);

/// Expands block features over DDST subcarriers to the full grid: each block
/// value is held over its `block` symbols, and subcarriers between two DDST
/// subcarriers are linearly interpolated (held constant beyond the ends).
ChannelEstimate mix_baseline_interpolate(const ChannelTensor& features, const FramePlan& plan,
                                         int block);

/// z = y - H (sqrt(rho) p(t)) on DDST subcarriers, z = y elsewhere.
ResourceGrid cancel_pilot(const ResourceGrid& rx, const ChannelEstimate& est,
                          const FramePlan& plan, const ComplexMatrix& pilot, double rho);

struct ReDetection {
  ComplexVector u;            // bias corrected
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma2_eff;
};

/// u = (H^H H + sigma2 I)^{-1} H^H z, bias corrected by 1/mu_n;
/// sigma2_eff,n = (1 - mu_n)/mu_n. `h` must already carry the alpha scaling
/// on DDST subcarriers.
ReDetection lmmse_detect_re(const ComplexVector& z, const ComplexMatrix& h, double sigma2);

namespace kernels {
/// Per-RE LMMSE over every data RE of the plan (alpha applied on DDST
/// subcarriers inside). Serial reference and OpenMP version are bitwise
/// identical.
void detect_grid_serial(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                        double alpha, double sigma2, DetectionOutput& out);
void detect_grid_omp(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                     double alpha, double sigma2, DetectionOutput& out);
}  // namespace kernels

DetectionOutput detect_grid(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                            double alpha, double sigma2);

// ---------------------------------------------------------------------------
// Soft demapping

/// Max-log LLRs of one symbol, clipped to +-clip. Throws DomainError if
/// sigma2_eff <= 0.
void soft_demap(cplx u, double sigma2_eff, const Constellation& c, double clip,
                std::span<double> out);
std::vector<double> soft_demap(cplx u, double sigma2_eff, const Constellation& c,
                               double clip = kDefaultLlrClip);

// ---------------------------------------------------------------------------
// Orthogonal-pilot baseline

/// LS channel observations of one transmit antenna at one time instant.
struct OpPilotGroup {
  int n = 0;
  double time = 0.0;      // symbol index (centroid for TDM blocks)
  std::vector<int> ks;    // subcarriers
  ComplexMatrix obs;      // ks.size() x N_r
  double noise_var = 0.0;
};

std::vector<OpPilotGroup> op_ls(const ResourceGrid& rx, const FramePlan& plan, double sigma2);

/// Separable Wiener interpolation of OP LS observations: frequency first
/// (per group), then time (per antenna and subcarrier) with the frequency
/// stage's posterior error as observation noise.
ChannelEstimate op_lmmse_ce(const ResourceGrid& rx, const FramePlan& plan,
                            const ChannelConfig& stats, double sigma2);

// ---------------------------------------------------------------------------
// Receiver chains

enum class ReceiverChain { OpLmmse, DdstLs, DdstLmmse, MixInterp };
enum class DespreadSpan { Cycle, Frame };

std::string chain_name(ReceiverChain c);
ReceiverChain parse_chain(const std::string& name);

struct ReceiverOptions {
  ReceiverChain chain = ReceiverChain::MixInterp;
  bool genie = false;
  int hard_iterations = 3;
  DespreadSpan despread_span = DespreadSpan::Frame;
  double llr_clip = kDefaultLlrClip;
};

struct ReceiverContext {
  const FramePlan* plan = nullptr;
  const DdstParams* ddst = nullptr;
  const Constellation* constellation = nullptr;
  const ComplexMatrix* pilot = nullptr;     // N_t x T DDST pilot
  const ChannelConfig* stats = nullptr;     // correlation model for OP Wiener
  const ComplexMatrix* r_spat = nullptr;    // for ddst-lmmse
  double sigma2 = 0.0;
};

struct ReceiverOutput {
  ChannelEstimate estimate;
  LlrGrid llr;
};

/// Throws ConfigError for chain/scheme combinations that do not apply.
void check_chain(ReceiverChain chain, Scheme scheme);

ReceiverOutput run_receiver(const ResourceGrid& rx, const ReceiverContext& ctx,
                            const ReceiverOptions& opts, const ChannelTensor* truth);

/// Detection and demapping given a full-grid channel estimate (pilot
/// cancellation, per-RE LMMSE, iterative refinement on DDST subcarriers).
LlrGrid detect_with_estimate(const ResourceGrid& rx, const ChannelEstimate& est,
                             const ReceiverContext& ctx, const ReceiverOptions& opts);

}  // namespace ddst
