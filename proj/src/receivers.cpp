// SPDX-License-Identifier: Apache-2.0
#include "ddst/receivers.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <string>

#include "ddst/error.hpp"

namespace ddst {

namespace {

// Diagonal loading floor for Wiener systems that become singular in the
// noiseless limit.
constexpr double kLoadingFloor = 1e-12;

ChannelEstimate make_estimate(int k, int t, int nr, int nt, EstimateMethod method) {
  ChannelEstimate e;
  e.h = ChannelTensor(k, t, nr, nt);
  e.method = method;
  e.valid.assign(static_cast<std::size_t>(k) * t, 1);
  return e;
}

// Bias correction for an unbiased-LMMSE output: gain 1/mu and effective noise
// (1 - mu)/mu, with a dead stream mapped to gain 0.
struct Debias {
  double gain, sigma2;
};

Debias debias(double mu) {
  if (!(mu > kMinEffectiveNoise)) return {0.0, kMaxEffectiveNoise};
  return {1.0 / mu, std::clamp((1.0 - mu) / mu, kMinEffectiveNoise, kMaxEffectiveNoise)};
}

}  // namespace

ComplexMatrix ls_block(const ComplexMatrix& y, const ComplexMatrix& pilot, double rho) {
  if (y.cols() != pilot.cols()) throw DimensionError("ls_block: Y and P differ in T");
  if (!(rho > 0.0)) throw DomainError("ls_block: rho must be positive");
  return y * pilot.adjoint() / (static_cast<double>(y.cols()) * std::sqrt(rho));
}

ComplexMatrix lmmse_block_filter(const ComplexMatrix& r_spat, double sigma2, int symbols,
                                 double rho) {
  if (r_spat.rows() != r_spat.cols()) throw DimensionError("lmmse_block: R must be square");
  const double c = sigma2 / (symbols * rho);
  ComplexMatrix a = r_spat;
  a.diagonal().array() += std::max(c, kLoadingFloor);
  // W = R^H A^{-1}, so W^H = A^{-1} R for Hermitian A.
  return hermitian_solve(a, r_spat).adjoint();
}

ComplexMatrix apply_vec_filter(const ComplexMatrix& w, const ComplexMatrix& h_ls) {
  const Eigen::Index nr = h_ls.rows(), nt = h_ls.cols();
  if (w.rows() != nr * nt || w.cols() != nr * nt) {
    throw DimensionError("lmmse_block: R size does not match N_r N_t");
  }
  ComplexVector v(nr * nt);
  for (Eigen::Index n = 0; n < nt; ++n)
    for (Eigen::Index m = 0; m < nr; ++m) v(m + nr * n) = h_ls(m, n);
  const ComplexVector out = w * v;
  ComplexMatrix h(nr, nt);
  for (Eigen::Index n = 0; n < nt; ++n)
    for (Eigen::Index m = 0; m < nr; ++m) h(m, n) = out(m + nr * n);
  return h;
}

ComplexMatrix lmmse_block(const ComplexMatrix& h_ls, const ComplexMatrix& r_spat, double sigma2,
                          int symbols, double rho) {
  return apply_vec_filter(lmmse_block_filter(r_spat, sigma2, symbols, rho), h_ls);
}

ComplexMatrix cancel_data(const ComplexMatrix& y, const ComplexMatrix& j) {
  if (y.cols() != j.rows()) throw DimensionError("cancel_data: Y and J differ in T");
  return y - y * j;
}

ComplexMatrix lmmse_detect_block(const ComplexMatrix& z, const ComplexMatrix& h_scaled,
                                 double sigma2, int p) {
  if (z.rows() != h_scaled.rows()) throw DimensionError("lmmse_detect_block: Z and H rows");
  ComplexMatrix gram = h_scaled.adjoint() * h_scaled;
  gram.diagonal().array() += (1.0 - 1.0 / p) * sigma2;
  return hermitian_solve(gram, h_scaled.adjoint() * z);
}

Eigen::VectorXd lmmse_bias(const ComplexMatrix& h, double reg) {
  const ComplexMatrix hh = h.adjoint() * h;
  ComplexMatrix gram = hh;
  gram.diagonal().array() += reg;
  return hermitian_solve(gram, hh).diagonal().real();
}

ComplexMatrix iterative_hard_detect(const ComplexMatrix& u, const ComplexMatrix& j,
                                    const Constellation& c, int iterations) {
  if (iterations < 1) throw DomainError("iterative_hard_detect: need at least one iteration");
  if (u.cols() != j.rows()) throw DimensionError("iterative_hard_detect: U and J differ in T");
  auto slice = [&c](const ComplexMatrix& x) {
    ComplexMatrix d(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) d.data()[i] = c.nearest(x.data()[i]);
    return d;
  };
  ComplexMatrix d = slice(u);
  for (int it = 1; it < iterations; ++it) d = slice(u + d * j);
  return d;
}

ComplexMatrix ls_per_re(const ResourceGrid& rx, int k, int t, const FramePlan& plan,
                        const ComplexMatrix& pilot, double rho) {
  if (k < 0 || k >= plan.subcarriers() || !plan.ddst(k)) {
    throw DomainError("ls_per_re: subcarrier " + std::to_string(k) + " carries no DDST pilot");
  }
  const double s = 1.0 / std::sqrt(rho);
  const auto y = rx.re(k, t);
  ComplexMatrix h(rx.antennas(), pilot.rows());
  for (Eigen::Index m = 0; m < h.rows(); ++m)
    for (Eigen::Index n = 0; n < h.cols(); ++n) h(m, n) = std::conj(pilot(n, t)) * y(m) * s;
  return h;
}

ChannelTensor ls_per_re_all(const ResourceGrid& rx, const FramePlan& plan,
                            const ComplexMatrix& pilot, double rho) {
  const int tt = rx.symbols();
  ChannelTensor out(static_cast<int>(plan.k1.size()), tt, rx.antennas(),
                    static_cast<int>(pilot.rows()));
  for (std::size_t i = 0; i < plan.k1.size(); ++i)
    for (int t = 0; t < tt; ++t)
      out.matrix(static_cast<int>(i), t) = ls_per_re(rx, plan.k1[i], t, plan, pilot, rho);
  return out;
}

ChannelTensor despread(const ChannelTensor& ls, int block) {
  if (block < 1 || ls.symbols() % block != 0) {
    throw DimensionError("despread: T=" + std::to_string(ls.symbols()) +
                         " is not a multiple of the block length " + std::to_string(block));
  }
  const int nb = ls.symbols() / block;
  ChannelTensor out(ls.subcarriers(), nb, ls.n_r(), ls.n_t());
  for (int s = 0; s < ls.subcarriers(); ++s) {
    for (int b = 0; b < nb; ++b) {
      auto o = out.matrix(s, b);
      o.setZero();
      for (int t = b * block; t < (b + 1) * block; ++t) o += ls.matrix(s, t);
      o /= static_cast<double>(block);
    }
  }
  return out;
}

ChannelEstimate mix_baseline_interpolate(const ChannelTensor& features, const FramePlan& plan,
                                         int block) {
  const auto& k1 = plan.k1;
  if (k1.size() < 2) throw DomainError("mix_baseline_interpolate: need at least 2 DDST subcarriers");
  if (features.subcarriers() != static_cast<int>(k1.size()) ||
      features.symbols() * block != plan.symbols()) {
    throw DimensionError("mix_baseline_interpolate: feature shape does not match the plan");
  }
  const int kk = plan.subcarriers(), tt = plan.symbols();
  auto est = make_estimate(kk, tt, features.n_r(), features.n_t(), EstimateMethod::Interp);
  std::size_t seg = 0;
  for (int k = 0; k < kk; ++k) {
    while (seg + 2 < k1.size() && k >= k1[seg + 1]) ++seg;
    double w = 0.0;  // weight of the upper neighbour
    std::size_t lo = seg;
    if (k <= k1.front()) {
      lo = 0;
    } else if (k >= k1.back()) {
      lo = k1.size() - 2;
      w = 1.0;
    } else {
      w = static_cast<double>(k - k1[seg]) / (k1[seg + 1] - k1[seg]);
    }
    for (int t = 0; t < tt; ++t) {
      const int b = t / block;
      est.h.matrix(k, t) = (1.0 - w) * features.matrix(static_cast<int>(lo), b) +
                           w * features.matrix(static_cast<int>(lo + 1), b);
    }
  }
  return est;
}

ResourceGrid cancel_pilot(const ResourceGrid& rx, const ChannelEstimate& est,
                          const FramePlan& plan, const ComplexMatrix& pilot, double rho) {
  if (est.h.subcarriers() != rx.subcarriers() || est.h.symbols() != rx.symbols() ||
      est.h.n_r() != rx.antennas() || est.h.n_t() != pilot.rows()) {
    throw DimensionError("cancel_pilot: estimate shape does not match the received grid");
  }
  ResourceGrid z = rx;
  const double sr = std::sqrt(rho);
  for (int k : plan.k1) {
    for (int t = 0; t < rx.symbols(); ++t) {
      if (!est.is_valid(k, t)) {
        throw DomainError("cancel_pilot: no channel estimate at (k=" + std::to_string(k) +
                          ", t=" + std::to_string(t) + ")");
      }
      z.re(k, t) -= est.h.matrix(k, t) * (sr * pilot.col(t));
    }
  }
  return z;
}

ReDetection lmmse_detect_re(const ComplexVector& z, const ComplexMatrix& h, double sigma2) {
  if (z.size() != h.rows()) throw DimensionError("lmmse_detect_re: z and H rows differ");
  const Eigen::Index nt = h.cols();
  ComplexMatrix rhs(nt, nt + 1);
  rhs.leftCols(nt) = h.adjoint() * h;
  rhs.col(nt) = h.adjoint() * z;
  ComplexMatrix gram = rhs.leftCols(nt);
  gram.diagonal().array() += sigma2;
  const ComplexMatrix sol = hermitian_solve(gram, rhs);
  ReDetection out;
  out.mu = sol.leftCols(nt).diagonal().real();
  out.u = sol.col(nt);
  out.sigma2_eff.resize(nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    const Debias d = debias(out.mu(n));
    out.u(n) *= d.gain;
    out.sigma2_eff(n) = d.sigma2;
  }
  return out;
}

namespace kernels {

namespace {

void detect_subcarrier(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                       double alpha, double sigma2, int k, DetectionOutput& out) {
  const double scale = plan.ddst(k) ? alpha : 1.0;
  for (int t = 0; t < plan.symbols(); ++t) {
    if (!plan.data_re(k, t)) continue;
    const ComplexMatrix hk = scale * h.matrix(k, t);
    const auto det = lmmse_detect_re(z.re(k, t), hk, sigma2);
    out.u.re(k, t) = det.u;
    for (int n = 0; n < h.n_t(); ++n) out.sigma2_eff[out.u.index(k, t, n)] = det.sigma2_eff(n);
  }
}

void prepare(const ResourceGrid& z, const ChannelTensor& h, DetectionOutput& out) {
  if (z.subcarriers() != h.subcarriers() || z.symbols() != h.symbols() ||
      z.antennas() != h.n_r()) {
    throw DimensionError("detect_grid: estimate shape does not match the received grid");
  }
  out.u = ResourceGrid(h.subcarriers(), h.symbols(), h.n_t());
  out.sigma2_eff.assign(out.u.size(), 0.0);
}

}  // namespace

void detect_grid_serial(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                        double alpha, double sigma2, DetectionOutput& out) {
  prepare(z, h, out);
  for (int k = 0; k < plan.subcarriers(); ++k) detect_subcarrier(z, h, plan, alpha, sigma2, k, out);
}

void detect_grid_omp(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                     double alpha, double sigma2, DetectionOutput& out) {
  prepare(z, h, out);
  std::exception_ptr failure;
  const int kk = plan.subcarriers();
#pragma omp parallel for schedule(static)
  for (int k = 0; k < kk; ++k) {
    try {
      detect_subcarrier(z, h, plan, alpha, sigma2, k, out);
    } catch (...) {
#pragma omp critical(ddst_detect_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kernels

DetectionOutput detect_grid(const ResourceGrid& z, const ChannelTensor& h, const FramePlan& plan,
                            double alpha, double sigma2) {
  DetectionOutput out;
  kernels::detect_grid_omp(z, h, plan, alpha, sigma2, out);
  return out;
}

void soft_demap(cplx u, double sigma2_eff, const Constellation& c, double clip,
                std::span<double> out) {
  if (!(sigma2_eff > 0.0)) throw DomainError("soft_demap: sigma2_eff must be positive");
  const int half = c.bits_per_symbol() / 2;
  const int levels = c.levels_per_axis();
  if (static_cast<int>(out.size()) != 2 * half) throw DimensionError("soft_demap: output size");
  // Square Gray QAM separates per axis: the other axis' minimum distance is
  // common to both hypotheses and cancels.
  auto axis = [&](double x, int offset) {
    for (int b = 0; b < half; ++b) {
      double d0 = std::numeric_limits<double>::infinity(), d1 = d0;
      for (int i = 0; i < levels; ++i) {
        const double a = (2 * i - levels + 1) / c.scale();
        const double d = (x - a) * (x - a);
        const int gray = i ^ (i >> 1);
        if ((gray >> (half - 1 - b)) & 1) {
          d1 = std::min(d1, d);
        } else {
          d0 = std::min(d0, d);
        }
      }
      out[offset + b] = std::clamp((d0 - d1) / sigma2_eff, -clip, clip);
    }
  };
  axis(u.real(), 0);
  axis(u.imag(), half);
}

std::vector<double> soft_demap(cplx u, double sigma2_eff, const Constellation& c, double clip) {
  std::vector<double> out(c.bits_per_symbol());
  soft_demap(u, sigma2_eff, c, clip, out);
  return out;
}

std::vector<OpPilotGroup> op_ls(const ResourceGrid& rx, const FramePlan& plan, double sigma2) {
  if (plan.op_pilots.empty()) throw DomainError("op_ls: plan has no orthogonal pilots");
  const int kk = plan.subcarriers(), nt = plan.n_t(), nr = rx.antennas();
  std::vector<OpPilotGroup> groups;
  if (plan.cfg.scheme == Scheme::OpTdm) {
    const int tp = static_cast<int>(plan.pilot_symbols.size());
    const ComplexMatrix p = build_pilot_matrix(nt, tp);
    double centroid = 0.0;
    for (int t : plan.pilot_symbols) centroid += t;
    centroid /= tp;
    for (int n = 0; n < nt; ++n) {
      OpPilotGroup g;
      g.n = n;
      g.time = centroid;
      g.noise_var = sigma2 / tp;
      g.obs.resize(kk, nr);
      for (int k = 0; k < kk; ++k) g.ks.push_back(k);
      groups.push_back(std::move(g));
    }
    ComplexMatrix yp(nr, tp);
    for (int k = 0; k < kk; ++k) {
      for (int i = 0; i < tp; ++i) yp.col(i) = rx.re(k, plan.pilot_symbols[i]);
      const ComplexMatrix h = yp * p.adjoint() / static_cast<double>(tp);
      for (int n = 0; n < nt; ++n) groups[n].obs.row(k) = h.col(n).transpose();
    }
    return groups;
  }
  // Comb pilots: one group per (pilot symbol, antenna).
  std::map<std::pair<int, int>, std::vector<const PilotRe*>> by_group;
  for (const auto& pr : plan.op_pilots) by_group[{pr.t, pr.n}].push_back(&pr);
  for (const auto& [key, res] : by_group) {
    OpPilotGroup g;
    g.time = key.first;
    g.n = key.second;
    g.noise_var = sigma2;
    g.obs.resize(static_cast<Eigen::Index>(res.size()), nr);
    for (std::size_t i = 0; i < res.size(); ++i) {
      const PilotRe& pr = *res[i];
      g.ks.push_back(pr.k);
      g.obs.row(static_cast<Eigen::Index>(i)) =
          (rx.re(pr.k, pr.t) * (std::conj(pr.value) / std::norm(pr.value))).transpose();
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

ChannelEstimate op_lmmse_ce(const ResourceGrid& rx, const FramePlan& plan,
                            const ChannelConfig& stats, double sigma2) {
  const auto groups = op_ls(rx, plan, sigma2);
  const int kk = plan.subcarriers(), tt = plan.symbols(), nt = plan.n_t(), nr = rx.antennas();

  // Frequency stage.
  std::vector<ComplexMatrix> freq(groups.size());     // K x N_r per group
  std::vector<Eigen::VectorXd> err(groups.size());    // posterior MSE per k
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& grp = groups[g];
    const Eigen::Index np = static_cast<Eigen::Index>(grp.ks.size());
    ComplexMatrix r(np, np), c(kk, np);
    for (Eigen::Index i = 0; i < np; ++i)
      for (Eigen::Index j = 0; j < np; ++j)
        r(i, j) = frequency_correlation(stats, grp.ks[i] - grp.ks[j]);
    r.diagonal().array() += std::max(grp.noise_var, kLoadingFloor);
    for (int k = 0; k < kk; ++k)
      for (Eigen::Index j = 0; j < np; ++j) c(k, j) = frequency_correlation(stats, k - grp.ks[j]);
    const ComplexMatrix w = hermitian_solve(r, c.adjoint()).adjoint();
    freq[g] = w * grp.obs;
    err[g].resize(kk);
    for (int k = 0; k < kk; ++k) {
      const double e = 1.0 - (w.row(k) * c.row(k).adjoint())(0, 0).real();
      err[g](k) = std::max(e, kLoadingFloor);
    }
  }

  // Time stage, per transmit antenna.
  auto est = make_estimate(kk, tt, nr, nt, EstimateMethod::OpLmmse);
  for (int n = 0; n < nt; ++n) {
    std::vector<std::size_t> mine;
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (groups[g].n == n) mine.push_back(g);
    if (mine.empty()) throw DomainError("op_lmmse_ce: antenna without pilots");
    const Eigen::Index ng = static_cast<Eigen::Index>(mine.size());
    ComplexMatrix ct(tt, ng);
    for (int t = 0; t < tt; ++t)
      for (Eigen::Index i = 0; i < ng; ++i)
        ct(t, i) = time_correlation(stats, t - groups[mine[i]].time);
    for (int k = 0; k < kk; ++k) {
      ComplexMatrix r(ng, ng);
      for (Eigen::Index i = 0; i < ng; ++i) {
        for (Eigen::Index j = 0; j < ng; ++j)
          r(i, j) = time_correlation(stats, groups[mine[i]].time - groups[mine[j]].time);
        r(i, i) += err[mine[i]](k);
      }
      const ComplexMatrix w = hermitian_solve(r, ct.adjoint()).adjoint();  // T x ng
      for (int t = 0; t < tt; ++t) {
        for (int m = 0; m < nr; ++m) {
          cplx acc = 0.0;
          for (Eigen::Index i = 0; i < ng; ++i) acc += w(t, i) * freq[mine[i]](k, m);
          est.h(k, t, m, n) = acc;
        }
      }
    }
  }
  return est;
}

std::string chain_name(ReceiverChain c) {
  switch (c) {
    case ReceiverChain::OpLmmse: return "op-lmmse";
    case ReceiverChain::DdstLs: return "ddst-ls";
    case ReceiverChain::DdstLmmse: return "ddst-lmmse";
    case ReceiverChain::MixInterp: return "mix-interp";
  }
  return "unknown";
}

ReceiverChain parse_chain(const std::string& name) {
  for (auto c : {ReceiverChain::OpLmmse, ReceiverChain::DdstLs, ReceiverChain::DdstLmmse,
                 ReceiverChain::MixInterp}) {
    if (chain_name(c) == name) return c;
  }
  throw ConfigError("unknown receiver '" + name +
                    "' (expected op-lmmse, ddst-ls, ddst-lmmse or mix-interp)");
}

void check_chain(ReceiverChain chain, Scheme scheme) {
  bool ok = false;
  switch (chain) {
    case ReceiverChain::OpLmmse: ok = is_op(scheme); break;
    case ReceiverChain::DdstLs:
    case ReceiverChain::DdstLmmse: ok = scheme == Scheme::FullDdst; break;
    case ReceiverChain::MixInterp: ok = scheme == Scheme::FullDdst || scheme == Scheme::Mix; break;
  }
  if (!ok) {
    throw ConfigError("receiver '" + chain_name(chain) + "' cannot process scheme '" +
                      scheme_name(scheme) + "'");
  }
}

namespace {

void demap_grid(const DetectionOutput& det, const FramePlan& plan, const Constellation& c,
                double clip, LlrGrid& llr) {
  const int q = c.bits_per_symbol();
  for (int k = 0; k < plan.subcarriers(); ++k) {
    for (int t = 0; t < plan.symbols(); ++t) {
      if (!plan.data_re(k, t)) continue;
      for (int n = 0; n < plan.n_t(); ++n) {
        const std::size_t i = det.u.index(k, t, n);
        soft_demap(det.u.data()[i], det.sigma2_eff[i], c, clip,
                   std::span<double>(&llr.llr[llr.index(k, t, n, 0)], q));
      }
    }
  }
}

// On DDST subcarriers u estimates d - e; refine with the hard-decision loop
// and replace u by u + D J.
void refine_ddst(DetectionOutput& det, const FramePlan& plan, const DdstParams& ddst,
                 const Constellation& c, int iterations) {
  for (int k : plan.k1) {
    const ComplexMatrix u = det.u.subcarrier_matrix(k);
    const ComplexMatrix d = iterative_hard_detect(u, ddst.j, c, iterations);
    det.u.set_subcarrier_matrix(k, u + d * ddst.j);
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) throw ConfigError(std::string("receiver context is missing ") + what);
}

}  // namespace

LlrGrid detect_with_estimate(const ResourceGrid& rx, const ChannelEstimate& est,
                             const ReceiverContext& ctx, const ReceiverOptions& opts) {
  require(ctx.plan, "the frame plan");
  require(ctx.constellation, "the constellation");
  const FramePlan& plan = *ctx.plan;
  const bool ddst = !plan.k1.empty();
  double alpha = 1.0;
  ResourceGrid z;
  if (ddst) {
    require(ctx.ddst, "DDST parameters");
    require(ctx.pilot, "the pilot matrix");
    alpha = ctx.ddst->alpha;
    z = cancel_pilot(rx, est, plan, *ctx.pilot, ctx.ddst->rho);
  } else {
    z = rx;
  }
  DetectionOutput det = detect_grid(z, est.h, plan, alpha, ctx.sigma2);
  if (ddst) refine_ddst(det, plan, *ctx.ddst, *ctx.constellation, opts.hard_iterations);
  LlrGrid llr(plan.subcarriers(), plan.symbols(), plan.n_t(),
              ctx.constellation->bits_per_symbol());
  demap_grid(det, plan, *ctx.constellation, opts.llr_clip, llr);
  return llr;
}

ReceiverOutput run_receiver(const ResourceGrid& rx, const ReceiverContext& ctx,
                            const ReceiverOptions& opts, const ChannelTensor* truth) {
  require(ctx.plan, "the frame plan");
  require(ctx.constellation, "the constellation");
  const FramePlan& plan = *ctx.plan;
  check_chain(opts.chain, plan.cfg.scheme);
  if (opts.genie) require(truth, "the true channel for genie mode");
  const int kk = plan.subcarriers(), tt = plan.symbols(), nt = plan.n_t(), nr = rx.antennas();
  ReceiverOutput out;

  switch (opts.chain) {
    case ReceiverChain::OpLmmse: {
      if (opts.genie) {
        out.estimate = make_estimate(kk, tt, nr, nt, EstimateMethod::Genie);
        out.estimate.h = *truth;
      } else {
        require(ctx.stats, "channel statistics");
        out.estimate = op_lmmse_ce(rx, plan, *ctx.stats, ctx.sigma2);
      }
      out.llr = detect_with_estimate(rx, out.estimate, ctx, opts);
      break;
    }
    case ReceiverChain::DdstLs:
    case ReceiverChain::DdstLmmse: {
      require(ctx.ddst, "DDST parameters");
      require(ctx.pilot, "the pilot matrix");
      const DdstParams& dp = *ctx.ddst;
      const bool lmmse = opts.chain == ReceiverChain::DdstLmmse && !opts.genie;
      ComplexMatrix w;
      if (lmmse) {
        require(ctx.r_spat, "the spatial covariance");
        w = lmmse_block_filter(*ctx.r_spat, ctx.sigma2, tt, dp.rho);
      }
      out.estimate = make_estimate(kk, tt, nr, nt,
                                   opts.genie ? EstimateMethod::Genie
                                   : lmmse    ? EstimateMethod::LmmseBlock
                                              : EstimateMethod::LsBlock);
      DetectionOutput det;
      det.u = ResourceGrid(kk, tt, nt);
      det.sigma2_eff.assign(det.u.size(), 0.0);
      const double reg = (1.0 - 1.0 / dp.p) * ctx.sigma2;
      for (int k = 0; k < kk; ++k) {
        const ComplexMatrix y = rx.subcarrier_matrix(k);
        ComplexMatrix h;
        if (opts.genie) {
          h = ComplexMatrix::Zero(nr, nt);
          for (int t = 0; t < tt; ++t) h += truth->matrix(k, t);
          h /= static_cast<double>(tt);
        } else {
          h = ls_block(y, *ctx.pilot, dp.rho);
          if (lmmse) h = apply_vec_filter(w, h);
        }
        for (int t = 0; t < tt; ++t) out.estimate.h.matrix(k, t) = h;
        const ComplexMatrix hs = dp.alpha * h;
        ComplexMatrix u = lmmse_detect_block(cancel_data(y, dp.j), hs, ctx.sigma2, dp.p);
        const Eigen::VectorXd mu = lmmse_bias(hs, reg);
        for (int n = 0; n < nt; ++n) {
          const Debias d = debias(mu(n));
          u.row(n) *= d.gain;
          for (int t = 0; t < tt; ++t) det.sigma2_eff[det.u.index(k, t, n)] = d.sigma2;
        }
        det.u.set_subcarrier_matrix(k, u);
      }
      refine_ddst(det, plan, dp, *ctx.constellation, opts.hard_iterations);
      out.llr = LlrGrid(kk, tt, nt, ctx.constellation->bits_per_symbol());
      demap_grid(det, plan, *ctx.constellation, opts.llr_clip, out.llr);
      break;
    }
    case ReceiverChain::MixInterp: {
      if (opts.genie) {
        out.estimate = make_estimate(kk, tt, nr, nt, EstimateMethod::Genie);
        out.estimate.h = *truth;
      } else {
        require(ctx.ddst, "DDST parameters");
        require(ctx.pilot, "the pilot matrix");
        const int block = opts.despread_span == DespreadSpan::Cycle ? ctx.ddst->n_cycle : tt;
        const ChannelTensor ls = ls_per_re_all(rx, plan, *ctx.pilot, ctx.ddst->rho);
        out.estimate = mix_baseline_interpolate(despread(ls, block), plan, block);
      }
      out.llr = detect_with_estimate(rx, out.estimate, ctx, opts);
      break;
    }
  }
  return out;
}

}  // namespace ddst
