// SPDX-License-Identifier: Apache-2.0
#include "ddst/phy.hpp"

#include <algorithm>
#include <cmath>

#include "ddst/error.hpp"

namespace ddst {

Constellation Constellation::qam(int order) {
  int q = 0;
  while ((1 << q) < order) ++q;
  if (order < 4 || (1 << q) != order || q % 2 != 0) {
    throw ConfigError("Constellation: order must be a square power of two >= 4, got " +
                      std::to_string(order));
  }
  Constellation c;
  c.q_ = q;
  c.levels_ = 1 << (q / 2);
  const int l = c.levels_;
  c.scale_ = std::sqrt(2.0 * (l * l - 1) / 3.0);
  c.level_to_gray_.resize(l);
  for (int i = 0; i < l; ++i) c.level_to_gray_[i] = i ^ (i >> 1);
  c.points_.resize(order);
  const int half = q / 2;
  for (int i = 0; i < l; ++i) {
    for (int k = 0; k < l; ++k) {
      const int label = (c.level_to_gray_[i] << half) | c.level_to_gray_[k];
      c.points_[label] = cplx(2 * i - l + 1, 2 * k - l + 1) / c.scale_;
    }
  }
  return c;
}

int Constellation::slice(cplx u) const {
  if (std::isnan(u.real()) || std::isnan(u.imag())) throw DomainError("slice: NaN input");
  auto level = [this](double x) {
    const double v = std::round((x * scale_ + levels_ - 1) / 2.0);
    return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(levels_ - 1)));
  };
  return (level_to_gray_[level(u.real())] << (q_ / 2)) | level_to_gray_[level(u.imag())];
}

ComplexMatrix build_pilot_matrix(int n_t, int symbols) {
  if (n_t < 1 || symbols < 1 || symbols % n_t != 0) {
    throw DimensionError("build_pilot_matrix: T=" + std::to_string(symbols) +
                         " is not a multiple of N_t=" + std::to_string(n_t));
  }
  ComplexMatrix p(n_t, symbols);
  for (int i = 0; i < n_t; ++i) {
    for (int t = 0; t < symbols; ++t) {
      // Reduce the exponent modulo N_t so entries are exact roots of unity.
      const int r = ((i + 1) * t) % n_t;
      p(i, t) = r == 0 ? cplx(1.0, 0.0) : std::polar(1.0, 2.0 * kPi * r / n_t);
    }
  }
  return p;
}

ComplexMatrix ddst_matrix(int symbols, int n_cycle) {
  if (n_cycle < 1 || symbols < 1 || symbols % n_cycle != 0) {
    throw DimensionError("ddst_matrix: T=" + std::to_string(symbols) +
                         " is not a multiple of N_cycle=" + std::to_string(n_cycle));
  }
  const int p = symbols / n_cycle;
  return kron(ComplexMatrix::Constant(p, p, 1.0 / p),
              ComplexMatrix::Identity(n_cycle, n_cycle));
}

DdstPrecoded ddst_precode(const ComplexMatrix& d, const ComplexMatrix& j) {
  if (j.rows() != j.cols() || d.cols() != j.rows()) {
    throw DimensionError("ddst_precode: D columns must match the size of J");
  }
  DdstPrecoded out;
  out.e = d * j;
  out.d_tilde = d - out.e;
  return out;
}

double power_factor(double rho, int p) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("power_factor: rho must be in (0, 1)");
  if (p <= 1) throw DomainError("power_factor: P must exceed 1");
  return std::sqrt((1.0 - rho) / (1.0 - 1.0 / p));
}

DdstParams DdstParams::make(int symbols, int n_t, double rho) {
  DdstParams d;
  d.rho = rho;
  d.n_cycle = n_t;
  d.j = ddst_matrix(symbols, n_t);
  d.p = symbols / n_t;
  d.alpha = power_factor(rho, d.p);
  return d;
}

std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  const int q = c.bits_per_symbol();
  if (bits.size() % q != 0) {
    throw DimensionError("map_bits: " + std::to_string(bits.size()) +
                         " bits is not a multiple of Q=" + std::to_string(q));
  }
  std::vector<cplx> out(bits.size() / q);
  for (std::size_t s = 0; s < out.size(); ++s) {
    int label = 0;
    for (int b = 0; b < q; ++b) label = (label << 1) | (bits[s * q + b] & 1);
    out[s] = c.point(label);
  }
  return out;
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::FullDdst: return "full-ddst";
    case Scheme::Mix: return "mix";
    case Scheme::OpTdm: return "op-tdm";
    case Scheme::Op1P: return "op-1p";
    case Scheme::Op2P: return "op-2p";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::FullDdst, Scheme::Mix, Scheme::OpTdm, Scheme::Op1P, Scheme::Op2P}) {
    if (scheme_name(s) == name) return s;
  }
  throw ConfigError("unknown scheme '" + name +
                    "' (expected full-ddst, mix, op-tdm, op-1p or op-2p)");
}

double FramePlan::omega() const {
  const int data_symbols =
      static_cast<int>(std::count(is_pilot_symbol.begin(), is_pilot_symbol.end(), 0));
  return static_cast<double>(data_symbols) / symbols();
}

FramePlan make_frame_plan(const PlanConfig& cfg) {
  const int kk = cfg.subcarriers, tt = cfg.symbols, nt = cfg.n_t;
  if (kk < 1 || tt < 1 || nt < 1) throw ConfigError("frame plan: K, T and N_t must be >= 1");
  if (cfg.slot_symbols < 1 || tt % cfg.slot_symbols != 0) {
    throw ConfigError("frame plan: T must be a multiple of slot_symbols");
  }
  FramePlan plan;
  plan.cfg = cfg;
  plan.is_ddst.assign(kk, 0);
  plan.is_pilot_symbol.assign(tt, 0);

  const bool ddst = cfg.scheme == Scheme::FullDdst || cfg.scheme == Scheme::Mix;
  if (ddst) {
    if (tt % nt != 0 || tt / nt < 2) {
      throw ConfigError("frame plan: DDST needs T a multiple of N_t with P = T/N_t >= 2");
    }
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw ConfigError("frame plan: rho must be in (0, 1)");
    int n_ddst = kk;
    if (cfg.scheme == Scheme::Mix) {
      const double exact = cfg.ddst_ratio * kk;
      n_ddst = static_cast<int>(std::lround(exact));
      if (!(cfg.ddst_ratio > 0.0 && cfg.ddst_ratio <= 1.0) || std::abs(exact - n_ddst) > 1e-9 ||
          n_ddst < 1) {
        throw ConfigError("frame plan: ddst_ratio * K must be a positive integer");
      }
    }
    // Uniform stride starting at subcarrier 0.
    for (int i = 0; i < n_ddst; ++i) {
      plan.is_ddst[static_cast<int>((static_cast<long long>(i) * kk) / n_ddst)] = 1;
    }
  } else if (cfg.scheme == Scheme::OpTdm) {
    const int tp = cfg.pilot_symbols;
    if (tp < nt || tp % nt != 0 || tp >= tt) {
      throw ConfigError("frame plan: OP-TDM needs pilot_symbols a multiple of N_t and < T");
    }
    const int start = (tt - tp) / 2;
    const ComplexMatrix p = build_pilot_matrix(nt, tp);
    for (int i = 0; i < tp; ++i) {
      const int t = start + i;
      plan.pilot_symbols.push_back(t);
      for (int k = 0; k < kk; ++k)
        for (int n = 0; n < nt; ++n) plan.op_pilots.push_back({k, t, n, p(n, i)});
    }
  } else {
    std::vector<int> local{2};
    if (cfg.scheme == Scheme::Op2P) local.push_back(11);
    if (cfg.slot_symbols <= local.back()) {
      throw ConfigError("frame plan: slot too short for the comb pilot pattern");
    }
    if (kk < nt) throw ConfigError("frame plan: comb pilots need K >= N_t");
    const ComplexMatrix p = build_pilot_matrix(nt, nt);
    for (int s = 0; s < tt / cfg.slot_symbols; ++s) {
      for (int l : local) {
        const int t = s * cfg.slot_symbols + l;
        plan.pilot_symbols.push_back(t);
        for (int k = 0; k < kk; ++k) {
          const int n = k % nt;
          plan.op_pilots.push_back({k, t, n, p(n, (k / nt) % nt)});
        }
      }
    }
  }
  for (int t : plan.pilot_symbols) plan.is_pilot_symbol[t] = 1;
  for (int k = 0; k < kk; ++k) (plan.is_ddst[k] ? plan.k1 : plan.k2).push_back(k);

  plan.slot_data_res.resize(tt / cfg.slot_symbols);
  for (int s = 0; s < plan.slots(); ++s) {
    for (int t = s * cfg.slot_symbols; t < (s + 1) * cfg.slot_symbols; ++t) {
      if (plan.is_pilot_symbol[t]) continue;
      for (int k = 0; k < kk; ++k) plan.slot_data_res[s].emplace_back(k, t);
    }
    if (plan.slot_data_res[s].size() != plan.slot_data_res[0].size()) {
      throw ConfigError("frame plan: slots have unequal data capacity");
    }
  }
  return plan;
}

TxFrame assemble_frame(const FramePlan& plan, const DdstParams& ddst,
                       std::span<const cplx> payload) {
  const int kk = plan.subcarriers(), tt = plan.symbols(), nt = plan.n_t();
  const std::size_t cap = static_cast<std::size_t>(plan.frame_capacity());
  if (payload.size() != cap * nt) {
    throw DimensionError("assemble_frame: payload has " + std::to_string(payload.size()) +
                         " symbols, plan capacity is " + std::to_string(cap * nt));
  }
  TxFrame f{ResourceGrid(kk, tt, nt), ResourceGrid(kk, tt, nt), ResourceGrid(kk, tt, nt)};
  for (int n = 0; n < nt; ++n) {
    std::size_t i = n * cap;
    for (const auto& res : plan.slot_data_res)
      for (const auto& [k, t] : res) f.data(k, t, n) = payload[i++];
  }
  f.grid = f.data;
  if (!plan.k1.empty()) {
    if (ddst.j.rows() != tt || ddst.n_cycle != nt) {
      throw DimensionError("assemble_frame: DDST parameters do not match the frame");
    }
    const ComplexMatrix p = build_pilot_matrix(nt, tt);
    const double sr = std::sqrt(ddst.rho);
    for (int k : plan.k1) {
      const auto pre = ddst_precode(f.data.subcarrier_matrix(k), ddst.j);
      f.perturbation.set_subcarrier_matrix(k, pre.e);
      f.grid.set_subcarrier_matrix(k, sr * p + ddst.alpha * pre.d_tilde);
    }
  }
  for (const auto& pr : plan.op_pilots) f.grid(pr.k, pr.t, pr.n) = pr.value;
  return f;
}

}  // namespace ddst
