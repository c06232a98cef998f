// SPDX-License-Identifier: Apache-2.0
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>

#include "ddst/error.hpp"
#include "ddst/harness.hpp"

namespace ddst {

namespace {

// Stream tags below the per-trial stream.
constexpr std::uint64_t kTagChannel = 1;
constexpr std::uint64_t kTagBits = 2;
constexpr std::uint64_t kTagNoise = 3;
// Trial-independent stream for R^Spat training realizations.
constexpr std::uint64_t kRspatStream = 0x5350415431ULL;

}  // namespace

ReceiverContext LinkSetup::context(double sigma2) const {
  ReceiverContext ctx;
  ctx.plan = &plan;
  ctx.ddst = plan.k1.empty() ? nullptr : &ddst;
  ctx.constellation = &constellation;
  ctx.pilot = &pilot;
  ctx.stats = &channel;
  ctx.r_spat = r_spat.size() ? &r_spat : nullptr;
  ctx.sigma2 = sigma2;
  return ctx;
}

LinkSetup make_link_setup(const SimulationConfig& cfg, std::shared_ptr<const LdpcCode> code) {
  cfg.validate();
  LinkSetup s;
  s.cfg = cfg;
  s.channel = cfg.channel_config();
  s.channel.validate();
  s.plan = make_frame_plan(cfg.plan_config());
  if (!s.plan.k1.empty()) s.ddst = DdstParams::make(cfg.symbols, cfg.n_t, cfg.rho);
  if (cfg.symbols % cfg.n_t == 0) s.pilot = build_pilot_matrix(cfg.n_t, cfg.symbols);
  s.constellation = Constellation::qam(cfg.modulation);
  s.code = code ? std::move(code)
                : std::make_shared<const LdpcCode>(LdpcCode::load_alist(resolve_code_path(cfg.code)));
  s.seg = segment_payload(s.bits_per_slot(), *s.code);
  s.decoder.scale = cfg.min_sum_scale;
  s.decoder.max_iterations = cfg.max_decoder_iterations;
  s.receiver = cfg.receiver_options();

  if (s.receiver.chain == ReceiverChain::DdstLmmse) {
    if (cfg.rspat_source == "genie") {
      s.r_spat = genie_spatial_covariance(s.channel);
    } else {
      RngStream rng(cfg.seed, kRspatStream);
      std::vector<ChannelRealization> training;
      for (int i = 0; i < cfg.rspat_training_realizations; ++i) {
        RngStream r = rng.derive(static_cast<std::uint64_t>(i));
        training.push_back(generate_channel(s.channel, r));
      }
      s.r_spat = estimate_spatial_covariance(training);
    }
  }

  const int tt = cfg.symbols;
  s.re_slot.assign(static_cast<std::size_t>(cfg.subcarriers) * tt, -1);
  s.re_pos.assign(s.re_slot.size(), -1);
  for (int slot = 0; slot < s.plan.slots(); ++slot) {
    const auto& res = s.plan.slot_data_res[slot];
    for (std::size_t i = 0; i < res.size(); ++i) {
      const std::size_t idx = static_cast<std::size_t>(res[i].first) * tt + res[i].second;
      s.re_slot[idx] = slot;
      s.re_pos[idx] = static_cast<int>(i);
    }
  }
  return s;
}

nlohmann::json describe_setup(const LinkSetup& s) {
  const auto& p = s.plan;
  nlohmann::json j{
      {"scheme", scheme_name(p.cfg.scheme)},
      {"subcarriers", p.subcarriers()},
      {"symbols", p.symbols()},
      {"slots", p.slots()},
      {"n_t", p.n_t()},
      {"n_r", s.cfg.n_r},
      {"ddst_subcarriers", p.k1},
      {"pilot_symbols", p.pilot_symbols},
      {"omega", p.omega()},
      {"data_res_per_antenna_per_slot", p.slot_capacity()},
      {"coded_bits_per_antenna_per_slot", s.bits_per_slot()},
      {"bits_per_symbol", s.constellation.bits_per_symbol()},
      {"code", {{"n", s.code->n()}, {"k", s.code->k()}, {"rate", s.code->rate()}}},
      {"segmentation",
       {{"codewords_per_antenna_per_slot", s.seg.codewords},
        {"shortened_bits", s.seg.shortened},
        {"punctured_bits", s.seg.punctured},
        {"padding_bits", s.seg.pad_bits},
        {"info_bits_per_codeword", s.info_bits_per_codeword()}}},
      {"codewords_per_frame", s.seg.codewords * p.slots() * p.n_t()},
      {"receiver", chain_name(s.receiver.chain)},
      {"doppler_hz", s.channel.doppler_hz()},
      {"symbol_duration_s", s.channel.symbol_duration_s()},
  };
  if (!p.k1.empty()) {
    j["ddst"] = {{"rho", s.ddst.rho}, {"alpha", s.ddst.alpha}, {"P", s.ddst.p},
                 {"n_cycle", s.ddst.n_cycle}, {"ddst_ratio", s.cfg.ddst_ratio}};
  }
  return j;
}

FrameSample make_sample(const LinkSetup& setup, std::uint64_t trial) {
  const RngStream tr = RngStream(setup.cfg.seed, 0).derive(trial);
  FrameSample s;
  s.trial = trial;
  RngStream ch_rng = tr.derive(kTagChannel);
  s.channel = generate_channel(setup.channel, ch_rng);

  RngStream bit_rng = tr.derive(kTagBits);
  const int nt = setup.plan.n_t(), slots = setup.plan.slots();
  const std::size_t kb = static_cast<std::size_t>(setup.info_bits_per_codeword()) * setup.seg.codewords;
  s.info.assign(nt, std::vector<std::vector<std::uint8_t>>(slots));
  s.coded.assign(nt, std::vector<std::vector<std::uint8_t>>(slots));
  std::vector<cplx> payload;
  payload.reserve(static_cast<std::size_t>(setup.plan.frame_capacity()) * nt);
  for (int n = 0; n < nt; ++n) {
    for (int slot = 0; slot < slots; ++slot) {
      auto& info = s.info[n][slot];
      info.resize(kb);
      for (auto& b : info) b = bit_rng.bit();
      s.coded[n][slot] = encode_segment(info, *setup.code, setup.seg);
      const auto sym = map_bits(s.coded[n][slot], setup.constellation);
      payload.insert(payload.end(), sym.begin(), sym.end());
    }
  }
  s.frame = assemble_frame(setup.plan, setup.ddst, payload);

  RngStream noise_rng = tr.derive(kTagNoise);
  s.unit_noise = complex_gaussian(static_cast<std::size_t>(setup.plan.subcarriers()) *
                                      setup.plan.symbols() * setup.cfg.n_r,
                                  1.0, noise_rng);
  return s;
}

ResourceGrid receive(const FrameSample& s, double sigma2) {
  if (!(sigma2 >= 0.0)) throw DomainError("receive: noise variance must be >= 0");
  const double sigma = std::sqrt(sigma2);
  std::vector<cplx> noise(s.unit_noise.size());
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = sigma * s.unit_noise[i];
  const auto& h = s.channel.h;
  ResourceGrid rx(h.subcarriers(), h.symbols(), h.n_r());
  kernels::apply_channel_omp(s.frame.grid, h, noise, rx);
  return rx;
}

int coded_bit_at(const LinkSetup& setup, const FrameSample& s, int k, int t, int n, int q) {
  const std::size_t idx = static_cast<std::size_t>(k) * setup.plan.symbols() + t;
  const int slot = setup.re_slot[idx];
  if (slot < 0) return -1;
  return s.coded[n][slot][static_cast<std::size_t>(setup.re_pos[idx]) *
                              setup.constellation.bits_per_symbol() + q];
}

void LinkCounts::merge(const LinkCounts& o) {
  nmse_err += o.nmse_err;
  nmse_ref += o.nmse_ref;
  raw_errors += o.raw_errors;
  raw_bits += o.raw_bits;
  info_errors += o.info_errors;
  info_bits += o.info_bits;
  block_errors += o.block_errors;
  blocks += o.blocks;
  frames += o.frames;
}

LinkCounts score_llrs(const LinkSetup& setup, const FrameSample& s, const LlrGrid& llr) {
  const auto& plan = setup.plan;
  const int q = setup.constellation.bits_per_symbol();
  if (llr.subcarriers != plan.subcarriers() || llr.symbols != plan.symbols() ||
      llr.n_t != plan.n_t() || llr.q != q) {
    throw DimensionError("score_llrs: LLR grid shape does not match the plan");
  }
  const auto& code = *setup.code;
  const auto& seg = setup.seg;
  const int kb = setup.info_bits_per_codeword();
  const std::size_t sent = static_cast<std::size_t>(seg.codewords) * seg.transmitted_per_codeword();
  LinkCounts c;
  c.frames = 1;
  std::vector<double> stream(setup.bits_per_slot());
  for (int n = 0; n < plan.n_t(); ++n) {
    for (int slot = 0; slot < plan.slots(); ++slot) {
      std::size_t i = 0;
      for (const auto& [k, t] : plan.slot_data_res[slot])
        for (int b = 0; b < q; ++b) stream[i++] = llr(k, t, n, b);
      const auto& coded = s.coded[n][slot];
      for (std::size_t b = 0; b < sent; ++b) c.raw_errors += (stream[b] > 0.0) != (coded[b] != 0);
      c.raw_bits += sent;
      for (int cw = 0; cw < seg.codewords; ++cw) {
        const auto full = recover_llrs(stream, cw, code, seg);
        const auto dec = ldpc_decode(full, code, setup.decoder);
        const auto info = segment_info(dec.info, code, seg);
        std::uint64_t errs = 0;
        for (int b = 0; b < kb; ++b) {
          errs += info[b] != s.info[n][slot][static_cast<std::size_t>(cw) * kb + b];
        }
        c.info_errors += errs;
        c.info_bits += kb;
        c.block_errors += errs > 0;
        c.blocks += 1;
      }
    }
  }
  return c;
}

double throughput(double bler, double omega, double code_rate, int q, int n_rb) {
  return n_rb * static_cast<double>(kResPerRb) * omega * code_rate * q * (1.0 - bler);
}

MetricsRecord make_record(const std::string& label, double snr_db, const LinkCounts& c,
                          const LinkSetup& setup) {
  MetricsRecord r;
  r.scheme = label;
  r.snr_db = snr_db;
  r.nmse = c.nmse_ref > 0.0 ? c.nmse_err / c.nmse_ref : std::nan("");
  r.ber_raw = c.raw_bits ? static_cast<double>(c.raw_errors) / c.raw_bits : 0.0;
  r.ber_coded = c.info_bits ? static_cast<double>(c.info_errors) / c.info_bits : 0.0;
  r.bler = c.blocks ? static_cast<double>(c.block_errors) / c.blocks : 0.0;
  r.throughput = throughput(r.bler, setup.plan.omega(), setup.code->rate(),
                            setup.constellation.bits_per_symbol(),
                            setup.plan.subcarriers() / kReSubcarriersPerRb);
  r.trials = c.frames;
  r.codewords = c.blocks;
  return r;
}

std::string variant_label(const SimulationConfig& cfg, bool genie) {
  return cfg.scheme + (genie ? "-genie" : "");
}

std::vector<MetricsRecord> run_sweep(const SimulationConfig& cfg) {
  return run_sweep(make_link_setup(cfg));
}

std::vector<MetricsRecord> run_sweep(const LinkSetup& setup) {
  const auto start = std::chrono::steady_clock::now();
  const auto& cfg = setup.cfg;
  const int trials = cfg.trials;
  const int nsnr = static_cast<int>(cfg.snr_db.size());
  const int nvar = cfg.genie_reference ? 2 : 1;
  std::vector<LinkCounts> per_trial(static_cast<std::size_t>(trials) * nsnr * nvar);
  const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (int i = 0; i < trials; ++i) {
    try {
      const FrameSample s = make_sample(setup, static_cast<std::uint64_t>(i));
      const auto& truth = s.channel.h;
      for (int si = 0; si < nsnr; ++si) {
        const double sigma2 = std::pow(10.0, -cfg.snr_db[si] / 10.0);
        const ResourceGrid rx = receive(s, sigma2);
        const ReceiverContext ctx = setup.context(sigma2);
        for (int v = 0; v < nvar; ++v) {
          ReceiverOptions opts = setup.receiver;
          opts.genie = v == 1;
          const ReceiverOutput out = run_receiver(rx, ctx, opts, &truth);
          LinkCounts c = score_llrs(setup, s, out.llr);
          for (std::size_t e = 0; e < truth.size(); ++e) {
            c.nmse_err += std::norm(out.estimate.h.data()[e] - truth.data()[e]);
            c.nmse_ref += std::norm(truth.data()[e]);
          }
          per_trial[(static_cast<std::size_t>(i) * nsnr + si) * nvar + v] = c;
        }
      }
    } catch (...) {
#pragma omp critical(ddst_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<MetricsRecord> records;
  for (int si = 0; si < nsnr; ++si) {
    for (int v = 0; v < nvar; ++v) {
      LinkCounts total;
      for (int i = 0; i < trials; ++i) {
        total.merge(per_trial[(static_cast<std::size_t>(i) * nsnr + si) * nvar + v]);
      }
      auto r = make_record(variant_label(cfg, v == 1), cfg.snr_db[si], total, setup);
      r.wall_time_s = wall;
      records.push_back(r);
    }
  }
  return records;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void emit_results(const std::vector<MetricsRecord>& records, const SimulationConfig& cfg,
                  const std::string& path, const nlohmann::json& extra) {
  if (records.empty()) throw DomainError("emit_results: no records");
  {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write results to '" + path + "'");
    out << "scheme,snr_db,nmse,ber_raw,ber_coded,bler,throughput,trials\n";
    for (const auto& r : records) {
      out << r.scheme << ',' << format_number(r.snr_db) << ',' << format_number(r.nmse) << ','
          << format_number(r.ber_raw) << ',' << format_number(r.ber_coded) << ','
          << format_number(r.bler) << ',' << format_number(r.throughput) << ',' << r.trials
          << '\n';
    }
    if (!out) throw IoError("write failed on '" + path + "'");
  }
  nlohmann::json side{
      {"config", config_to_json(cfg)},
      {"conventions",
       {{"snr", "SNR_dB = 10 log10(1 / sigma_w^2); unit average transmit power per antenna"},
        {"llr_sign", "L = log P(b=1)/P(b=0)"},
        {"llr_clip", cfg.llr_clip},
        {"min_sum_scale", cfg.min_sum_scale},
        {"max_decoder_iterations", cfg.max_decoder_iterations},
        {"bler_granularity", "per LDPC codeword"},
        {"ber_raw", "hard decisions on transmitted coded bits before decoding"},
        {"ber_coded", "information bits after decoding"},
        {"nmse", "sum |h_est - h|^2 / sum |h|^2 over all REs and trials"},
        {"trials", "frames"},
        {"noise_variance_at_receiver", "genie"},
        {"detection", "one-shot LMMSE with bias-corrected max-log demapping"},
        {"throughput", "N_RB * 168 * omega * code_rate * Q * (1 - BLER) bits per slot"}}},
      {"records", nlohmann::json::array()},
  };
  for (const auto& r : records) {
    side["records"].push_back({{"scheme", r.scheme}, {"snr_db", r.snr_db}, {"codewords", r.codewords}});
  }
  for (const auto& [k, v] : extra.items()) side[k] = v;
  std::ofstream js(path + ".json");
  if (!js) throw IoError("cannot write sidecar '" + path + ".json'");
  js << side.dump(2) << '\n';
  if (!js) throw IoError("write failed on '" + path + ".json'");
}

}  // namespace ddst
