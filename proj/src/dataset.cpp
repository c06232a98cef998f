// SPDX-License-Identifier: Apache-2.0
#include "ddst/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "ddst/container.hpp"
#include "ddst/error.hpp"

namespace ddst {

using nlohmann::json;

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw ConfigError("unknown split '" + s + "' (expected train, val or test)");
}

std::string split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

std::uint64_t split_offset(Split s) {
  // Far beyond any practical sweep length so that splits never share trials.
  return static_cast<std::uint64_t>(s) << 40;
}

std::string sample_name(std::size_t i, const std::string& kind) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%06zu/", i);
  return buf + kind;
}

ScoreMode parse_score_mode(const std::string& s) {
  if (s == "estimates") return ScoreMode::Estimates;
  if (s == "llrs") return ScoreMode::Llrs;
  throw ConfigError("unknown score mode '" + s + "' (expected estimates or llrs)");
}

void export_dataset(const SimulationConfig& cfg, Split split, std::size_t samples,
                    const std::string& out_dir) {
  const Scheme scheme = parse_scheme(cfg.scheme);
  if (scheme != Scheme::FullDdst && scheme != Scheme::Mix) {
    throw ConfigError("export-dataset needs scheme full-ddst or mix, got '" + cfg.scheme + "'");
  }
  if (samples == 0) throw ConfigError("export-dataset: --samples must be >= 1");
  const LinkSetup setup = make_link_setup(cfg);
  const auto& plan = setup.plan;
  const std::int64_t kk = plan.subcarriers(), tt = plan.symbols(), nt = plan.n_t(),
                     nr = cfg.n_r, q = setup.constellation.bits_per_symbol(),
                     k1 = static_cast<std::int64_t>(plan.k1.size()),
                     p = setup.ddst.p, slots = plan.slots(), cw = setup.seg.codewords,
                     kb = setup.info_bits_per_codeword();

  json meta{{"config", config_to_json(cfg)},
            {"plan", describe_setup(setup)},
            {"split", split_name(split)},
            {"samples", json::array()},
            {"llr_sign", "L = log P(b=1)/P(b=0)"},
            {"snr_convention", "SNR_dB = 10 log10(1 / sigma_w^2)"}};
  ContainerWriter w(out_dir);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint64_t trial = split_offset(split) + i;
    const double snr = cfg.snr_db[i % cfg.snr_db.size()];
    const double sigma2 = std::pow(10.0, -snr / 10.0);
    const FrameSample s = make_sample(setup, trial);
    const ResourceGrid rx = receive(s, sigma2);
    const ChannelTensor ls = ls_per_re_all(rx, plan, setup.pilot, setup.ddst.rho);
    const ChannelTensor des = despread(ls, setup.ddst.n_cycle);

    std::vector<float> tx_bits(static_cast<std::size_t>(kk * tt * nt * q));
    std::size_t idx = 0;
    for (int k = 0; k < kk; ++k)
      for (int t = 0; t < tt; ++t)
        for (int n = 0; n < nt; ++n)
          for (int b = 0; b < q; ++b)
            tx_bits[idx++] = static_cast<float>(coded_bit_at(setup, s, k, t, n, b));
    std::vector<float> info;
    info.reserve(static_cast<std::size_t>(nt * slots * cw * kb));
    for (int n = 0; n < nt; ++n)
      for (int slot = 0; slot < slots; ++slot)
        for (auto b : s.info[n][slot]) info.push_back(b);
    const std::vector<float> s2{static_cast<float>(sigma2)};

    w.add_c64(sample_name(i, "rx"), {kk, tt, nr}, std::span<const cplx>(rx.data()), "rx.bin");
    w.add_c64(sample_name(i, "ls_per_re"), {k1, tt, nr, nt}, std::span<const cplx>(ls.data()),
              "ls_per_re.bin");
    w.add_c64(sample_name(i, "despread"), {k1, p, nr, nt}, std::span<const cplx>(des.data()),
              "despread.bin");
    w.add_c64(sample_name(i, "h_true"), {kk, tt, nr, nt},
              std::span<const cplx>(s.channel.h.data()), "h_true.bin");
    w.add_f32(sample_name(i, "tx_bits"), {kk, tt, nt, q}, std::span<const float>(tx_bits),
              "tx_bits.bin");
    w.add_f32(sample_name(i, "info_bits"), {nt, slots, cw, kb}, std::span<const float>(info),
              "info_bits.bin");
    w.add_f32(sample_name(i, "sigma2"), {1}, std::span<const float>(s2), "sigma2.bin");
    meta["samples"].push_back(
        {{"trial", trial}, {"seed", cfg.seed}, {"snr_db", snr}, {"sigma2", sigma2}});
  }
  w.metadata() = std::move(meta);
  w.finish();
}

SimulationConfig dataset_config(const std::string& dataset_dir) {
  const ContainerReader r(dataset_dir);
  if (!r.metadata().contains("config")) {
    throw IoError("dataset '" + dataset_dir + "' has no configuration in its metadata");
  }
  return config_from_json(r.metadata().at("config"));
}

std::vector<MetricsRecord> score_external(const std::string& dataset_dir,
                                          const std::string& import_dir, ScoreMode mode) {
  const ContainerReader data(dataset_dir);
  const ContainerReader imp(import_dir);
  if (!data.metadata().contains("config") || !data.metadata().contains("samples")) {
    throw IoError("'" + dataset_dir + "' is not an exported dataset (metadata incomplete)");
  }
  const SimulationConfig cfg = config_from_json(data.metadata().at("config"));
  const LinkSetup setup = make_link_setup(cfg);
  const auto& plan = setup.plan;
  const json& samples = data.metadata().at("samples");
  const std::int64_t kk = plan.subcarriers(), tt = plan.symbols(), nt = plan.n_t(),
                     nr = cfg.n_r, q = setup.constellation.bits_per_symbol();
  const std::string kind = mode == ScoreMode::Estimates ? "h_est" : "llr";

  std::size_t imported = 0;
  for (const auto& t : imp.tensors()) {
    if (t.name.size() > kind.size() + 1 &&
        t.name.compare(t.name.size() - kind.size() - 1, std::string::npos, "/" + kind) == 0) {
      ++imported;
    }
  }
  if (imported != samples.size()) {
    throw DimensionError("import '" + import_dir + "' holds " + std::to_string(imported) + " '" +
                         kind + "' tensors, dataset has " + std::to_string(samples.size()) +
                         " samples");
  }

  std::map<double, LinkCounts> by_snr;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double snr = samples[i].at("snr_db").get<double>();
    const double sigma2 = samples[i].at("sigma2").get<double>();

    data.expect(sample_name(i, "rx"), DType::C64, {kk, tt, nr});
    data.expect(sample_name(i, "h_true"), DType::C64, {kk, tt, nr, nt});
    data.expect(sample_name(i, "tx_bits"), DType::F32, {kk, tt, nt, q});
    const auto rx32 = data.read_c64(sample_name(i, "rx"));
    const auto h32 = data.read_c64(sample_name(i, "h_true"));
    const auto txb = data.read_f32(sample_name(i, "tx_bits"));
    const auto infob = data.read_f32(sample_name(i, "info_bits"));

    // Rebuild the transmitted bits in the layout score_llrs expects.
    FrameSample s;
    s.trial = samples[i].at("trial").get<std::uint64_t>();
    s.coded.assign(nt, std::vector<std::vector<std::uint8_t>>(plan.slots()));
    s.info.assign(nt, std::vector<std::vector<std::uint8_t>>(plan.slots()));
    const std::size_t per_slot_info =
        static_cast<std::size_t>(setup.seg.codewords) * setup.info_bits_per_codeword();
    if (infob.size() != per_slot_info * nt * plan.slots()) {
      throw DimensionError("tensor '" + sample_name(i, "info_bits") + "' has the wrong size");
    }
    std::size_t ib = 0;
    for (int n = 0; n < nt; ++n) {
      for (int slot = 0; slot < plan.slots(); ++slot) {
        auto& coded = s.coded[n][slot];
        for (const auto& [k, t] : plan.slot_data_res[slot])
          for (int b = 0; b < q; ++b)
            coded.push_back(txb[((static_cast<std::size_t>(k) * tt + t) * nt + n) * q + b] > 0.5f);
        auto& info = s.info[n][slot];
        for (std::size_t b = 0; b < per_slot_info; ++b) info.push_back(infob[ib++] > 0.5f);
      }
    }

    ResourceGrid rx(static_cast<int>(kk), static_cast<int>(tt), static_cast<int>(nr));
    for (std::size_t e = 0; e < rx32.size(); ++e) rx.data()[e] = cplx(rx32[e]);

    LinkCounts counts;
    LlrGrid llr;
    const bool have_est = imp.contains(sample_name(i, "h_est"));
    ChannelEstimate est;
    if (have_est) {
      imp.expect(sample_name(i, "h_est"), DType::C64, {kk, tt, nr, nt});
      const auto e32 = imp.read_c64(sample_name(i, "h_est"));
      est.h = ChannelTensor(static_cast<int>(kk), static_cast<int>(tt), static_cast<int>(nr),
                            static_cast<int>(nt));
      est.method = EstimateMethod::Import;
      est.valid.assign(static_cast<std::size_t>(kk * tt), 1);
      for (std::size_t e = 0; e < e32.size(); ++e) {
        est.h.data()[e] = cplx(e32[e]);
        const cplx d = est.h.data()[e] - cplx(h32[e]);
        counts.nmse_err += std::norm(d);
        counts.nmse_ref += std::norm(cplx(h32[e]));
      }
    }
    if (mode == ScoreMode::Estimates) {
      llr = detect_with_estimate(rx, est, setup.context(sigma2), setup.receiver);
    } else {
      imp.expect(sample_name(i, "llr"), DType::F32, {kk, tt, nt, q});
      const auto l32 = imp.read_f32(sample_name(i, "llr"));
      llr = LlrGrid(static_cast<int>(kk), static_cast<int>(tt), static_cast<int>(nt),
                    static_cast<int>(q));
      for (std::size_t e = 0; e < l32.size(); ++e) {
        if (!std::isfinite(l32[e])) {
          throw DomainError("tensor '" + sample_name(i, "llr") + "' contains non-finite values");
        }
        llr.llr[e] = l32[e];
      }
    }
    const LinkCounts c = score_llrs(setup, s, llr);
    counts.raw_errors = c.raw_errors;
    counts.raw_bits = c.raw_bits;
    counts.info_errors = c.info_errors;
    counts.info_bits = c.info_bits;
    counts.block_errors = c.block_errors;
    counts.blocks = c.blocks;
    counts.frames = c.frames;
    by_snr[snr].merge(counts);
  }

  std::vector<MetricsRecord> records;
  for (const auto& [snr, c] : by_snr) records.push_back(make_record("external", snr, c, setup));
  return records;
}

}  // namespace ddst
