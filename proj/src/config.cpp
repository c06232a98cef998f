// SPDX-License-Identifier: Apache-2.0
#include "ddst/config.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "ddst/error.hpp"

#ifndef DDST_DEFAULT_DATA_DIR
#define DDST_DEFAULT_DATA_DIR "data"
#endif

namespace ddst {

namespace {

using nlohmann::json;

struct Field {
  std::function<void(SimulationConfig&, const json&)> read;
  std::function<json(const SimulationConfig&)> write;
};

template <typename T>
Field field(T SimulationConfig::*member) {
  return {[member](SimulationConfig& c, const json& v) { c.*member = v.get<T>(); },
          [member](const SimulationConfig& c) { return json(c.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table{
      {"n_t", field(&SimulationConfig::n_t)},
      {"n_r", field(&SimulationConfig::n_r)},
      {"subcarriers", field(&SimulationConfig::subcarriers)},
      {"symbols", field(&SimulationConfig::symbols)},
      {"slot_symbols", field(&SimulationConfig::slot_symbols)},
      {"subcarrier_spacing_hz", field(&SimulationConfig::subcarrier_spacing_hz)},
      {"carrier_frequency_hz", field(&SimulationConfig::carrier_frequency_hz)},
      {"delay_spread_s", field(&SimulationConfig::delay_spread_s)},
      {"ue_speed_kmh", field(&SimulationConfig::ue_speed_kmh)},
      {"pdp", field(&SimulationConfig::pdp)},
      {"pdp_delays_s", field(&SimulationConfig::pdp_delays_s)},
      {"pdp_powers_db", field(&SimulationConfig::pdp_powers_db)},
      {"spatial_correlation", field(&SimulationConfig::spatial_correlation)},
      {"tx_correlation", field(&SimulationConfig::tx_correlation)},
      {"rx_correlation", field(&SimulationConfig::rx_correlation)},
      {"sinusoids_per_tap", field(&SimulationConfig::sinusoids_per_tap)},
      {"scheme", field(&SimulationConfig::scheme)},
      {"ddst_ratio", field(&SimulationConfig::ddst_ratio)},
      {"rho", field(&SimulationConfig::rho)},
      {"pilot_symbols", field(&SimulationConfig::pilot_symbols)},
      {"modulation", field(&SimulationConfig::modulation)},
      {"code", field(&SimulationConfig::code)},
      {"min_sum_scale", field(&SimulationConfig::min_sum_scale)},
      {"max_decoder_iterations", field(&SimulationConfig::max_decoder_iterations)},
      {"llr_clip", field(&SimulationConfig::llr_clip)},
      {"snr_db", field(&SimulationConfig::snr_db)},
      {"trials", field(&SimulationConfig::trials)},
      {"seed", field(&SimulationConfig::seed)},
      {"workers", field(&SimulationConfig::workers)},
      {"receiver", field(&SimulationConfig::receiver)},
      {"genie_reference", field(&SimulationConfig::genie_reference)},
      {"hard_iterations", field(&SimulationConfig::hard_iterations)},
      {"despread_span", field(&SimulationConfig::despread_span)},
      {"rspat_source", field(&SimulationConfig::rspat_source)},
      {"rspat_training_realizations", field(&SimulationConfig::rspat_training_realizations)},
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError("config key '" + key + "': " + what);
}

void require_one_of(const std::string& value, const std::string& key,
                    const std::set<std::string>& allowed) {
  if (allowed.count(value)) return;
  std::string list;
  for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
  throw ConfigError("config key '" + key + "': '" + value + "' is not one of " + list);
}

}  // namespace

SimulationConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  SimulationConfig c;
  for (const auto& [key, value] : j.items()) {
    const auto it = fields().find(key);
    if (it == fields().end()) throw ConfigError("config: unknown key '" + key + "'");
    try {
      it->second.read(c, value);
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

json config_to_json(const SimulationConfig& c) {
  json j = json::object();
  for (const auto& [key, field] : fields()) j[key] = field.write(c);
  return j;
}

SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void SimulationConfig::validate() const {
  require(n_t >= 1 && n_r >= 1, "n_t/n_r", "antenna counts must be >= 1");
  require(subcarriers >= 1 && symbols >= 1, "subcarriers/symbols", "must be >= 1");
  require(slot_symbols >= 1 && symbols % slot_symbols == 0, "slot_symbols",
          "must divide symbols");
  require(subcarrier_spacing_hz > 0.0, "subcarrier_spacing_hz", "must be > 0");
  require(carrier_frequency_hz > 0.0, "carrier_frequency_hz", "must be > 0");
  require(delay_spread_s >= 0.0, "delay_spread_s", "must be >= 0");
  require(ue_speed_kmh >= 0.0, "ue_speed_kmh", "must be >= 0");
  require_one_of(pdp, "pdp", {"tdl-c", "single-tap", "custom"});
  if (pdp == "custom") {
    require(!pdp_delays_s.empty() && pdp_delays_s.size() == pdp_powers_db.size(), "pdp_delays_s",
            "custom profile needs equally long, non-empty pdp_delays_s and pdp_powers_db");
  }
  require_one_of(spatial_correlation, "spatial_correlation", {"none", "kronecker"});
  require(tx_correlation >= 0.0 && tx_correlation < 1.0, "tx_correlation", "must be in [0, 1)");
  require(rx_correlation >= 0.0 && rx_correlation < 1.0, "rx_correlation", "must be in [0, 1)");
  require(sinusoids_per_tap >= 1, "sinusoids_per_tap", "must be >= 1");
  parse_scheme(scheme);
  require(rho > 0.0 && rho < 1.0, "rho", "must be in (0, 1)");
  require(modulation == 4 || modulation == 16 || modulation == 64, "modulation",
          "must be 4, 16 or 64");
  require(min_sum_scale > 0.0 && min_sum_scale <= 1.0, "min_sum_scale", "must be in (0, 1]");
  require(max_decoder_iterations >= 1, "max_decoder_iterations", "must be >= 1");
  require(llr_clip > 0.0, "llr_clip", "must be > 0");
  require(!snr_db.empty(), "snr_db", "must be a non-empty list");
  for (double s : snr_db) require(std::isfinite(s), "snr_db", "entries must be finite");
  require(trials >= 1, "trials", "must be >= 1");
  require(workers >= 0, "workers", "must be >= 0");
  parse_chain(receiver);
  require(hard_iterations >= 1, "hard_iterations", "must be >= 1");
  require_one_of(despread_span, "despread_span", {"cycle", "frame"});
  require_one_of(rspat_source, "rspat_source", {"genie", "estimated"});
  require(rspat_training_realizations >= 1, "rspat_training_realizations", "must be >= 1");
  check_chain(parse_chain(receiver), parse_scheme(scheme));
  // Build the plan once so that layout problems surface as config errors.
  make_frame_plan(plan_config());
}

ChannelConfig SimulationConfig::channel_config() const {
  ChannelConfig ch;
  ch.n_t = n_t;
  ch.n_r = n_r;
  ch.subcarriers = subcarriers;
  ch.symbols = symbols;
  ch.subcarrier_spacing_hz = subcarrier_spacing_hz;
  ch.carrier_frequency_hz = carrier_frequency_hz;
  ch.delay_spread_s = delay_spread_s;
  ch.ue_speed_mps = ue_speed_kmh / 3.6;
  ch.sinusoids_per_tap = sinusoids_per_tap;
  if (pdp == "tdl-c") {
    ch.pdp = tdl_c_profile(delay_spread_s);
  } else if (pdp == "single-tap") {
    ch.pdp = {Tap{0.0, 1.0}};
  } else {
    std::vector<Tap> taps;
    for (std::size_t i = 0; i < pdp_delays_s.size(); ++i) {
      taps.push_back({pdp_delays_s[i], std::pow(10.0, pdp_powers_db[i] / 10.0)});
    }
    ch.pdp = normalize_pdp(std::move(taps));
  }
  if (spatial_correlation == "kronecker") {
    ch.spatial = SpatialCorrelation::Kronecker;
    ch.r_tx = exponential_correlation(n_t, tx_correlation);
    ch.r_rx = exponential_correlation(n_r, rx_correlation);
  }
  return ch;
}

PlanConfig SimulationConfig::plan_config() const {
  PlanConfig p;
  p.scheme = parse_scheme(scheme);
  p.subcarriers = subcarriers;
  p.symbols = symbols;
  p.n_t = n_t;
  p.slot_symbols = slot_symbols;
  p.ddst_ratio = ddst_ratio;
  p.rho = rho;
  p.pilot_symbols = pilot_symbols;
  return p;
}

ReceiverOptions SimulationConfig::receiver_options() const {
  ReceiverOptions o;
  o.chain = parse_chain(receiver);
  o.hard_iterations = hard_iterations;
  o.despread_span = despread_span == "cycle" ? DespreadSpan::Cycle : DespreadSpan::Frame;
  o.llr_clip = llr_clip;
  return o;
}

std::string resolve_code_path(const std::string& code) {
  static const std::map<std::string, std::string> builtin{
      {"ldpc-4032-2016", "ldpc_4032_2016.alist"},
      {"ldpc-648-324", "ldpc_648_324.alist"},
  };
  const auto it = builtin.find(code);
  if (it == builtin.end()) return code;
  const char* env = std::getenv("DDST_DATA_DIR");
  const std::filesystem::path dir = env != nullptr ? env : DDST_DEFAULT_DATA_DIR;
  return (dir / it->second).string();
}

}  // namespace ddst
