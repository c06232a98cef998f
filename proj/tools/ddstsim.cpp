// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: simulate, export-dataset, score, info.
// Exit codes: 0 success, 2 configuration or usage error, 3 I/O error,
// 1 anything else.
#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

#include "ddst/dataset.hpp"
#include "ddst/error.hpp"
#include "ddst/harness.hpp"

namespace {

int run_simulate(const std::string& config, const std::string& out,
                 std::optional<std::uint64_t> seed, std::optional<int> trials) {
  ddst::SimulationConfig cfg = ddst::load_config(config);
  if (seed) cfg.seed = *seed;
  if (trials) cfg.trials = *trials;
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto records = ddst::run_sweep(cfg);
  ddst::emit_results(records, cfg, out);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << records.size() << " records written to " << out << " (" << wall << " s)\n";
  return 0;
}

int run_export(const std::string& config, const std::string& split, std::size_t samples,
               const std::string& out) {
  const ddst::SimulationConfig cfg = ddst::load_config(config);
  ddst::export_dataset(cfg, ddst::parse_split(split), samples, out);
  std::cerr << samples << " samples written to " << out << '\n';
  return 0;
}

int run_score(const std::string& dataset, const std::string& import, const std::string& mode,
              const std::string& out) {
  const auto m = ddst::parse_score_mode(mode);
  const auto records = ddst::score_external(dataset, import, m);
  ddst::emit_results(records, ddst::dataset_config(dataset), out,
                     {{"external", {{"dataset", dataset}, {"import", import}, {"mode", mode}}}});
  std::cerr << records.size() << " records written to " << out << '\n';
  return 0;
}

int run_info(const std::string& config) {
  const auto setup = ddst::make_link_setup(ddst::load_config(config));
  std::cout << ddst::describe_setup(setup).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DDST MIMO-OFDM link simulator"};
  app.require_subcommand(1);

  std::string config, out, split, dataset, import, mode;
  std::uint64_t seed = 0;
  int trials = 0;
  std::size_t samples = 0;

  auto* sim = app.add_subcommand("simulate", "Monte-Carlo SNR sweep to CSV + JSON sidecar");
  sim->add_option("--config", config, "JSON configuration")->required();
  sim->add_option("--out", out, "output CSV path")->required();
  auto* seed_opt = sim->add_option("--seed", seed, "override the config seed");
  auto* trials_opt = sim->add_option("--trials", trials, "override trials per SNR point");

  auto* exp = app.add_subcommand("export-dataset", "write a tensor container dataset");
  exp->add_option("--config", config, "JSON configuration")->required();
  exp->add_option("--split", split, "train, val or test")->required();
  exp->add_option("--samples", samples, "number of samples")->required();
  exp->add_option("--out", out, "output directory")->required();

  auto* score = app.add_subcommand("score", "score imported estimates or LLRs");
  score->add_option("--dataset", dataset, "exported dataset directory")->required();
  score->add_option("--import", import, "container with h_est or llr tensors")->required();
  score->add_option("--mode", mode, "estimates or llrs")->required();
  score->add_option("--out", out, "output CSV path")->required();

  auto* info = app.add_subcommand("info", "print plan, capacities and DDST parameters");
  info->add_option("--config", config, "JSON configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      return run_simulate(config, out, *seed_opt ? std::optional(seed) : std::nullopt,
                          *trials_opt ? std::optional(trials) : std::nullopt);
    }
    if (*exp) return run_export(config, split, samples, out);
    if (*score) return run_score(dataset, import, mode, out);
    if (*info) return run_info(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ddst::exit_code_for(e);
  }
  return 1;
}
