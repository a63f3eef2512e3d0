#include <CLI11.hpp>
#include <fstream>
#include <map>
#include <iostream>

#include "coopsense/experiment.hpp"
#include "coopsense/kernels.hpp"

namespace {

int run_sweep_cmd(const std::string& config_path, const std::string& out_path,
                  const std::map<std::string, std::string>& overrides) {
  coopsense::ExperimentConfig cfg;
  try {
    cfg = coopsense::parse_config_file(config_path);
    // overrides reuse the config grammar
    std::string text;
    for (const auto& [k, v] : overrides) text += k + "=" + v + "\n";
    if (!text.empty()) {
      // re-parse base + overrides so validation sees the final values
      std::ifstream in(config_path);
      std::string base((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      cfg = coopsense::parse_config_text(base + "\n" + text);
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    const auto rows = coopsense::run_sweep(cfg);
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot open output file: " << out_path << "\n";
      return 2;
    }
    coopsense::write_csv(out, rows);
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative target localization over capacity-limited backhaul"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("run-sweep", "Run a Monte-Carlo sweep and write a CSV");
  std::string config_path, out_path;
  sweep->add_option("--config", config_path, "experiment configuration file")->required();
  sweep->add_option("--out", out_path, "output CSV path")->required();

  std::map<std::string, std::string> overrides;
  std::string topology, rsnr, capacity, quantizer, design, receivers, trials, seed;
  sweep->add_option("--topology", topology, "circular|linear");
  sweep->add_option("--receivers", receivers, "number of receivers");
  sweep->add_option("--rsnr", rsnr, "comma list of RSNR values [dB]");
  sweep->add_option("--capacity", capacity, "comma list of bit budgets ('inf' allowed)");
  sweep->add_option("--quantizer", quantizer, "klt|uniform");
  sweep->add_option("--design", design, "advanced|baseline|both");
  sweep->add_option("--trials", trials, "trials per condition");
  sweep->add_option("--seed", seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (!topology.empty()) overrides["topology"] = topology;
  if (!receivers.empty()) overrides["n_receivers"] = receivers;
  if (!rsnr.empty()) overrides["rsnr"] = rsnr;
  if (!capacity.empty()) overrides["capacity"] = capacity;
  if (!quantizer.empty()) overrides["quantizer"] = quantizer;
  if (!design.empty()) overrides["design"] = design;
  if (!trials.empty()) overrides["trials"] = trials;
  if (!seed.empty()) overrides["master_seed"] = seed;

  return run_sweep_cmd(config_path, out_path, overrides);
}
