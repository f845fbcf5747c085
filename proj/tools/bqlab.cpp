// bqlab: run one experiment config and write CSV series, manifest.json and verdict.json.
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bqlab/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bqlab: dispersive estimate laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "Picard solve, RK4 cross-check, residual order, contraction sweep"},
      {"decay", "linear decay slopes and decay ratio reports"},
      {"estimates", "product, power and multilinear ratio reports"},
      {"strichartz", "space-time ratio reports under window doubling"},
      {"scatter", "scattering data, difference decay and tail bound"},
      {"stability", "solution and linear difference series"},
      {"validate", "hypothesis check only"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON, schema v1)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "corpus seed (overrides the config)");
    sub->add_option("--threads", threads, "worker threads for corpus maps");
    sub->add_option("--override", overrides, "dotted.key=value, repeatable");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    auto cfg = bqlab::load_config(config_path, overrides);
    cfg.kind = kind;
    if (seed != 0) cfg.corpus.seed = seed;
    if (threads != 0) cfg.threads = threads;
    const auto res = bqlab::run_experiment(cfg);
    const auto files = bqlab::write_outputs(cfg, res, out_dir);
    for (const auto& v : res.hypotheses) std::cout << "hypothesis violated [" << v.clause << "] " << v.detail << "\n";
    for (const auto& v : res.verdicts)
      std::cout << (v.pass ? "PASS " : "FAIL ") << v.check << "  " << v.value << "  " << v.detail << "\n";
    std::cout << "wrote " << files.size() << " files to " << out_dir << " (config " << bqlab::config_hash(cfg) << ")\n";
    return res.all_pass() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "bqlab " << kind << ": " << e.what() << "\n";
    return 2;
  }
}
