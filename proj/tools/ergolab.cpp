#include <cstdio>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "ergo/common.hpp"
#include "ergo/config.hpp"
#include "ergo/experiments.hpp"
#include "ergo/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergolab: transfer-operator experiments on skew products"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  for (const char* kind : {"spectrum", "equilibrium", "decay", "clt", "stability", "verify", "cohomology"}) {
    auto* sub = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
    sub->add_option("--config", config_path, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--workers", workers, "worker threads (default: hardware concurrency)")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "override output.seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", out_dir, "output directory (ERGOLAB_OUT takes precedence)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  try {
    ergo::ExperimentConfig cfg = ergo::load_config(config_path);
    if (!cfg.experiment.kind.empty() && cfg.experiment.kind != kind) {
      std::cerr << "error: config declares experiment '" << cfg.experiment.kind << "' but subcommand is '" << kind
                << "'\n";
      return 1;
    }
    cfg.experiment.kind = kind;
    if (seed_set) cfg.output.seed = seed;
    if (!out_dir.empty()) cfg.output.directory = out_dir;
    if (const char* env = std::getenv("ERGOLAB_OUT"); env && *env) cfg.output.directory = env;
    ergo::set_workers(workers);
    auto rec = ergo::run_experiment(cfg, cfg.output.directory, ergo::workers());
    std::cout << "experiment " << rec.experiment << " (config " << rec.config_hash << ", seed " << rec.seed
              << ", workers " << rec.workers << ")\n";
    for (auto& [k, v] : rec.metrics.items())
      if (!v.is_array() && !v.is_object()) std::cout << "  " << k << " = " << v.dump() << "\n";
    for (auto& [k, v] : rec.flags) std::cout << "  [" << (v ? "PASS" : "FAIL") << "] " << k << "\n";
    for (auto& v : rec.violations) std::cout << "  [VIOLATION] " << v << "\n";
    if (rec.metrics.contains("violation")) std::cout << "  " << rec.metrics["violation"].get<std::string>() << "\n";
    std::cout << "  output: " << cfg.output.directory << "\n";
    return rec.exit_code();
  } catch (const ergo::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ergo::hypothesis_violation& e) {
    std::cerr << "hypothesis violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
