#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ergo/config.hpp"
#include "ergo/potential.hpp"
#include "ergo/skew.hpp"

namespace ergo {

IntervalMap build_base(const BaseSpec& b);
FiberMap build_fiber(const FiberSpec& f, int degree);
HolderPotential build_potential(const PotentialSpec& p, const IntervalMap& f, double zeta);
SkewSystem build_system(const SystemSpec& s, const ToleranceSpec& t);

// named observables on the skew product; base observables ignore y
FiberFn named_observable(const std::string& name, const IntervalMap& f);
std::vector<std::string> observable_names();

struct ResultRecord {
  std::string experiment;
  std::string timestamp;
  std::string config_hash;
  int workers = 1;
  std::uint64_t seed = 0;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::map<std::string, bool> flags;
  std::vector<std::string> files;
  std::vector<std::string> violations;  // named hypothesis violations
  int exit_code() const;
  nlohmann::ordered_json to_json() const;
};

// runs cfg.experiment.kind and writes artifacts into out_dir
ResultRecord run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, int workers);

}  // namespace ergo
