#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softpg/bandit.hpp"
#include "softpg/mdp.hpp"
#include "softpg/optimize.hpp"
#include "softpg/verify.hpp"

namespace softpg::harness {

inline constexpr const char* kVersion = "0.1.0";

struct EnvironmentBlock {
  std::string kind = "bandit";  // "bandit" | "mdp"
  // bandit instances are generated per instance index from the base seed
  int arms = 10;
  double gap = 0.5;
  bandit::RewardFamily family = bandit::RewardFamily::Bernoulli;
  double gaussian_std = 0.2;
  double beta_concentration = 5.0;
  // mdp: builtin names (cliff_world, deep_sea, flat_grad) or instance-file
  // paths; each name is one instance
  std::vector<std::string> mdp_names;
};

struct AlgorithmEntry {
  opt::OptimizerConfig config;
};

struct ExperimentConfig {
  std::string name = "experiment";
  EnvironmentBlock env;
  std::vector<AlgorithmEntry> algorithms;
  int instances = 25;
  int repeats = 5;
  int64_t iters = 100000;
  uint64_t base_seed = 0;
  int workers = 1;
  std::string out_dir = "out";

  void validate() const;
};

// Flat key-value config files with [experiment] / [environment] /
// [algorithm] sections; one [algorithm] section per compared method.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_text(const ExperimentConfig& cfg);

std::vector<std::string> list_presets();
bool is_preset(const std::string& name);
ExperimentConfig preset(const std::string& name);

// seed of run (instance i, repeat j, algorithm k) = base_seed + i 1e6 + j 1e3 + k.
uint64_t run_seed(uint64_t base_seed, int instance, int repeat, int algorithm);
// bandit instance i is generated from base_seed + i 1e6 + 999e3 (repeat
// index 999 is out of range for runs, so the streams never collide).
uint64_t instance_seed(uint64_t base_seed, int instance);

struct ExperimentResult {
  std::string out_dir;
  int total_runs = 0;
  int flagged_runs = 0;  // diverged or line-search failure; excluded from aggregates
  std::vector<std::string> files;
  bool ok() const { return flagged_runs == 0; }
};

// Runs every (instance, repeat, algorithm) combination on a worker pool,
// writes one trace CSV per run, one aggregate CSV per algorithm, and a
// manifest with per-file checksums.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct VerifyConfig {
  int bandit_instances = 10;
  int trials = 10000;        // per bandit property
  int mdp_trials = 1000;     // per random-MDP property
  int64_t samples = 100000;  // samplewise bound checks
  uint64_t seed = 0;
  std::string out_dir = "out/verify";
};

VerifyConfig parse_verify_config(const std::string& text);
VerifyConfig load_verify_config(const std::string& path);

// Runs the full checker battery over random bandits, random small MDPs, and
// the named environments; writes one CSV row per property. Returns the
// number of failed properties.
int verify_suite(const VerifyConfig& cfg, std::vector<verify::PropertyReport>* reports = nullptr);

// FNV-1a 64-bit, used for the manifest checksums.
uint64_t fnv1a64(const std::string& bytes);

}  // namespace softpg::harness
