#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "softpg/harness.hpp"

using namespace softpg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream buf;
  buf << is.rdbuf();
  return buf.str();
}

harness::ExperimentConfig tiny_experiment(const std::string& out) {
  harness::ExperimentConfig cfg;
  cfg.name = "tiny";
  cfg.env.kind = "bandit";
  cfg.env.arms = 5;
  cfg.env.gap = 0.4;
  cfg.instances = 2;
  cfg.repeats = 2;
  cfg.iters = 300;
  cfg.base_seed = 7;
  cfg.workers = 2;
  cfg.out_dir = out;
  opt::OptimizerConfig ess;
  ess.algorithm = opt::Algorithm::SPG_ESS;
  ess.iters = cfg.iters;
  opt::OptimizerConfig og;
  og.algorithm = opt::Algorithm::SPG_O_G;
  og.iters = cfg.iters;
  cfg.algorithms = {{ess}, {og}};
  return cfg;
}

}  // namespace

TEST_CASE("preset catalogue") {
  const auto names = harness::list_presets();
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == names.size());
  CHECK(harness::is_preset("verify-all"));
  CHECK(harness::is_preset("fig2-hard-beta"));
  CHECK_FALSE(harness::is_preset("fig2-hard"));
  // Every preset builds, validates, and round-trips through the text format.
  for (const auto& name : names) {
    const auto cfg = harness::preset(name);
    CHECK_NOTHROW(cfg.validate());
    if (cfg.env.kind == "verify") continue;
    const auto again = harness::parse_config(harness::config_to_text(cfg));
    CHECK(again.name == cfg.name);
    CHECK(again.iters == cfg.iters);
    CHECK(again.instances == cfg.instances);
    CHECK(again.algorithms.size() == cfg.algorithms.size());
    for (size_t i = 0; i < cfg.algorithms.size(); ++i) {
      CHECK(again.algorithms[i].config.algorithm == cfg.algorithms[i].config.algorithm);
      CHECK(again.algorithms[i].config.iters == cfg.algorithms[i].config.iters);
      CHECK(again.algorithms[i].config.init == cfg.algorithms[i].config.init);
    }
  }
  CHECK_THROWS_AS(harness::preset("nonsense"), std::invalid_argument);
}

TEST_CASE("seed derivation") {
  CHECK(harness::run_seed(10, 0, 0, 0) == 10);
  CHECK(harness::run_seed(10, 3, 2, 1) == 10 + 3000000 + 2000 + 1);
  // The instance-generation stream can never collide with a run stream.
  CHECK(harness::instance_seed(10, 3) == 10 + 3000000 + 999000);
}

TEST_CASE("config parse errors") {
  CHECK_THROWS_AS(harness::parse_config("[experiment]\nbogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(harness::parse_config("key = outside\n"), std::invalid_argument);
  CHECK_THROWS_AS(harness::parse_config("[experiment]\nname = x\n[environment]\nkind = "
                                        "bandit\narms = 5\n"),
                  std::invalid_argument);  // no algorithms
}

TEST_CASE("experiment artifacts and determinism") {
  const auto base = fs::temp_directory_path() / "softpg_harness_test";
  fs::remove_all(base);
  auto cfg = tiny_experiment((base / "a").string());
  const auto res1 = harness::run_experiment(cfg);
  CHECK(res1.total_runs == 8);  // 2 instances x 2 repeats x 2 algorithms
  CHECK(res1.flagged_runs == 0);

  // Schema of the trace CSV.
  const auto trace = slurp((base / "a" / "trace_SPG-ESS_i000_r00.csv").string());
  CHECK(trace.rfind("run_id,algorithm,instance,repeat,seed,iter,stage,tau,eta,f,subopt,"
                    "grad_norm\n", 0) == 0);

  // Aggregates carry n = instances x repeats.
  const auto agg = slurp((base / "a" / "agg_SPG-ESS.csv").string());
  CHECK(agg.rfind("algorithm,iter,mean_subopt,ci95,n\n", 0) == 0);
  std::istringstream is(agg);
  std::string line;
  std::getline(is, line);
  int rows = 0;
  while (std::getline(is, line)) {
    CHECK(line.substr(line.rfind(',') + 1) == "4");
    ++rows;
  }
  CHECK(rows >= 300);  // every iteration recorded at this scale

  // Byte-identical re-run (manifest excluded: it carries a timestamp).
  cfg.out_dir = (base / "b").string();
  harness::run_experiment(cfg);
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    const auto name = entry.path().filename().string();
    if (name == "manifest.txt") continue;
    CHECK(slurp(entry.path().string()) == slurp((base / "b" / name).string()));
  }

  // The manifest checksums match the files on disk.
  const auto manifest = slurp((base / "a" / "manifest.txt").string());
  std::istringstream ms(manifest);
  bool in_checksums = false;
  int checked = 0;
  while (std::getline(ms, line)) {
    if (line == "[checksums]") {
      in_checksums = true;
      continue;
    }
    if (!in_checksums || line.empty() || line[0] == '[') {
      if (line.rfind("[config]", 0) == 0) break;
      continue;
    }
    const auto eq = line.find(" = ");
    REQUIRE(eq != std::string::npos);
    const auto fname = line.substr(0, eq);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      harness::fnv1a64(slurp((base / "a" / fname).string()))));
    CHECK(line.substr(eq + 3) == buf);
    ++checked;
  }
  CHECK(checked == res1.total_runs + cfg.instances + 2 /* aggregates */);
  fs::remove_all(base);
}

TEST_CASE("mdp experiments use the named environments") {
  const auto base = fs::temp_directory_path() / "softpg_harness_mdp";
  fs::remove_all(base);
  harness::ExperimentConfig cfg;
  cfg.name = "mdp-tiny";
  cfg.env.kind = "mdp";
  cfg.env.mdp_names = {"deep_sea", "flat_grad"};
  cfg.instances = 2;
  cfg.repeats = 1;
  cfg.iters = 20;
  cfg.out_dir = (base).string();
  opt::OptimizerConfig pg;
  pg.algorithm = opt::Algorithm::PG;
  pg.iters = cfg.iters;
  cfg.algorithms = {{pg}};
  const auto res = harness::run_experiment(cfg);
  CHECK(res.total_runs == 2);
  CHECK(fs::exists(base / "instance_0.txt"));
  const auto text = slurp((base / "instance_0.txt").string());
  CHECK(text.find("name = deep_sea") != std::string::npos);
  fs::remove_all(base);

  cfg.env.mdp_names = {"missing_env_file.txt", "deep_sea"};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("verify suite: empty battery and small pass") {
  const auto base = fs::temp_directory_path() / "softpg_verify_test";
  fs::remove_all(base);
  harness::VerifyConfig empty;
  empty.bandit_instances = 0;
  empty.trials = 0;
  empty.mdp_trials = 0;
  empty.samples = 0;
  empty.out_dir = (base / "empty").string();
  std::vector<verify::PropertyReport> reports;
  CHECK(harness::verify_suite(empty, &reports) == 0);
  CHECK(reports.empty());
  CHECK(slurp((base / "empty" / "properties.csv").string()) ==
        "name,trials,max_violation,tightness,pass\n");

  harness::VerifyConfig small;
  small.bandit_instances = 3;
  small.trials = 300;
  small.mdp_trials = 50;
  small.samples = 3000;
  small.out_dir = (base / "small").string();
  reports.clear();
  CHECK(harness::verify_suite(small, &reports) == 0);
  CHECK(reports.size() > 10);
  for (const auto& r : reports) CHECK(r.pass);
  fs::remove_all(base);
}

TEST_CASE("verify config parsing") {
  const auto cfg = harness::parse_verify_config(
      "trials = 123\nmdp_trials = 45\nsamples = 678\nseed = 9\nout = /tmp/x\n");
  CHECK(cfg.trials == 123);
  CHECK(cfg.mdp_trials == 45);
  CHECK(cfg.samples == 678);
  CHECK(cfg.seed == 9);
  CHECK(cfg.out_dir == "/tmp/x");
  CHECK_THROWS_AS(harness::parse_verify_config("junk = 1\n"), std::invalid_argument);
}
