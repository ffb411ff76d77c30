// Exercises the extern-C surface the way an embedding application would.
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "softpg/softpg.h"

namespace fs = std::filesystem;

#define EXPECT(cond)                                                      \
  do {                                                                    \
    if (!(cond)) {                                                        \
      std::fprintf(stderr, "FAILED %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      std::fprintf(stderr, "  last error: %s\n", softpg_last_error());    \
      return 1;                                                           \
    }                                                                     \
  } while (0)

int main() {
  EXPECT(std::strlen(softpg_version()) > 0);

  // Bandit handles.
  softpg_bandit* bandit = nullptr;
  EXPECT(softpg_bandit_generate(10, 0.5, "bernoulli", 42, &bandit) == SOFTPG_OK);
  EXPECT(softpg_bandit_arms(bandit) == 10);
  double best = 0.0, second = 0.0;
  for (int a = 0; a < 10; ++a) {
    double mean = 0.0;
    EXPECT(softpg_bandit_mean(bandit, a, &mean) == SOFTPG_OK);
    EXPECT(mean >= 0.0 && mean <= 1.0);
    if (mean > best) {
      second = best;
      best = mean;
    } else if (mean > second) {
      second = mean;
    }
  }
  EXPECT(std::abs(best - second - 0.5) <= 1e-12);
  EXPECT(softpg_bandit_mean(bandit, 99, &best) == SOFTPG_ERR_USAGE);
  EXPECT(std::strlen(softpg_last_error()) > 0);

  const auto dir = fs::temp_directory_path() / "softpg_capi";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string bpath = (dir / "bandit.txt").string();
  EXPECT(softpg_bandit_save(bandit, bpath.c_str()) == SOFTPG_OK);
  softpg_bandit* loaded = nullptr;
  EXPECT(softpg_bandit_load(bpath.c_str(), &loaded) == SOFTPG_OK);
  EXPECT(softpg_bandit_arms(loaded) == 10);
  softpg_bandit_free(loaded);
  softpg_bandit_free(bandit);

  EXPECT(softpg_bandit_generate(10, 0.5, "cauchy", 1, &bandit) == SOFTPG_ERR_USAGE);
  EXPECT(softpg_bandit_generate(1, 0.5, "bernoulli", 1, &bandit) == SOFTPG_ERR_USAGE);
  EXPECT(softpg_bandit_load("/no/such/file", &bandit) == SOFTPG_ERR_IO);

  // MDP handles.
  softpg_mdp* mdp = nullptr;
  EXPECT(softpg_mdp_builtin("cliff_world", &mdp) == SOFTPG_OK);
  EXPECT(softpg_mdp_states(mdp) == 21);
  EXPECT(softpg_mdp_actions(mdp) == 4);
  double gamma = 0.0;
  EXPECT(softpg_mdp_gamma(mdp, &gamma) == SOFTPG_OK);
  EXPECT(std::abs(gamma - 0.9) <= 1e-12);
  const std::string mpath = (dir / "cliff.txt").string();
  EXPECT(softpg_mdp_save(mdp, mpath.c_str()) == SOFTPG_OK);
  softpg_mdp_free(mdp);
  softpg_mdp* mloaded = nullptr;
  EXPECT(softpg_mdp_load(mpath.c_str(), &mloaded) == SOFTPG_OK);
  EXPECT(softpg_mdp_states(mloaded) == 21);
  softpg_mdp_free(mloaded);
  EXPECT(softpg_mdp_builtin("unknown", &mdp) == SOFTPG_ERR_USAGE);

  // Presets.
  const int n = softpg_preset_count();
  EXPECT(n >= 10);
  bool saw_verify_all = false;
  for (int i = 0; i < n; ++i) {
    char buf[128];
    EXPECT(softpg_preset_name(i, buf, sizeof(buf)) == SOFTPG_OK);
    if (std::string(buf) == "verify-all") saw_verify_all = true;
  }
  EXPECT(saw_verify_all);
  char buf[8];
  EXPECT(softpg_preset_name(n + 5, buf, sizeof(buf)) == SOFTPG_ERR_USAGE);

  // A tiny experiment run through the handle setters.
  softpg_experiment* exp = nullptr;
  EXPECT(softpg_experiment_from_preset("fig2-easy-bernoulli", &exp) == SOFTPG_OK);
  EXPECT(softpg_experiment_set_seed(exp, 5) == SOFTPG_OK);
  EXPECT(softpg_experiment_set_iters(exp, 150) == SOFTPG_OK);
  EXPECT(softpg_experiment_set_workers(exp, 2) == SOFTPG_OK);
  const std::string out = (dir / "run").string();
  EXPECT(softpg_experiment_set_output_dir(exp, out.c_str()) == SOFTPG_OK);
  EXPECT(softpg_experiment_run(exp) == SOFTPG_OK);
  softpg_experiment_free(exp);
  EXPECT(fs::exists(fs::path(out) / "manifest.txt"));
  EXPECT(fs::exists(fs::path(out) / "agg_SPG-ESS.csv"));
  EXPECT(softpg_experiment_from_preset("no-such-preset", &exp) == SOFTPG_ERR_USAGE);

  // Experiment config from a file.
  const std::string cpath = (dir / "exp.cfg").string();
  {
    std::ofstream os(cpath);
    os << "[experiment]\nname = capi\niters = 100\ninstances = 1\nrepeats = 1\n"
       << "out = " << (dir / "cfg_run").string() << "\n"
       << "[environment]\nkind = bandit\narms = 4\ngap = 0.3\nfamily = gaussian\n"
       << "[algorithm]\ntag = SPG-ESS\n";
  }
  EXPECT(softpg_experiment_load(cpath.c_str(), &exp) == SOFTPG_OK);
  EXPECT(softpg_experiment_run(exp) == SOFTPG_OK);
  softpg_experiment_free(exp);
  EXPECT(softpg_experiment_load("/no/such/config", &exp) == SOFTPG_ERR_IO);

  // Verify entry point with a reduced-trials config.
  const std::string vpath = (dir / "verify.cfg").string();
  {
    std::ofstream os(vpath);
    os << "bandit_instances = 2\ntrials = 100\nmdp_trials = 20\nsamples = 1000\n"
       << "out = " << (dir / "verify").string() << "\n";
  }
  int failures = -1;
  EXPECT(softpg_verify(vpath.c_str(), nullptr, &failures) == SOFTPG_OK);
  EXPECT(failures == 0);
  EXPECT(fs::exists(dir / "verify" / "properties.csv"));

  fs::remove_all(dir);
  std::printf("capi_tests: all checks passed\n");
  return 0;
}
