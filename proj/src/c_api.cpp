#include "softpg/softpg.h"

#include <cstring>
#include <stdexcept>
#include <string>

#include "softpg/bandit.hpp"
#include "softpg/harness.hpp"
#include "softpg/mdp.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const char* what) {
  g_last_error = what ? what : "unknown error";
  return code;
}

// I/O problems are reported as runtime_errors by the core; everything the
// caller got wrong is an invalid_argument.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    return set_error(SOFTPG_ERR_USAGE, e.what());
  } catch (const std::runtime_error& e) {
    return set_error(SOFTPG_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(SOFTPG_ERR_RUN, e.what());
  }
}

}  // namespace

struct softpg_bandit {
  softpg::bandit::BanditSpec spec;
};

struct softpg_mdp {
  softpg::mdp::MdpSpec spec;
};

struct softpg_experiment {
  softpg::harness::ExperimentConfig config;
};

extern "C" {

const char* softpg_version(void) { return softpg::harness::kVersion; }

const char* softpg_last_error(void) { return g_last_error.c_str(); }

int softpg_bandit_generate(int arms, double gap, const char* family, uint64_t seed,
                           softpg_bandit** out) {
  return guarded([&] {
    if (!out || !family) throw std::invalid_argument("null argument");
    auto spec = softpg::bandit::generate_instance(
        arms, gap, softpg::bandit::family_from_string(family), seed);
    *out = new softpg_bandit{std::move(spec)};
    return SOFTPG_OK;
  });
}

int softpg_bandit_load(const char* path, softpg_bandit** out) {
  return guarded([&] {
    if (!out || !path) throw std::invalid_argument("null argument");
    *out = new softpg_bandit{softpg::bandit::load_instance(path)};
    return SOFTPG_OK;
  });
}

int softpg_bandit_save(const softpg_bandit* bandit, const char* path) {
  return guarded([&] {
    if (!bandit || !path) throw std::invalid_argument("null argument");
    softpg::bandit::save_instance(bandit->spec, path);
    return SOFTPG_OK;
  });
}

int softpg_bandit_arms(const softpg_bandit* bandit) {
  return bandit ? bandit->spec.arms() : 0;
}

int softpg_bandit_mean(const softpg_bandit* bandit, int arm, double* out) {
  return guarded([&] {
    if (!bandit || !out) throw std::invalid_argument("null argument");
    if (arm < 0 || arm >= bandit->spec.arms())
      throw std::invalid_argument("arm index out of range");
    *out = bandit->spec.means[arm];
    return SOFTPG_OK;
  });
}

void softpg_bandit_free(softpg_bandit* bandit) { delete bandit; }

int softpg_mdp_builtin(const char* name, softpg_mdp** out) {
  return guarded([&] {
    if (!out || !name) throw std::invalid_argument("null argument");
    *out = new softpg_mdp{softpg::mdp::make_named(name)};
    return SOFTPG_OK;
  });
}

int softpg_mdp_load(const char* path, softpg_mdp** out) {
  return guarded([&] {
    if (!out || !path) throw std::invalid_argument("null argument");
    *out = new softpg_mdp{softpg::mdp::load_instance(path)};
    return SOFTPG_OK;
  });
}

int softpg_mdp_save(const softpg_mdp* mdp, const char* path) {
  return guarded([&] {
    if (!mdp || !path) throw std::invalid_argument("null argument");
    softpg::mdp::save_instance(mdp->spec, path);
    return SOFTPG_OK;
  });
}

int softpg_mdp_states(const softpg_mdp* mdp) { return mdp ? mdp->spec.S : 0; }

int softpg_mdp_actions(const softpg_mdp* mdp) { return mdp ? mdp->spec.A : 0; }

int softpg_mdp_gamma(const softpg_mdp* mdp, double* out) {
  return guarded([&] {
    if (!mdp || !out) throw std::invalid_argument("null argument");
    *out = mdp->spec.gamma;
    return SOFTPG_OK;
  });
}

void softpg_mdp_free(softpg_mdp* mdp) { delete mdp; }

int softpg_preset_count(void) {
  return static_cast<int>(softpg::harness::list_presets().size());
}

int softpg_preset_name(int index, char* buf, size_t len) {
  return guarded([&] {
    if (!buf || len == 0) throw std::invalid_argument("null buffer");
    const auto names = softpg::harness::list_presets();
    if (index < 0 || index >= static_cast<int>(names.size()))
      throw std::invalid_argument("preset index out of range");
    std::snprintf(buf, len, "%s", names[index].c_str());
    return SOFTPG_OK;
  });
}

int softpg_experiment_from_preset(const char* name, softpg_experiment** out) {
  return guarded([&] {
    if (!out || !name) throw std::invalid_argument("null argument");
    *out = new softpg_experiment{softpg::harness::preset(name)};
    return SOFTPG_OK;
  });
}

int softpg_experiment_load(const char* path, softpg_experiment** out) {
  return guarded([&] {
    if (!out || !path) throw std::invalid_argument("null argument");
    *out = new softpg_experiment{softpg::harness::load_config(path)};
    return SOFTPG_OK;
  });
}

int softpg_experiment_set_seed(softpg_experiment* exp, uint64_t seed) {
  return guarded([&] {
    if (!exp) throw std::invalid_argument("null experiment");
    exp->config.base_seed = seed;
    return SOFTPG_OK;
  });
}

int softpg_experiment_set_iters(softpg_experiment* exp, int64_t iters) {
  return guarded([&] {
    if (!exp) throw std::invalid_argument("null experiment");
    if (iters < 1) throw std::invalid_argument("iters must be >= 1");
    exp->config.iters = iters;
    for (auto& alg : exp->config.algorithms) alg.config.iters = iters;
    return SOFTPG_OK;
  });
}

int softpg_experiment_set_workers(softpg_experiment* exp, int workers) {
  return guarded([&] {
    if (!exp) throw std::invalid_argument("null experiment");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    exp->config.workers = workers;
    return SOFTPG_OK;
  });
}

int softpg_experiment_set_output_dir(softpg_experiment* exp, const char* dir) {
  return guarded([&] {
    if (!exp || !dir) throw std::invalid_argument("null argument");
    exp->config.out_dir = dir;
    return SOFTPG_OK;
  });
}

int softpg_experiment_run(softpg_experiment* exp) {
  return guarded([&] {
    if (!exp) throw std::invalid_argument("null experiment");
    const auto result = softpg::harness::run_experiment(exp->config);
    if (result.flagged_runs > 0) {
      g_last_error = std::to_string(result.flagged_runs) + " runs flagged (see manifest)";
      return SOFTPG_ERR_RUN;
    }
    return SOFTPG_OK;
  });
}

void softpg_experiment_free(softpg_experiment* exp) { delete exp; }

int softpg_verify(const char* config_path, const char* out_dir, int* failures) {
  return guarded([&] {
    softpg::harness::VerifyConfig cfg;
    if (config_path) cfg = softpg::harness::load_verify_config(config_path);
    if (out_dir) cfg.out_dir = out_dir;
    const int failed = softpg::harness::verify_suite(cfg);
    if (failures) *failures = failed;
    if (failed > 0) {
      g_last_error = std::to_string(failed) + " properties failed";
      return SOFTPG_ERR_RUN;
    }
    return SOFTPG_OK;
  });
}

}  // extern "C"
