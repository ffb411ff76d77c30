// Command-line harness over the softpg C API.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "softpg/softpg.h"

namespace {

int fail_with(int code, const std::string& context) {
  std::cerr << "softpg: " << context << ": " << softpg_last_error() << "\n";
  return code;
}

bool looks_like_path(const std::string& s) {
  return s.find('/') != std::string::npos || s.find('.') != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softmax policy gradient experiment harness"};
  app.require_subcommand(1);

  std::string target, out_dir, verify_config;
  uint64_t seed = 0;
  int64_t iters = 0;
  int workers = 0;
  bool seed_set = false;

  auto* run = app.add_subcommand("run", "run a preset or a config file");
  run->add_option("target", target, "preset name or config path")->required();
  run->add_option("--seed", seed, "base seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--iters", iters, "iteration-count override");
  run->add_option("--workers", workers, "worker pool width");
  run->add_option("--out", out_dir, "output directory override");

  auto* verify = app.add_subcommand("verify", "run the numerical property suite");
  verify->add_option("--config", verify_config, "verify config path");
  verify->add_option("--out", out_dir, "output directory override");

  auto* list = app.add_subcommand("list-presets", "print the built-in presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : SOFTPG_ERR_USAGE;
  }

  if (const char* env_out = std::getenv("SOFTPG_OUT"); env_out && *env_out) out_dir = env_out;

  if (list->parsed()) {
    const int n = softpg_preset_count();
    for (int i = 0; i < n; ++i) {
      char buf[128];
      if (softpg_preset_name(i, buf, sizeof(buf)) == SOFTPG_OK) std::cout << buf << "\n";
    }
    return 0;
  }

  if (verify->parsed()) {
    int failures = 0;
    const int rc = softpg_verify(verify_config.empty() ? nullptr : verify_config.c_str(),
                                 out_dir.empty() ? nullptr : out_dir.c_str(), &failures);
    if (rc == SOFTPG_OK) {
      std::cout << "verify: all properties passed\n";
      return 0;
    }
    if (rc == SOFTPG_ERR_RUN)
      std::cerr << "verify: " << failures << " properties failed (see properties.csv)\n";
    else
      return fail_with(rc, "verify");
    return rc;
  }

  // run
  softpg_experiment* exp = nullptr;
  int rc;
  if (looks_like_path(target))
    rc = softpg_experiment_load(target.c_str(), &exp);
  else
    rc = softpg_experiment_from_preset(target.c_str(), &exp);
  if (rc != SOFTPG_OK) return fail_with(rc, "loading " + target);

  if (seed_set && (rc = softpg_experiment_set_seed(exp, seed)) != SOFTPG_OK)
    return fail_with(rc, "--seed");
  if (iters > 0 && (rc = softpg_experiment_set_iters(exp, iters)) != SOFTPG_OK)
    return fail_with(rc, "--iters");
  if (workers > 0 && (rc = softpg_experiment_set_workers(exp, workers)) != SOFTPG_OK)
    return fail_with(rc, "--workers");
  if (!out_dir.empty() && (rc = softpg_experiment_set_output_dir(exp, out_dir.c_str())) != SOFTPG_OK)
    return fail_with(rc, "--out");

  rc = softpg_experiment_run(exp);
  softpg_experiment_free(exp);
  if (rc == SOFTPG_OK) {
    std::cout << "run: " << target << " complete\n";
    return 0;
  }
  return fail_with(rc, "running " + target);
}
