#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "softpg/bandit.hpp"
#include "softpg/linesearch.hpp"
#include "softpg/matrix.hpp"
#include "softpg/mdp.hpp"
#include "softpg/rng.hpp"

namespace softpg::opt {

enum class Algorithm {
  PG,         // constant step 1/L
  PG_LS,      // Armijo backtracking
  PG_LOG_LS,  // Armijo condition on the log-suboptimality
  GNPG,       // normalized gradient
  PG_A,       // adaptive step from the scaled advantage
  PG_E,       // entropy-regularized, fixed tau, step 1/L^tau
  PG_E_MS,    // multi-stage entropy annealing, exact gradients
  SPG_ESS,    // stochastic, exponentially decreasing steps
  SPG_ESS_D,  // same with doubling-trick restarts
  SPG_O_G,    // stochastic, oracle gradient-norm step
  SPG_O_R,    // stochastic, oracle reward-gap step
  SPG_E_ESS,  // stochastic entropy, fixed tau
  SPG_E_MS,   // stochastic multi-stage entropy annealing
};

Algorithm algorithm_from_string(const std::string& tag);
std::string algorithm_to_string(Algorithm a);
bool algorithm_is_stochastic(Algorithm a);

enum class InitKind { Uniform, Bad };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::PG;
  int64_t iters = 1000;

  // Exact constant-step / fixed-tau methods. eta = 0 selects 1/L (1/L^tau).
  double eta = 0.0;
  double tau = 0.0;

  // Line searches. eta_max is ls_C / ls_epsilon unless set explicitly.
  double ls_h = 0.5;
  double ls_epsilon = 1e-4;
  double ls_C = 1.0;
  double ls_eta_max = 0.0;
  double ls_backtrack = 0.5;
  int ls_max_backtracks = 60;
  bool ls_adaptive_eta_max = false;  // eta_max(t) = C / max(eps, f* - f(theta_t))

  // GNPG: concentrability plug-in; 0 selects the 1/S default.
  double c_infinity = 0.0;

  // Exponentially decreasing step sizes. eta0 = 0 selects 1/18 in SGC mode on
  // bandits and 1/L otherwise.
  double eta0 = 0.0;
  double beta = 1.0;
  bool sgc_mode = true;
  int64_t doubling_T0 = 5000;

  // Multi-stage entropy annealing.
  double tau0 = 0.5;
  double p = 1.0;
  double B1 = 1.0;
  double B4 = 0.0;  // 0 selects the setting's constant
  int n_stages = 6;
  bool ms_doubling = false;  // stage lengths 2^{i-1} T1 instead of the ledger formula
  int64_t ms_T1 = 5000;

  // Initialization.
  InitKind init = InitKind::Uniform;
  double bad_logit = 12.0;

  // Trace thinning target; every iteration is recorded when T <= record_cap.
  int64_t record_cap = 10000;

  void validate_for(bool is_bandit, int actions) const;
};

struct TraceRow {
  int64_t iter = 0;
  double f = 0.0;         // unregularized objective
  double subopt = 0.0;    // f* - f
  double grad_norm = 0.0; // exact |grad f^tau| or |g_hat|
  double eta = 0.0;       // step applied at this iteration (0 for the initial row)
  int stage = 0;
  double tau = 0.0;
  double f_obj = 0.0;     // objective actually ascended (f^tau); equals f when tau = 0
};

enum class RunStatus { Ok, Diverged, Converged, LineSearchFailure };
std::string run_status_to_string(RunStatus s);

struct StageInfo {
  int index = 0;
  double tau = 0.0;
  double eta0 = 0.0;
  int64_t length = 0;
  int64_t start = 0;  // global iteration of the first update of the stage
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<StageInfo> stages;
  RunStatus status = RunStatus::Ok;
  std::string algorithm;
  std::string instance_id;
  uint64_t seed = 0;
  int64_t iterations_run = 0;
  Matrix final_theta;
  double final_f = 0.0;
  double final_subopt = 0.0;
  double wall_seconds = 0.0;
};

// Uniform facade over bandit and MDP instances for the update loops.
class Env {
 public:
  virtual ~Env() = default;
  virtual std::string id() const = 0;
  virtual int states() const = 0;
  virtual int actions() const = 0;
  virtual bool is_bandit() const = 0;

  virtual double value(const Matrix& theta, double tau) const = 0;
  virtual Matrix gradient(const Matrix& theta, double tau) const = 0;
  virtual void value_and_gradient(const Matrix& theta, double tau, double* f,
                                  Matrix* grad) const = 0;
  virtual Matrix sample_gradient(const Matrix& theta, double tau, Rng& rng) const = 0;

  virtual double optimal_value(double tau) const = 0;  // f*, f^{*tau}; memoized
  virtual double smoothness(double tau) const = 0;     // L, L^tau
  virtual double smoothness_min() const = 0;           // min over tau in [0,1]
  virtual double smoothness_max() const = 0;           // max over tau in [0,1]
  virtual double nonuniform_smoothness() const = 0;    // L1 (MDP: with the 1/S plug-in)
  virtual double grad_norm_bound() const = 0;          // samplewise |g_hat| bound
  virtual double sample_variance_bound(double tau) const = 0;
  virtual double entropy_shift_constant() const = 0;   // Assumption-5 B4

  virtual const bandit::BanditSpec* bandit_spec() const { return nullptr; }
  virtual const mdp::MdpSpec* mdp_spec() const { return nullptr; }

  virtual Matrix initial_theta(InitKind init, double bad_logit) const = 0;
};

std::unique_ptr<Env> make_bandit_env(bandit::BanditSpec spec, std::string id);
std::unique_ptr<Env> make_mdp_env(mdp::MdpSpec spec, std::string id);

// Stage plan of the multi-stage algorithms (exact formulas or the doubling
// override), computed up front from the config alone.
std::vector<StageInfo> multistage_plan(const Env& env, const OptimizerConfig& cfg);
int64_t multistage_total_iterations(const Env& env, const OptimizerConfig& cfg);

RunTrace run_exact_pg(const Env& env, const OptimizerConfig& cfg);
RunTrace run_pg_linesearch(const Env& env, const OptimizerConfig& cfg);
RunTrace run_gnpg(const Env& env, const OptimizerConfig& cfg);
RunTrace run_pg_a(const Env& env, const OptimizerConfig& cfg);
RunTrace run_spg_ess(const Env& env, const OptimizerConfig& cfg, uint64_t seed);
RunTrace run_spg_oracle(const Env& env, const OptimizerConfig& cfg, uint64_t seed);
RunTrace run_multistage_exact(const Env& env, const OptimizerConfig& cfg);
RunTrace run_multistage_stochastic(const Env& env, const OptimizerConfig& cfg, uint64_t seed);

// Dispatch on cfg.algorithm. The seed is ignored by the exact methods.
RunTrace run(const Env& env, const OptimizerConfig& cfg, uint64_t seed);

}  // namespace softpg::opt
