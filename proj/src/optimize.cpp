#include "softpg/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "softpg/schedules.hpp"
#include "softpg/verify.hpp"

namespace softpg::opt {

Algorithm algorithm_from_string(const std::string& tag) {
  static const std::map<std::string, Algorithm> m = {
      {"PG", Algorithm::PG},           {"PG-LS", Algorithm::PG_LS},
      {"PG-Log-LS", Algorithm::PG_LOG_LS}, {"GNPG", Algorithm::GNPG},
      {"PG-A", Algorithm::PG_A},       {"PG-E", Algorithm::PG_E},
      {"PG-E-MS", Algorithm::PG_E_MS}, {"SPG-ESS", Algorithm::SPG_ESS},
      {"SPG-ESS-D", Algorithm::SPG_ESS_D}, {"SPG-O-G", Algorithm::SPG_O_G},
      {"SPG-O-R", Algorithm::SPG_O_R}, {"SPG-E-ESS", Algorithm::SPG_E_ESS},
      {"SPG-E-MS", Algorithm::SPG_E_MS},
  };
  const auto it = m.find(tag);
  if (it == m.end()) throw std::invalid_argument("unknown algorithm tag: " + tag);
  return it->second;
}

std::string algorithm_to_string(Algorithm a) {
  switch (a) {
    case Algorithm::PG: return "PG";
    case Algorithm::PG_LS: return "PG-LS";
    case Algorithm::PG_LOG_LS: return "PG-Log-LS";
    case Algorithm::GNPG: return "GNPG";
    case Algorithm::PG_A: return "PG-A";
    case Algorithm::PG_E: return "PG-E";
    case Algorithm::PG_E_MS: return "PG-E-MS";
    case Algorithm::SPG_ESS: return "SPG-ESS";
    case Algorithm::SPG_ESS_D: return "SPG-ESS-D";
    case Algorithm::SPG_O_G: return "SPG-O-G";
    case Algorithm::SPG_O_R: return "SPG-O-R";
    case Algorithm::SPG_E_ESS: return "SPG-E-ESS";
    case Algorithm::SPG_E_MS: return "SPG-E-MS";
  }
  return "PG";
}

bool algorithm_is_stochastic(Algorithm a) {
  switch (a) {
    case Algorithm::SPG_ESS:
    case Algorithm::SPG_ESS_D:
    case Algorithm::SPG_O_G:
    case Algorithm::SPG_O_R:
    case Algorithm::SPG_E_ESS:
    case Algorithm::SPG_E_MS:
      return true;
    default:
      return false;
  }
}

std::string run_status_to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::Converged: return "converged";
    case RunStatus::LineSearchFailure: return "line_search_failure";
  }
  return "ok";
}

void OptimizerConfig::validate_for(bool is_bandit_env, int /*actions*/) const {
  if (iters < 1 && algorithm != Algorithm::PG_E_MS) {
    if (!(algorithm == Algorithm::SPG_E_MS && !ms_doubling))
      throw std::invalid_argument("optimizer: iters must be >= 1");
  }
  switch (algorithm) {
    case Algorithm::PG_E:
    case Algorithm::SPG_E_ESS:
      if (!(tau > 0.0)) throw std::invalid_argument("optimizer: entropy methods need tau > 0");
      break;
    case Algorithm::PG_E_MS:
    case Algorithm::SPG_E_MS:
      if (!(tau0 > 0.0 && p >= 1.0 && B1 > 0.0 && n_stages >= 1))
        throw std::invalid_argument("optimizer: multi-stage needs tau0 > 0, p >= 1, B1 > 0");
      break;
    case Algorithm::PG_A:
      if (is_bandit_env)
        throw std::invalid_argument("optimizer: PG-A requires an MDP environment");
      break;
    case Algorithm::SPG_O_G:
    case Algorithm::SPG_O_R:
      if (!is_bandit_env)
        throw std::invalid_argument("optimizer: oracle baselines are bandit-only");
      break;
    default:
      break;
  }
  if (!(ls_h > 0.0 && ls_h < 1.0)) throw std::invalid_argument("optimizer: h must be in (0,1)");
  if (!(beta >= 1.0)) throw std::invalid_argument("optimizer: beta must be >= 1");
}

namespace {

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ------------------------------------------------------------------ envs

class BanditEnv final : public Env {
 public:
  BanditEnv(bandit::BanditSpec spec, std::string id) : spec_(std::move(spec)), id_(std::move(id)) {
    spec_.validate();
  }

  std::string id() const override { return id_; }
  int states() const override { return 1; }
  int actions() const override { return spec_.arms(); }
  bool is_bandit() const override { return true; }

  double value(const Matrix& theta, double tau) const override {
    return tau == 0.0 ? bandit::value(spec_, theta) : bandit::entropy_value(spec_, theta, tau);
  }

  Matrix gradient(const Matrix& theta, double tau) const override {
    const auto g = tau == 0.0 ? bandit::gradient(spec_, theta)
                              : bandit::entropy_gradient(spec_, theta, tau);
    Matrix out(1, spec_.arms());
    std::copy(g.begin(), g.end(), out.data().begin());
    return out;
  }

  void value_and_gradient(const Matrix& theta, double tau, double* f,
                          Matrix* grad) const override {
    if (f) *f = value(theta, tau);
    if (grad) *grad = gradient(theta, tau);
  }

  Matrix sample_gradient(const Matrix& theta, double tau, Rng& rng) const override {
    const auto s = tau == 0.0 ? bandit::sample_gradient(spec_, theta, rng)
                              : bandit::entropy_sample_gradient(spec_, theta, tau, rng);
    Matrix out(1, spec_.arms());
    std::copy(s.g_hat.begin(), s.g_hat.end(), out.data().begin());
    return out;
  }

  double optimal_value(double tau) const override {
    if (tau == 0.0) return spec_.optimal_value();
    std::lock_guard<std::mutex> lock(mu_);
    auto it = soft_opt_.find(tau);
    if (it == soft_opt_.end())
      it = soft_opt_.emplace(tau, bandit::soft_optimum(spec_, tau).value).first;
    return it->second;
  }

  double smoothness(double tau) const override {
    return tau == 0.0 ? bandit::smoothness() : bandit::entropy_smoothness(tau, spec_.arms());
  }
  double smoothness_min() const override { return bandit::smoothness(); }
  double smoothness_max() const override { return bandit::entropy_smoothness(1.0, spec_.arms()); }
  double nonuniform_smoothness() const override { return bandit::nonuniform_smoothness(); }
  double grad_norm_bound() const override { return bandit::grad_norm_bound(); }
  double sample_variance_bound(double tau) const override {
    return bandit::sample_variance_bound(tau, spec_.arms());
  }
  double entropy_shift_constant() const override {
    return verify::lambert_w((spec_.arms() - 1) / std::exp(1.0)) +
           std::log(static_cast<double>(spec_.arms()));
  }

  const bandit::BanditSpec* bandit_spec() const override { return &spec_; }

  Matrix initial_theta(InitKind init, double bad_logit) const override {
    Matrix theta(1, spec_.arms());
    if (init == InitKind::Bad) {
      int worst = 0;
      for (int a = 1; a < spec_.arms(); ++a)
        if (spec_.means[a] < spec_.means[worst]) worst = a;
      theta(0, worst) = bad_logit;
    }
    return theta;
  }

 private:
  bandit::BanditSpec spec_;
  std::string id_;
  mutable std::mutex mu_;
  mutable std::map<double, double> soft_opt_;
};

class MdpEnv final : public Env {
 public:
  MdpEnv(mdp::MdpSpec spec, std::string id) : spec_(std::move(spec)), id_(std::move(id)) {
    spec_.validate();
  }

  std::string id() const override { return id_; }
  int states() const override { return spec_.S; }
  int actions() const override { return spec_.A; }
  bool is_bandit() const override { return false; }

  double value(const Matrix& theta, double tau) const override {
    return mdp::value_of(spec_, theta, tau);
  }

  Matrix gradient(const Matrix& theta, double tau) const override {
    return mdp::evaluate(spec_, theta, tau).grad;
  }

  void value_and_gradient(const Matrix& theta, double tau, double* f,
                          Matrix* grad) const override {
    const auto cache = mdp::evaluate(spec_, theta, tau);
    if (f) *f = cache.f;
    if (grad) *grad = cache.grad;
  }

  Matrix sample_gradient(const Matrix& theta, double tau, Rng& rng) const override {
    const auto cache = mdp::evaluate(spec_, theta, tau);
    return mdp::sample_gradient(spec_, theta, cache, tau, rng).g_hat;
  }

  double optimal_value(double tau) const override {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = opt_.find(tau);
    if (it == opt_.end()) it = opt_.emplace(tau, mdp::optimal_values(spec_, tau).value).first;
    return it->second;
  }

  double smoothness(double tau) const override {
    return tau == 0.0 ? mdp::smoothness(spec_.gamma)
                      : mdp::entropy_smoothness(spec_.gamma, tau, spec_.A);
  }
  double smoothness_min() const override { return mdp::smoothness(spec_.gamma); }
  double smoothness_max() const override {
    return mdp::entropy_smoothness(spec_.gamma, 1.0, spec_.A);
  }
  double nonuniform_smoothness() const override {
    return mdp::nonuniform_smoothness(spec_.gamma, spec_.S, 1.0 / spec_.S);
  }
  double grad_norm_bound() const override { return mdp::grad_norm_bound(spec_.gamma, spec_.S); }
  double sample_variance_bound(double tau) const override {
    return mdp::sample_variance_bound(spec_.gamma, tau, spec_.S, spec_.A);
  }
  double entropy_shift_constant() const override {
    return 2.0 * std::log(static_cast<double>(spec_.A)) / (1.0 - spec_.gamma);
  }

  const mdp::MdpSpec* mdp_spec() const override { return &spec_; }

  Matrix initial_theta(InitKind init, double /*bad_logit*/) const override {
    if (init == InitKind::Bad)
      throw std::invalid_argument("bad initialization is defined for bandit instances only");
    return Matrix(spec_.S, spec_.A);
  }

 private:
  mdp::MdpSpec spec_;
  std::string id_;
  mutable std::mutex mu_;
  mutable std::map<double, double> opt_;
};

// ------------------------------------------------------------------ tracing

class Recorder {
 public:
  Recorder(RunTrace* trace, const Env* env, int64_t total_iters, int64_t record_cap)
      : trace_(trace), env_(env), total_(total_iters) {
    stride_ = total_iters <= record_cap ? 1 : (total_iters + record_cap - 1) / record_cap;
  }

  bool due(int64_t t, bool force = false) const {
    return force || t % stride_ == 0 || t == total_ || t == 0;
  }

  bool has_row_at(int64_t t) const {
    return !trace_->rows.empty() && trace_->rows.back().iter == t;
  }

  // f_obj is the ascended objective at theta; the unregularized value is
  // recomputed only when it differs (tau > 0).
  void record(int64_t t, const Matrix& theta, double tau, double f_obj, double grad_norm,
              double eta, int stage, bool force = false) {
    if (!due(t, force)) return;
    TraceRow row;
    row.iter = t;
    row.f_obj = f_obj;
    row.f = tau == 0.0 ? f_obj : env_->value(theta, 0.0);
    row.subopt = env_->optimal_value(0.0) - row.f;
    row.grad_norm = grad_norm;
    row.eta = eta;
    row.stage = stage;
    row.tau = tau;
    if (!trace_->rows.empty() && trace_->rows.back().iter == t) {
      trace_->rows.back() = row;
      return;
    }
    trace_->rows.push_back(row);
  }

 private:
  RunTrace* trace_;
  const Env* env_;
  int64_t total_;
  int64_t stride_ = 1;
};

RunTrace make_shell(const Env& env, const OptimizerConfig& cfg, uint64_t seed) {
  RunTrace trace;
  trace.algorithm = algorithm_to_string(cfg.algorithm);
  trace.instance_id = env.id();
  trace.seed = seed;
  return trace;
}

void finalize(RunTrace* trace, const Env& env, const Matrix& theta, double t_start) {
  trace->final_theta = theta;
  if (theta.all_finite()) {
    trace->final_f = env.value(theta, 0.0);
    trace->final_subopt = env.optimal_value(0.0) - trace->final_f;
  } else {
    trace->final_f = std::numeric_limits<double>::quiet_NaN();
    trace->final_subopt = std::numeric_limits<double>::quiet_NaN();
  }
  trace->wall_seconds = now_seconds() - t_start;
}

}  // namespace

std::unique_ptr<Env> make_bandit_env(bandit::BanditSpec spec, std::string id) {
  return std::make_unique<BanditEnv>(std::move(spec), std::move(id));
}

std::unique_ptr<Env> make_mdp_env(mdp::MdpSpec spec, std::string id) {
  return std::make_unique<MdpEnv>(std::move(spec), std::move(id));
}

// ------------------------------------------------------------------ exact loops

RunTrace run_exact_pg(const Env& env, const OptimizerConfig& cfg) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const double tau = cfg.algorithm == Algorithm::PG_E ? cfg.tau : 0.0;
  const double eta = cfg.eta > 0.0 ? cfg.eta : 1.0 / env.smoothness(tau);
  RunTrace trace = make_shell(env, cfg, 0);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  double f_obj = 0.0;
  Matrix grad;
  env.value_and_gradient(theta, tau, &f_obj, &grad);
  rec.record(0, theta, tau, f_obj, norm2(grad), 0.0, 0);
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    const double step_gnorm = norm2(grad);
    theta += eta * grad;
    if (!theta.all_finite()) {
      trace.status = RunStatus::Diverged;
      trace.iterations_run = t;
      finalize(&trace, env, theta, t0);
      return trace;
    }
    trace.iterations_run = t;
    env.value_and_gradient(theta, tau, &f_obj, &grad);
    rec.record(t, theta, tau, f_obj, step_gnorm, eta, 0);
  }
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run_pg_linesearch(const Env& env, const OptimizerConfig& cfg) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const bool log_variant = cfg.algorithm == Algorithm::PG_LOG_LS;
  const double f_star = env.optimal_value(0.0);
  RunTrace trace = make_shell(env, cfg, 0);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  linesearch::Config ls;
  ls.h = cfg.ls_h;
  ls.backtrack = cfg.ls_backtrack;
  ls.max_backtracks = cfg.ls_max_backtracks;
  const double fixed_eta_max =
      cfg.ls_eta_max > 0.0 ? cfg.ls_eta_max : cfg.ls_C / cfg.ls_epsilon;

  const linesearch::Objective objective = [&](const Matrix& th) { return env.value(th, 0.0); };

  double f = 0.0;
  Matrix grad;
  env.value_and_gradient(theta, 0.0, &f, &grad);
  rec.record(0, theta, 0.0, f, norm2(grad), 0.0, 0);
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    if (log_variant && f_star - f <= cfg.ls_epsilon) {
      trace.status = RunStatus::Converged;
      break;
    }
    ls.eta_max = cfg.ls_adaptive_eta_max
                     ? cfg.ls_C / std::max(cfg.ls_epsilon, f_star - f)
                     : fixed_eta_max;
    const auto res = log_variant ? linesearch::log_armijo_search(objective, f_star, theta, grad, ls)
                                 : linesearch::armijo_search(objective, theta, grad, ls);
    if (res.outcome == linesearch::Outcome::BacktracksExhausted) {
      trace.status = RunStatus::LineSearchFailure;
      break;
    }
    if (res.outcome == linesearch::Outcome::AtOptimum) {
      trace.status = RunStatus::Converged;
      break;
    }
    const double step_gnorm = norm2(grad);
    theta = axpy(theta, res.eta, grad);
    trace.iterations_run = t;
    env.value_and_gradient(theta, 0.0, &f, &grad);
    rec.record(t, theta, 0.0, f, step_gnorm, res.eta, 0);
  }
  if (!rec.has_row_at(trace.iterations_run))
    rec.record(trace.iterations_run, theta, 0.0, f, norm2(grad), 0.0, 0, true);
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run_gnpg(const Env& env, const OptimizerConfig& cfg) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  double eta;
  if (env.is_bandit()) {
    eta = cfg.eta > 0.0 ? cfg.eta : 1.0 / 6.0;
  } else {
    const double gamma = env.mdp_spec()->gamma;
    const double u = 1.0 - gamma;
    const double c_inf = cfg.c_infinity > 0.0 ? cfg.c_infinity : 1.0 / env.states();
    eta = cfg.eta > 0.0 ? cfg.eta : u * gamma / (6.0 * u + 4.0 * (c_inf - u));
  }
  RunTrace trace = make_shell(env, cfg, 0);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  double f = 0.0;
  Matrix grad;
  env.value_and_gradient(theta, 0.0, &f, &grad);
  rec.record(0, theta, 0.0, f, norm2(grad), 0.0, 0);
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    const double gnorm = norm2(grad);
    if (gnorm < 1e-14) {
      trace.status = RunStatus::Converged;
      break;
    }
    theta = axpy(theta, eta / gnorm, grad);
    trace.iterations_run = t;
    env.value_and_gradient(theta, 0.0, &f, &grad);
    rec.record(t, theta, 0.0, f, gnorm, eta, 0);
  }
  if (!rec.has_row_at(trace.iterations_run))
    rec.record(trace.iterations_run, theta, 0.0, f, norm2(grad), 0.0, 0, true);
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run_pg_a(const Env& env, const OptimizerConfig& cfg) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const mdp::MdpSpec& spec = *env.mdp_spec();
  const double t0 = now_seconds();
  RunTrace trace = make_shell(env, cfg, 0);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  auto cache = mdp::evaluate(spec, theta, 0.0);
  rec.record(0, theta, 0.0, cache.f, norm2(cache.grad), 0.0, 0);
  for (int64_t t = 1; t <= cfg.iters; ++t) {
    const auto pi = policy::softmax(theta);
    // A_hat(s,a) = pi(a|s) A(s,a); the active set keeps states with a
    // positive entry.
    double min_max_abs = std::numeric_limits<double>::infinity();
    bool any_active = false;
    for (int s = 0; s < spec.S; ++s) {
      double mx = -std::numeric_limits<double>::infinity();
      double mx_abs = 0.0;
      for (int a = 0; a < spec.A; ++a) {
        const double v = pi(s, a) * cache.Adv(s, a);
        mx = std::max(mx, v);
        mx_abs = std::max(mx_abs, std::abs(v));
      }
      if (mx > 0.0) {
        any_active = true;
        min_max_abs = std::min(min_max_abs, mx_abs);
      }
    }
    if (!any_active || min_max_abs <= 0.0) {
      trace.status = RunStatus::Converged;
      break;
    }
    const double eta = 1.0 / min_max_abs;
    const double step_gnorm = norm2(cache.grad);
    theta = axpy(theta, eta, cache.grad);
    if (!theta.all_finite()) {
      trace.status = RunStatus::Diverged;
      trace.iterations_run = t;
      break;
    }
    trace.iterations_run = t;
    cache = mdp::evaluate(spec, theta, 0.0);
    rec.record(t, theta, 0.0, cache.f, step_gnorm, eta, 0);
  }
  if (theta.all_finite() && !rec.has_row_at(trace.iterations_run))
    rec.record(trace.iterations_run, theta, 0.0, cache.f, norm2(cache.grad), 0.0, 0, true);
  finalize(&trace, env, theta, t0);
  return trace;
}

// ------------------------------------------------------------------ stochastic loops

namespace {

// SGC mode applies to unregularized bandit runs: the 1/18 default plus the
// eta0 < 1/(L1^2 B) safety check. Everything else runs in variance mode with
// eta0 = 1/L^tau.
double resolve_eta0(const Env& env, const OptimizerConfig& cfg, double tau) {
  const bool sgc = cfg.sgc_mode && env.is_bandit() && tau == 0.0;
  double eta0 = cfg.eta0;
  if (eta0 <= 0.0) eta0 = sgc ? 1.0 / 18.0 : 1.0 / env.smoothness(tau);
  if (sgc) {
    const double l1 = env.nonuniform_smoothness();
    const double limit = 1.0 / (l1 * l1 * env.grad_norm_bound());
    if (!(eta0 < limit))
      throw std::invalid_argument("optimizer: SGC mode requires eta0 < 1/(L1^2 B)");
  }
  return eta0;
}

}  // namespace

RunTrace run_spg_ess(const Env& env, const OptimizerConfig& cfg, uint64_t seed) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const double tau = cfg.algorithm == Algorithm::SPG_E_ESS ? cfg.tau : 0.0;
  const bool doubling = cfg.algorithm == Algorithm::SPG_ESS_D;
  const double eta0 = resolve_eta0(env, cfg, tau);

  RunTrace trace = make_shell(env, cfg, seed);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Rng rng(seed);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  rec.record(0, theta, tau, env.value(theta, tau), 0.0, 0.0, 0);

  schedules::ExpSchedule flat;
  int64_t epoch_start = 0, epoch_len = 0;
  if (doubling) {
    epoch_len = cfg.doubling_T0;
    flat = schedules::ExpSchedule(eta0, cfg.beta, epoch_len);
  } else {
    flat = schedules::ExpSchedule(eta0, cfg.beta, std::max<int64_t>(cfg.iters, 1));
  }

  for (int64_t t = 1; t <= cfg.iters; ++t) {
    double eta;
    if (doubling) {
      if (t - 1 >= epoch_start + epoch_len) {
        epoch_start += epoch_len;
        epoch_len *= 2;
        flat = schedules::ExpSchedule(eta0, cfg.beta, epoch_len);
      }
      eta = flat.step(t - epoch_start);  // first update of an epoch uses alpha^1
    } else {
      eta = flat.step(t);
    }
    const Matrix ghat = env.sample_gradient(theta, tau, rng);
    theta = axpy(theta, eta, ghat);
    if (!theta.all_finite()) {
      trace.status = RunStatus::Diverged;
      trace.iterations_run = t;
      finalize(&trace, env, theta, t0);
      return trace;
    }
    trace.iterations_run = t;
    if (rec.due(t))
      rec.record(t, theta, tau, env.value(theta, tau), norm2(ghat), eta, 0);
  }
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run_spg_oracle(const Env& env, const OptimizerConfig& cfg, uint64_t seed) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const bool gap_variant = cfg.algorithm == Algorithm::SPG_O_R;
  double fixed_eta = 0.0;
  if (gap_variant) {
    const double gap = env.bandit_spec()->reward_gap();
    fixed_eta = gap * gap / (40.0 * std::pow(10.0, 1.5));
  }

  RunTrace trace = make_shell(env, cfg, seed);
  Recorder rec(&trace, &env, cfg.iters, cfg.record_cap);
  Rng rng(seed);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);
  rec.record(0, theta, 0.0, env.value(theta, 0.0), 0.0, 0.0, 0);

  for (int64_t t = 1; t <= cfg.iters; ++t) {
    const double eta = gap_variant ? fixed_eta : norm2(env.gradient(theta, 0.0)) / 12.0;
    const Matrix ghat = env.sample_gradient(theta, 0.0, rng);
    theta = axpy(theta, eta, ghat);
    trace.iterations_run = t;
    if (rec.due(t))
      rec.record(t, theta, 0.0, env.value(theta, 0.0), norm2(ghat), eta, 0);
  }
  finalize(&trace, env, theta, t0);
  return trace;
}

// ------------------------------------------------------------------ multi-stage

std::vector<StageInfo> multistage_plan(const Env& env, const OptimizerConfig& cfg) {
  const double B4 = cfg.B4 > 0.0 ? cfg.B4 : env.entropy_shift_constant();
  std::vector<StageInfo> plan;
  double tau_prev = cfg.tau0;
  int64_t start = 0;
  if (cfg.algorithm == Algorithm::SPG_E_MS && cfg.ms_doubling) {
    // Doubling override: stage lengths T1, 2 T1, ... until the iteration
    // budget is reached.
    int64_t length = cfg.ms_T1;
    for (int i = 1; start < cfg.iters; ++i) {
      StageInfo st;
      st.index = i;
      st.tau = tau_prev / 2.0;
      st.eta0 = 1.0 / env.smoothness(st.tau);
      st.length = length;
      st.start = start;
      plan.push_back(st);
      tau_prev = st.tau;
      start += length;
      length *= 2;
    }
    return plan;
  }
  for (int i = 1; i <= cfg.n_stages; ++i) {
    StageInfo st;
    st.index = i;
    st.tau = tau_prev / 2.0;
    st.eta0 = 1.0 / env.smoothness(st.tau);
    const double mu_i = std::pow(st.tau, cfg.p) * cfg.B1;
    if (cfg.algorithm == Algorithm::PG_E_MS) {
      st.length = schedules::stage_length_exact(tau_prev, st.tau, st.eta0, mu_i, B4);
    } else {
      schedules::StochasticStageParams p;
      p.tau_prev = tau_prev;
      p.tau_i = st.tau;
      p.mu_i = mu_i;
      p.B1 = cfg.B1;
      p.B4 = B4;
      p.sigma2 = env.sample_variance_bound(st.tau);
      p.beta = cfg.beta;
      p.L_min = env.smoothness_min();
      p.L_max = env.smoothness_max();
      st.length = schedules::stage_length_stochastic(p).T;
    }
    st.start = start;
    start += st.length;
    plan.push_back(st);
    tau_prev = st.tau;
  }
  return plan;
}

int64_t multistage_total_iterations(const Env& env, const OptimizerConfig& cfg) {
  int64_t total = 0;
  for (const auto& st : multistage_plan(env, cfg)) total += st.length;
  if (cfg.algorithm == Algorithm::SPG_E_MS && cfg.ms_doubling)
    total = std::min(total, cfg.iters);
  return total;
}

RunTrace run_multistage_exact(const Env& env, const OptimizerConfig& cfg) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const auto plan = multistage_plan(env, cfg);
  int64_t total = 0;
  for (const auto& st : plan) total += st.length;

  RunTrace trace = make_shell(env, cfg, 0);
  trace.stages = plan;
  Recorder rec(&trace, &env, total, cfg.record_cap);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);

  {
    const double f0 = env.value(theta, plan.front().tau);
    rec.record(0, theta, plan.front().tau, f0, 0.0, 0.0, 0);
  }
  int64_t t = 0;
  for (const auto& st : plan) {
    for (int64_t k = 0; k < st.length; ++k) {
      const Matrix grad = env.gradient(theta, st.tau);
      theta = axpy(theta, st.eta0, grad);
      ++t;
      if (!theta.all_finite()) {
        trace.status = RunStatus::Diverged;
        trace.iterations_run = t;
        finalize(&trace, env, theta, t0);
        return trace;
      }
      trace.iterations_run = t;
      const bool boundary = k + 1 == st.length;
      if (rec.due(t, boundary))
        rec.record(t, theta, st.tau, env.value(theta, st.tau), norm2(grad), st.eta0, st.index,
                   boundary);
    }
  }
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run_multistage_stochastic(const Env& env, const OptimizerConfig& cfg, uint64_t seed) {
  cfg.validate_for(env.is_bandit(), env.actions());
  const double t0 = now_seconds();
  const auto plan = multistage_plan(env, cfg);
  int64_t total = 0;
  for (const auto& st : plan) total += st.length;
  if (cfg.ms_doubling) total = std::min(total, cfg.iters);

  RunTrace trace = make_shell(env, cfg, seed);
  trace.stages = plan;
  Recorder rec(&trace, &env, total, cfg.record_cap);
  Rng rng(seed);
  Matrix theta = env.initial_theta(cfg.init, cfg.bad_logit);
  rec.record(0, theta, plan.front().tau, env.value(theta, plan.front().tau), 0.0, 0.0, 0);

  int64_t t = 0;
  for (const auto& st : plan) {
    if (t >= total) break;
    const schedules::ExpSchedule sched(st.eta0, cfg.beta, st.length);
    for (int64_t k = 1; k <= st.length && t < total; ++k) {
      const double eta = sched.step(k);  // first update of the stage uses alpha^1
      const Matrix ghat = env.sample_gradient(theta, st.tau, rng);
      theta = axpy(theta, eta, ghat);
      ++t;
      if (!theta.all_finite()) {
        trace.status = RunStatus::Diverged;
        trace.iterations_run = t;
        finalize(&trace, env, theta, t0);
        return trace;
      }
      trace.iterations_run = t;
      const bool boundary = k == st.length || t == total;
      if (rec.due(t, boundary))
        rec.record(t, theta, st.tau, env.value(theta, st.tau), norm2(ghat), eta, st.index,
                   boundary);
    }
  }
  finalize(&trace, env, theta, t0);
  return trace;
}

RunTrace run(const Env& env, const OptimizerConfig& cfg, uint64_t seed) {
  switch (cfg.algorithm) {
    case Algorithm::PG:
    case Algorithm::PG_E:
      return run_exact_pg(env, cfg);
    case Algorithm::PG_LS:
    case Algorithm::PG_LOG_LS:
      return run_pg_linesearch(env, cfg);
    case Algorithm::GNPG:
      return run_gnpg(env, cfg);
    case Algorithm::PG_A:
      return run_pg_a(env, cfg);
    case Algorithm::SPG_ESS:
    case Algorithm::SPG_ESS_D:
    case Algorithm::SPG_E_ESS:
      return run_spg_ess(env, cfg, seed);
    case Algorithm::SPG_O_G:
    case Algorithm::SPG_O_R:
      return run_spg_oracle(env, cfg, seed);
    case Algorithm::PG_E_MS:
      return run_multistage_exact(env, cfg);
    case Algorithm::SPG_E_MS:
      return run_multistage_stochastic(env, cfg, seed);
  }
  throw std::invalid_argument("unknown algorithm");
}

}  // namespace softpg::opt
