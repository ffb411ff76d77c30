#include "softpg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "softpg/policy.hpp"

namespace softpg::verify {

PropertyReport PropertyReport::from(std::string name, int64_t trials, double max_violation,
                                    double tightness, double tolerance) {
  PropertyReport r;
  r.name = std::move(name);
  r.trials = trials;
  r.max_violation = max_violation;
  r.tightness = tightness;
  r.tolerance = tolerance;
  r.pass = max_violation <= tolerance;
  return r;
}

double lambert_w(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("lambert_w: defined on [0, inf) only");
  if (x == 0.0) return 0.0;
  double w = x < std::exp(1.0) ? std::log1p(x) : std::log(x) - std::log(std::log(x));
  for (int it = 0; it < 50; ++it) {
    const double ew = std::exp(w);
    const double res = w * ew - x;
    if (std::abs(res) <= 1e-13 * std::max(1.0, x)) break;
    const double denom = ew * (w + 1.0) - (w + 2.0) * res / (2.0 * w + 2.0);
    w -= res / denom;
  }
  return w;
}

double entropy_bias_bound(int arms, double tau) {
  if (arms < 2) throw std::invalid_argument("entropy_bias_bound: need A >= 2");
  if (!(tau > 0.0)) throw std::invalid_argument("entropy_bias_bound: tau must be positive");
  return tau * lambert_w((arms - 1) / std::exp(1.0));
}

double measured_entropy_bias(const bandit::BanditSpec& spec, double tau) {
  const auto soft = bandit::soft_optimum(spec, tau);
  double soft_reward = 0.0;
  for (int a = 0; a < spec.arms(); ++a) soft_reward += soft.pi[a] * spec.means[a];
  return spec.optimal_value() - soft_reward;
}

bandit::BanditSpec worst_case_bias_instance(int arms, double tau) {
  const double delta = tau * (lambert_w((arms - 1) / std::exp(1.0)) + 1.0);
  if (delta > 1.0)
    throw std::invalid_argument("worst_case_bias_instance: tau too large for rewards in [0,1]");
  bandit::BanditSpec spec;
  spec.means.assign(arms, 0.0);
  spec.means[0] = delta;
  return spec;
}

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& theta,
                        double step) {
  if (!(step >= 1e-8 && step <= 1e-3))
    throw std::invalid_argument("finite_diff_grad: step must be in [1e-8, 1e-3]");
  Matrix grad(theta.rows(), theta.cols());
  Matrix probe = theta;
  for (int i = 0; i < theta.size(); ++i) {
    const double saved = probe.data()[i];
    probe.data()[i] = saved + step;
    const double up = f(probe);
    probe.data()[i] = saved - step;
    const double down = f(probe);
    probe.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

Matrix random_theta(int S, int A, Rng& rng) {
  Matrix theta(S, A);
  for (int i = 0; i < theta.size(); ++i) theta.data()[i] = rng.uniform(-5.0, 5.0);
  return theta;
}

namespace {

Matrix random_direction(int S, int A, Rng& rng) {
  Matrix d(S, A);
  for (int i = 0; i < d.size(); ++i) d.data()[i] = rng.uniform(-1.0, 1.0);
  const double n = norm2(d);
  const double target = rng.uniform(1e-3, 1.0);
  for (int i = 0; i < d.size(); ++i) d.data()[i] *= target / n;
  return d;
}

struct Accumulator {
  double violation = -std::numeric_limits<double>::infinity();
  double tightness = 0.0;
  // For a bound lhs <= rhs: violation is lhs - rhs, tightness lhs/rhs.
  void upper(double lhs, double rhs) {
    violation = std::max(violation, lhs - rhs);
    if (rhs > 0.0) tightness = std::max(tightness, lhs / rhs);
  }
};

PropertyReport smoothness_report(const std::string& name,
                                 const std::function<double(const Matrix&)>& f,
                                 const std::function<Matrix(const Matrix&)>& grad, int S, int A,
                                 double L_claimed, int trials, Rng& rng) {
  Accumulator acc;
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(S, A, rng);
    const Matrix dir = random_direction(S, A, rng);
    const Matrix theta2 = theta + dir;
    const double remainder = std::abs(f(theta2) - f(theta) - dot(grad(theta), dir));
    const double n = norm2(dir);
    acc.upper(remainder, 0.5 * L_claimed * n * n);
  }
  return PropertyReport::from(name, trials, acc.violation, acc.tightness, kDefaultTolerance);
}

}  // namespace

PropertyReport check_smoothness(const bandit::BanditSpec& spec, double tau, double L_claimed,
                                int trials, Rng& rng) {
  const auto f = [&](const Matrix& th) { return bandit::entropy_value(spec, th, tau); };
  const auto g = [&](const Matrix& th) {
    const auto v = bandit::entropy_gradient(spec, th, tau);
    Matrix m(1, spec.arms());
    std::copy(v.begin(), v.end(), m.data().begin());
    return m;
  };
  const std::string name =
      tau == 0.0 ? "bandit_smoothness" : "bandit_entropy_smoothness_tau" + std::to_string(tau);
  return smoothness_report(name, f, g, 1, spec.arms(), L_claimed, trials, rng);
}

PropertyReport check_smoothness(const mdp::MdpSpec& spec, double tau, double L_claimed,
                                int trials, Rng& rng) {
  const auto f = [&](const Matrix& th) { return mdp::value_of(spec, th, tau); };
  const auto g = [&](const Matrix& th) { return mdp::evaluate(spec, th, tau).grad; };
  const std::string name =
      tau == 0.0 ? "mdp_smoothness" : "mdp_entropy_smoothness_tau" + std::to_string(tau);
  return smoothness_report(name, f, g, spec.S, spec.A, L_claimed, trials, rng);
}

PropertyReport check_lojasiewicz(const bandit::BanditSpec& spec, double tau, int trials,
                                 Rng& rng) {
  Accumulator acc;
  const int A = spec.arms();
  const double f_star = tau == 0.0 ? spec.optimal_value() : bandit::soft_optimum(spec, tau).value;
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(1, A, rng);
    const auto pi = policy::softmax(theta);
    double lhs, rhs;
    if (tau == 0.0) {
      const auto g = bandit::gradient(spec, theta);
      Matrix gm(1, A);
      std::copy(g.begin(), g.end(), gm.data().begin());
      lhs = norm2(gm);
      rhs = pi(0, spec.optimal_arm()) * (f_star - bandit::value(spec, theta));
    } else {
      const auto g = bandit::entropy_gradient(spec, theta, tau);
      Matrix gm(1, A);
      std::copy(g.begin(), g.end(), gm.data().begin());
      lhs = norm2(gm);
      double min_pi = 1.0;
      for (int a = 0; a < A; ++a) min_pi = std::min(min_pi, pi(0, a));
      const double gap = std::max(0.0, f_star - bandit::entropy_value(spec, theta, tau));
      rhs = std::sqrt(2.0 * tau) * min_pi * std::sqrt(gap);
    }
    acc.upper(rhs, lhs);  // rhs <= lhs is the claim
  }
  const std::string name =
      tau == 0.0 ? "bandit_lojasiewicz" : "bandit_entropy_lojasiewicz_tau" + std::to_string(tau);
  return PropertyReport::from(name, trials, acc.violation, acc.tightness, kDefaultTolerance);
}

PropertyReport check_lojasiewicz(const mdp::MdpSpec& spec, double tau, int trials, Rng& rng) {
  Accumulator acc;
  const auto opt = mdp::optimal_values(spec, tau);
  const auto opt_cache = mdp::evaluate_policy(spec, opt.pi, tau);
  const double sqrt_s = std::sqrt(static_cast<double>(spec.S));
  double min_sqrt_rho = 1.0;
  for (double r : spec.rho) min_sqrt_rho = std::min(min_sqrt_rho, std::sqrt(r));
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(spec.S, spec.A, rng);
    const auto cache = mdp::evaluate(spec, theta, tau);
    const auto pi = policy::softmax(theta);
    double ratio = 0.0;  // |d^{pi_opt} / d^{pi_theta}|_inf
    for (int s = 0; s < spec.S; ++s) ratio = std::max(ratio, opt_cache.d[s] / cache.d[s]);
    const double lhs = norm2(cache.grad);
    double rhs;
    if (tau == 0.0) {
      double min_pi_star = 1.0;
      for (int s = 0; s < spec.S; ++s) {
        const int a_star =
            policy::argmax_action(std::span<const double>(opt.pi.row(s), spec.A));
        min_pi_star = std::min(min_pi_star, pi(s, a_star));
      }
      rhs = min_pi_star / (sqrt_s * ratio) * (opt_cache.f - cache.f);
    } else {
      double min_pi = 1.0;
      for (int s = 0; s < spec.S; ++s)
        for (int a = 0; a < spec.A; ++a) min_pi = std::min(min_pi, pi(s, a));
      const double gap = std::max(0.0, opt_cache.f - cache.f);
      rhs = std::sqrt(2.0 * tau) / sqrt_s * min_sqrt_rho * min_pi / std::sqrt(ratio) *
            std::sqrt(gap);
    }
    acc.upper(rhs, lhs);
  }
  const std::string name =
      tau == 0.0 ? "mdp_lojasiewicz" : "mdp_entropy_lojasiewicz_tau" + std::to_string(tau);
  return PropertyReport::from(name, trials, acc.violation, acc.tightness, kDefaultTolerance);
}

PropertyReport check_reversed_lojasiewicz(const bandit::BanditSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  const double nu = std::sqrt(2.0) / spec.max_gap();
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(1, spec.arms(), rng);
    const auto g = bandit::gradient(spec, theta);
    Matrix gm(1, spec.arms());
    std::copy(g.begin(), g.end(), gm.data().begin());
    acc.upper(norm2(gm), nu * (spec.optimal_value() - bandit::value(spec, theta)));
  }
  return PropertyReport::from("bandit_reversed_lojasiewicz", trials, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

PropertyReport check_reversed_lojasiewicz(const mdp::MdpSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  const auto opt = mdp::optimal_values(spec, 0.0);
  // Delta* from the optimal Q: the per-state gap between the greedy action
  // and the runner-up.
  double delta_star = std::numeric_limits<double>::infinity();
  for (int s = 0; s < spec.S; ++s) {
    const int a_star = policy::argmax_action(std::span<const double>(opt.Q.row(s), spec.A));
    double second = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < spec.A; ++a)
      if (a != a_star) second = std::max(second, opt.Q(s, a));
    delta_star = std::min(delta_star, opt.Q(s, a_star) - second);
  }
  const double nu = std::sqrt(2.0) / ((1.0 - spec.gamma) * delta_star);
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(spec.S, spec.A, rng);
    const auto cache = mdp::evaluate(spec, theta, 0.0);
    acc.upper(norm2(cache.grad), nu * (opt.value - cache.f));
  }
  return PropertyReport::from("mdp_reversed_lojasiewicz", trials, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

namespace {

double enumerated_second_moment(const bandit::BanditSpec& spec, const Matrix& theta) {
  const auto pi = policy::softmax(theta);
  double acc = 0.0;
  for (int arm = 0; arm < spec.arms(); ++arm) {
    const auto s = bandit::forced_sample_gradient(spec, theta, arm, spec.means[arm]);
    double n2 = 0.0;
    for (double g : s.g_hat) n2 += g * g;
    acc += pi(0, arm) * n2;
  }
  return acc;
}

}  // namespace

PropertyReport check_sgc(const bandit::BanditSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  const double rho = bandit::sgc_constant(spec.reward_gap(), spec.arms());
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(1, spec.arms(), rng);
    const auto g = bandit::gradient(spec, theta);
    Matrix gm(1, spec.arms());
    std::copy(g.begin(), g.end(), gm.data().begin());
    acc.upper(enumerated_second_moment(spec, theta), rho * norm2(gm));
  }
  return PropertyReport::from("bandit_sgc", trials, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

PropertyReport check_sgc(const mdp::MdpSpec& spec, int trials, Rng& rng) {
  double joint = 1.0;
  for (int s = 0; s < spec.S; ++s) {
    joint *= spec.A;
    if (joint > 1e6)
      throw std::invalid_argument(
          "check_sgc: A^S joint enumeration exceeds 1e6; use a sampling check instead");
  }
  Accumulator acc;
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(spec.S, spec.A, rng);
    const auto cache = mdp::evaluate(spec, theta, 0.0);
    const auto pi = policy::softmax(theta);
    const double q_gap = mdp::min_q_gap(cache.Q);
    if (q_gap <= 0.0) continue;  // SGC constant undefined at exact Q ties
    const double rho = mdp::sgc_constant(spec.gamma, q_gap, spec.S, spec.A);
    const double scale = 1.0 / (1.0 - spec.gamma);
    // Walk every joint action assignment with an odometer.
    std::vector<int> assign(spec.S, 0);
    double second_moment = 0.0;
    for (;;) {
      double prob = 1.0;
      double n2 = 0.0;
      for (int s = 0; s < spec.S; ++s) {
        const int at = assign[s];
        prob *= pi(s, at);
        const double q = cache.Q(s, at);
        for (int a = 0; a < spec.A; ++a) {
          const double g = scale * cache.d[s] * q * ((a == at ? 1.0 : 0.0) - pi(s, a));
          n2 += g * g;
        }
      }
      second_moment += prob * n2;
      int pos = 0;
      while (pos < spec.S && ++assign[pos] == spec.A) assign[pos++] = 0;
      if (pos == spec.S) break;
    }
    acc.upper(second_moment, rho * norm2(cache.grad));
  }
  return PropertyReport::from("mdp_sgc", trials, acc.violation, acc.tightness, kDefaultTolerance);
}

PropertyReport check_unbiased(const bandit::BanditSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(1, spec.arms(), rng);
    const auto pi = policy::softmax(theta);
    const auto exact = bandit::gradient(spec, theta);
    std::vector<double> mean(spec.arms(), 0.0);
    for (int arm = 0; arm < spec.arms(); ++arm) {
      const auto s = bandit::forced_sample_gradient(spec, theta, arm, spec.means[arm]);
      for (int a = 0; a < spec.arms(); ++a) mean[a] += pi(0, arm) * s.g_hat[a];
    }
    double err = 0.0;
    for (int a = 0; a < spec.arms(); ++a) err = std::max(err, std::abs(mean[a] - exact[a]));
    acc.upper(err, 0.0);
  }
  return PropertyReport::from("bandit_is_unbiased", trials, acc.violation, 0.0, 1e-12);
}

PropertyReport check_unbiased(const mdp::MdpSpec& spec, int trials, Rng& rng) {
  double joint = 1.0;
  for (int s = 0; s < spec.S; ++s) {
    joint *= spec.A;
    if (joint > 1e6)
      throw std::invalid_argument("check_unbiased: A^S joint enumeration exceeds 1e6");
  }
  Accumulator acc;
  const double scale = 1.0 / (1.0 - spec.gamma);
  for (int i = 0; i < trials; ++i) {
    const Matrix theta = random_theta(spec.S, spec.A, rng);
    const auto cache = mdp::evaluate(spec, theta, 0.0);
    const auto pi = policy::softmax(theta);
    Matrix mean(spec.S, spec.A);
    std::vector<int> assign(spec.S, 0);
    for (;;) {
      double prob = 1.0;
      for (int s = 0; s < spec.S; ++s) prob *= pi(s, assign[s]);
      for (int s = 0; s < spec.S; ++s) {
        const int at = assign[s];
        const double q = cache.Q(s, at);
        for (int a = 0; a < spec.A; ++a)
          mean(s, a) += prob * scale * cache.d[s] * q * ((a == at ? 1.0 : 0.0) - pi(s, a));
      }
      int pos = 0;
      while (pos < spec.S && ++assign[pos] == spec.A) assign[pos++] = 0;
      if (pos == spec.S) break;
    }
    double err = 0.0;
    for (int k = 0; k < mean.size(); ++k)
      err = std::max(err, std::abs(mean.data()[k] - cache.grad.data()[k]));
    acc.upper(err, 0.0);
  }
  return PropertyReport::from("mdp_is_unbiased", trials, acc.violation, 0.0, 1e-12);
}

PropertyReport check_gradient_bounds(const bandit::BanditSpec& spec, int64_t samples, Rng& rng) {
  Accumulator acc;
  const double bound = bandit::grad_norm_bound();
  Matrix theta = random_theta(1, spec.arms(), rng);
  for (int64_t i = 0; i < samples; ++i) {
    if (i % 1000 == 0) theta = random_theta(1, spec.arms(), rng);
    const auto s = bandit::sample_gradient(spec, theta, rng);
    double n2 = 0.0;
    for (double g : s.g_hat) n2 += g * g;
    acc.upper(std::sqrt(n2), bound);
  }
  return PropertyReport::from("bandit_grad_norm_bound", samples, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

PropertyReport check_gradient_bounds(const mdp::MdpSpec& spec, int64_t samples, Rng& rng) {
  Accumulator acc;
  const double bound = mdp::grad_norm_bound(spec.gamma, spec.S);
  Matrix theta = random_theta(spec.S, spec.A, rng);
  auto cache = mdp::evaluate(spec, theta, 0.0);
  for (int64_t i = 0; i < samples; ++i) {
    if (i % 1000 == 0) {
      theta = random_theta(spec.S, spec.A, rng);
      cache = mdp::evaluate(spec, theta, 0.0);
    }
    const auto s = mdp::sample_gradient(spec, theta, cache, 0.0, rng);
    acc.upper(norm2(s.g_hat), bound);
  }
  return PropertyReport::from("mdp_grad_norm_bound", samples, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

PropertyReport check_second_moment(const bandit::BanditSpec& spec, int64_t samples, Rng& rng) {
  Accumulator acc;
  const Matrix theta = random_theta(1, spec.arms(), rng);
  double acc2 = 0.0;
  for (int64_t i = 0; i < samples; ++i) {
    const auto s = bandit::sample_gradient(spec, theta, rng);
    double n2 = 0.0;
    for (double g : s.g_hat) n2 += g * g;
    acc2 += n2;
  }
  acc.upper(acc2 / static_cast<double>(samples), 2.0);
  return PropertyReport::from("bandit_second_moment", samples, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

TwoArmSgc two_arm_sgc_equality(double r1, double r2, double p) {
  if (!(r1 > r2 && r2 >= 0.0)) throw std::invalid_argument("two_arm_sgc: need r1 > r2 >= 0");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("two_arm_sgc: need p in (0,1)");
  const double delta = r1 - r2;
  if (delta == 0.0) throw std::invalid_argument("two_arm_sgc: zero gap");
  bandit::BanditSpec spec;
  spec.means = {r1, r2};
  Matrix theta(1, 2);
  theta(0, 0) = std::log(p);
  theta(0, 1) = std::log(1.0 - p);
  TwoArmSgc out;
  out.lhs = enumerated_second_moment(spec, theta);
  const auto g = bandit::gradient(spec, theta);
  out.rhs = std::sqrt(g[0] * g[0] + g[1] * g[1]);
  out.rho = std::sqrt(2.0) * ((1.0 - p) * r1 * r1 + p * r2 * r2) / delta;
  if (std::abs(out.lhs - out.rho * out.rhs) > 1e-12 * std::max(1.0, out.lhs))
    throw std::logic_error("two_arm_sgc: enumerated identity violated");
  return out;
}

namespace {

struct TauPair {
  double tau1, tau2;
};

TauPair random_tau_pair(Rng& rng) {
  const double tau1 = rng.uniform(0.05, 1.0);
  const double tau2 = rng.uniform(0.2, 0.9) * tau1;
  return {tau1, tau2};
}

}  // namespace

PropertyReport check_entropy_assumptions(const bandit::BanditSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  const int A = spec.arms();
  const double B2 = lambert_w((A - 1) / std::exp(1.0));
  const double B3 = std::log(static_cast<double>(A));
  const double B4 = B2 + B3;
  for (int i = 0; i < trials; ++i) {
    const auto [tau1, tau2] = random_tau_pair(rng);
    const Matrix theta = random_theta(1, A, rng);
    const auto opt1 = bandit::soft_optimum(spec, tau1);
    const auto opt2 = bandit::soft_optimum(spec, tau2);
    double f_of_soft1 = 0.0;
    for (int a = 0; a < A; ++a) f_of_soft1 += opt1.pi[a] * spec.means[a];
    const double f_theta = bandit::value(spec, theta);
    const double ft1 = bandit::entropy_value(spec, theta, tau1);
    const double ft2 = bandit::entropy_value(spec, theta, tau2);
    // Bias: f* - f(theta*_tau) <= tau B2.
    acc.upper(spec.optimal_value() - f_of_soft1, tau1 * B2);
    // Transfer: f(theta*_tau) - f(theta) <= f*tau - f^tau(theta) + tau B3.
    acc.upper(f_of_soft1 - f_theta, opt1.value - ft1 + tau1 * B3);
    // Shift: the tau2 gap grows by at most tau1 B4 over the tau1 gap.
    acc.upper(opt2.value - ft2, opt1.value - ft1 + tau1 * B4);
  }
  return PropertyReport::from("bandit_entropy_assumptions", trials, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

PropertyReport check_entropy_assumptions(const mdp::MdpSpec& spec, int trials, Rng& rng) {
  Accumulator acc;
  const double B = std::log(static_cast<double>(spec.A)) / (1.0 - spec.gamma);
  const auto opt0 = mdp::optimal_values(spec, 0.0);
  for (int i = 0; i < trials; ++i) {
    const auto [tau1, tau2] = random_tau_pair(rng);
    const Matrix theta = random_theta(spec.S, spec.A, rng);
    const auto opt1 = mdp::optimal_values(spec, tau1);
    const auto opt2 = mdp::optimal_values(spec, tau2);
    const double f_of_soft1 = mdp::evaluate_policy(spec, opt1.pi, 0.0).f;
    const double f_theta = mdp::value_of(spec, theta, 0.0);
    const double ft1 = mdp::value_of(spec, theta, tau1);
    const double ft2 = mdp::value_of(spec, theta, tau2);
    acc.upper(opt0.value - f_of_soft1, tau1 * B);
    acc.upper(f_of_soft1 - f_theta, opt1.value - ft1 + tau1 * B);
    acc.upper(opt2.value - ft2, opt1.value - ft1 + tau1 * 2.0 * B);
  }
  return PropertyReport::from("mdp_entropy_assumptions", trials, acc.violation, acc.tightness,
                              kDefaultTolerance);
}

BoundParams theorem_bound_constants(BoundSetting setting, const BoundInputs& in) {
  if (!(in.L > 0.0 && in.mu > 0.0 && in.beta >= 1.0 && in.T >= 1.0 && in.eta0 > 0.0))
    throw std::invalid_argument("theorem_bound_constants: parameters must be positive");
  BoundParams out;
  out.alpha = std::exp(std::log(in.beta / in.T) / in.T);
  const double log_t_beta = std::log(in.T / in.beta);
  const double e2 = std::exp(2.0);
  if (setting == BoundSetting::VarianceRate) {
    out.kappa = 2.0 * in.L / in.mu;
    out.C1 = std::exp(2.0 * in.beta / (out.kappa * log_t_beta));
    out.C2 = 4.0 * out.kappa * out.kappa / (e2 * out.alpha * out.alpha);
    out.T0 = 0.0;
  } else {
    out.kappa = 2.0 / (in.mu * in.eta0);
    out.C1 = std::exp(2.0 * in.beta / (out.kappa * log_t_beta));
    out.C2 = out.C1 * 16.0 * in.varrho * in.L * out.kappa * out.kappa /
             (e2 * out.alpha * out.alpha) * log_t_beta * log_t_beta;
    out.T0 = in.T * std::max(std::log(in.varrho * in.eta0) / log_t_beta, 0.0);
  }
  return out;
}

}  // namespace softpg::verify
