#pragma once

#include <string>
#include <vector>

#include "softpg/matrix.hpp"
#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

namespace softpg::bandit {

enum class RewardFamily { Bernoulli, TruncatedGaussian, Beta };

RewardFamily family_from_string(const std::string& name);
std::string family_to_string(RewardFamily f);

// A multi-armed bandit instance: mean reward vector in [0,1]^A plus the
// reward distribution shape. Sampled rewards always lie in [0,1].
struct BanditSpec {
  std::vector<double> means;
  RewardFamily family = RewardFamily::Bernoulli;
  double gaussian_std = 0.2;
  double beta_concentration = 5.0;
  uint64_t seed = 0;  // generation seed, for the instance file

  int arms() const { return static_cast<int>(means.size()); }
  int optimal_arm() const;                 // argmax of means, lowest index on ties
  double optimal_value() const;            // max_a r(a)
  double reward_gap() const;               // Delta  = min_{a != a'} |r(a) - r(a')|
  double max_gap() const;                  // Delta- = r(a*) - max_{a != a*} r(a)
  void validate() const;
};

// One stochastic-gradient draw: the pulled arm, the raw reward, the
// importance-sampling reward estimate r_hat (zero except at the pulled arm,
// where it is R / pi(a_t)), and the gradient estimate g_hat (sums to zero).
struct GradSample {
  int arm = 0;
  double reward = 0.0;
  std::vector<double> r_hat;
  std::vector<double> g_hat;
};

// f(theta) = <pi_theta, r>.
double value(const BanditSpec& spec, const policy::Theta& theta);

// Exact gradient, entries pi(a) [r(a) - <pi, r>]; sums to zero.
std::vector<double> gradient(const BanditSpec& spec, const policy::Theta& theta);

// f^tau(theta) = <pi, r> + tau H(pi). tau = 0 recovers value().
double entropy_value(const BanditSpec& spec, const policy::Theta& theta, double tau);

// Exact gradient of f^tau: pi(a) [(r - tau log pi)(a) - <pi, r - tau log pi>].
std::vector<double> entropy_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                     double tau);

// Pulls a_t ~ pi, draws R_t from the arm's distribution (clipped to [0,1]),
// and forms the IS estimates of Update "Stochastic Softmax PG".
GradSample sample_gradient(const BanditSpec& spec, const policy::Theta& theta, Rng& rng);

// Entropy-regularized stochastic gradient g_hat = H(pi)(r_hat - tau log pi).
GradSample entropy_sample_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                   double tau, Rng& rng);

// Deterministic-arm variants used by the enumeration oracles: the pulled arm
// and raw reward are supplied by the caller instead of sampled.
GradSample forced_sample_gradient(const BanditSpec& spec, const policy::Theta& theta, int arm,
                                  double reward);
GradSample forced_entropy_sample_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                          double tau, int arm, double reward);

// Entropy-regularized optimum: pi*_tau = softmax(r / tau) and
// f^{*tau} = tau logsumexp(r / tau). tau = 0 degenerates to (one-hot, max r).
struct SoftOptimum {
  std::vector<double> pi;
  double value = 0.0;
};
SoftOptimum soft_optimum(const BanditSpec& spec, double tau);

// Random instance with best-vs-second-best gap exactly `gap` and all means in
// [0,1]. Deterministic given the seed. Throws for gap outside (0,1) or A < 2.
BanditSpec generate_instance(int arms, double gap, RewardFamily family, uint64_t seed);

// Plain-text key-value instance files.
std::string to_instance_file(const BanditSpec& spec);
BanditSpec from_instance_file(const std::string& text);
void save_instance(const BanditSpec& spec, const std::string& path);
BanditSpec load_instance(const std::string& path);

// Table-1 / Table-4 constants for this setting.
inline double smoothness() { return 2.5; }
inline double entropy_smoothness(double tau, int arms) {
  return 2.5 + 5.0 * tau * (1.0 + std::log(static_cast<double>(arms)));
}
inline double nonuniform_smoothness() { return 3.0; }
inline double grad_norm_bound() { return std::sqrt(2.0); }
inline double sample_variance_bound(double tau, int arms) {
  const double t = tau * std::log(static_cast<double>(arms));
  return 8.0 * (1.0 + t * t);
}
inline double sgc_constant(double reward_gap, int arms) {
  return 8.0 * std::pow(static_cast<double>(arms), 1.5) / (reward_gap * reward_gap);
}

}  // namespace softpg::bandit
