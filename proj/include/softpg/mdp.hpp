#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "softpg/matrix.hpp"
#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

namespace softpg::mdp {

// Tabular MDP (S, A, P, r, rho, gamma). P is stored flat as S*A rows of S
// entries, each row a simplex point.
struct MdpSpec {
  int S = 0;
  int A = 0;
  double gamma = 0.9;
  std::vector<double> transitions;  // P(s' | s, a) at index (s*A + a)*S + s'
  Matrix rewards;                   // r(s, a)
  std::vector<double> rho;          // initial distribution
  std::string name;

  double p(int s, int a, int s2) const {
    return transitions[(static_cast<size_t>(s) * A + a) * S + s2];
  }
  double& p(int s, int a, int s2) {
    return transitions[(static_cast<size_t>(s) * A + a) * S + s2];
  }
  void validate() const;
};

// Exact quantities for one policy on one MDP. For tau > 0 the entries hold
// the entropy-regularized versions (V~, Q~, A~, f^tau, grad of f^tau).
struct EvalCache {
  double tau = 0.0;
  std::vector<double> V;     // state values (soft values when tau > 0)
  Matrix Q;                  // Q(s,a) = r(s,a) + gamma E[V(s')]
  Matrix Adv;                // advantage; tau > 0: Q - tau log pi - V
  std::vector<double> d;     // discounted visitation d^pi_rho, sums to 1
  double f = 0.0;            // V^pi(rho) resp. V~^pi_tau(rho)
  Matrix grad;               // d(s) pi(a|s) Adv(s,a) / (1 - gamma)
};

// Parallel importance-sampling draw: one action per state, the IS Q estimate
// (zero except at the sampled action), and the gradient estimate whose
// per-state rows sum to zero.
struct MdpGradSample {
  std::vector<int> actions;
  Matrix q_hat;
  Matrix g_hat;
};

// Policy evaluation by direct dense linear solves of (I - gamma P_pi) V = r_pi
// and (I - gamma P_pi^T) x = (1 - gamma) rho. Residuals are at machine
// precision for the problem sizes this library targets.
EvalCache evaluate(const MdpSpec& spec, const policy::Theta& theta, double tau = 0.0);

// Same, for an explicitly given policy (possibly deterministic). log pi is
// taken as 0 where pi(a|s) = 0; those entries never contribute to values or
// gradients.
EvalCache evaluate_policy(const MdpSpec& spec, const policy::Policy& pi, double tau = 0.0);

// Value-only paths for line-search trial points (one linear solve).
double value_of(const MdpSpec& spec, const policy::Theta& theta, double tau = 0.0);

struct Optimum {
  policy::Policy pi;   // greedy deterministic policy (tau = 0) or softmax(Q~/tau)
  double value = 0.0;  // f* resp. f^{*tau}
  Matrix Q;            // optimal (soft) action values
};

// tau = 0: value iteration to 1e-12 then one exact evaluation of the greedy
// policy. tau > 0: soft value iteration with the log-sum-exp Bellman operator.
Optimum optimal_values(const MdpSpec& spec, double tau = 0.0);

// On-policy parallel IS stochastic gradient; `cache` must be evaluate()'s
// output at the same theta and tau.
MdpGradSample sample_gradient(const MdpSpec& spec, const policy::Theta& theta,
                              const EvalCache& cache, double tau, Rng& rng);

// The three named benchmark environments. Geometry is documented in the
// generated instance files.
MdpSpec make_cliff_world();
MdpSpec make_deep_sea();
MdpSpec make_flat_grad();
MdpSpec make_named(const std::string& name);

// Plain-text instance files (S, A, gamma, rho, dense P and r).
std::string to_instance_file(const MdpSpec& spec);
MdpSpec from_instance_file(const std::string& text);
void save_instance(const MdpSpec& spec, const std::string& path);
MdpSpec load_instance(const std::string& path);

// Uniform-random small MDP for tests and verifiers: Dirichlet-ish transition
// rows, rewards uniform in [0,1], uniform rho.
MdpSpec random_instance(int S, int A, double gamma, uint64_t seed);

// Setting constants.
inline double smoothness(double gamma) {
  const double u = 1.0 - gamma;
  return 8.0 / (u * u * u);
}
inline double entropy_smoothness(double gamma, double tau, int actions) {
  const double u = 1.0 - gamma;
  return (8.0 + tau * (4.0 + 8.0 * std::log(static_cast<double>(actions)))) / (u * u * u);
}
// c_inf is the concentrability plug-in; callers default it to 1/S.
inline double nonuniform_smoothness(double gamma, int S, double c_inf) {
  const double u = 1.0 - gamma;
  return (3.0 + (2.0 * c_inf - u) / (u * gamma)) * std::sqrt(static_cast<double>(S));
}
inline double grad_norm_bound(double gamma, int S) {
  const double u = 1.0 - gamma;
  return std::sqrt(2.0 * S) / (u * u);
}
inline double sample_variance_bound(double gamma, double tau, int S, int A) {
  const double u = 1.0 - gamma;
  if (tau == 0.0) return 2.0 * S / (u * u * u * u);
  const double t = tau * std::log(static_cast<double>(A));
  const double v = 1.0 - std::sqrt(gamma);
  return 8.0 * (1.0 + t * t) / (u * u * v * v);
}
inline double sgc_constant(double gamma, double q_gap, int S, int A) {
  const double u = 1.0 - gamma;
  return 4.0 * std::pow(static_cast<double>(A), 1.5) * std::sqrt(static_cast<double>(S)) /
         (u * u * u * u * q_gap * q_gap);
}

// min_s min_{a != a'} |Q(s,a) - Q(s,a')| for the SGC constant.
double min_q_gap(const Matrix& Q);

}  // namespace softpg::mdp
