#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "softpg/bandit.hpp"
#include "softpg/matrix.hpp"
#include "softpg/mdp.hpp"
#include "softpg/rng.hpp"

namespace softpg::verify {

// Outcome of one numerical property check. A positive max_violation means
// some trial exceeded its bound by that amount; pass iff it stays within the
// tolerance slack.
struct PropertyReport {
  std::string name;
  int64_t trials = 0;
  double max_violation = 0.0;  // signed; <= tolerance means pass
  double tightness = 0.0;      // max achieved/bound ratio over trials
  bool pass = false;
  double tolerance = 0.0;

  static PropertyReport from(std::string name, int64_t trials, double max_violation,
                             double tightness, double tolerance);
};

// Default absolute slack absorbing the 1e-10 linear-solve residuals.
inline constexpr double kDefaultTolerance = 1e-9;

// Principal branch of the Lambert W function on [0, inf), via Halley
// iteration from a log-based initial guess. |W e^W - x| <= 1e-12 max(1,x).
double lambert_w(double x);

// tau * W((A-1)/e): the value gap between the optimal policy and the
// softmax-optimal policy at temperature tau is bounded by this.
double entropy_bias_bound(int arms, double tau);

// Measured bias (pi* - pi*_tau)^T r of a bandit instance.
double measured_entropy_bias(const bandit::BanditSpec& spec, double tau);

// The reward vector that makes the bias bound tight: r(a*) = tau (W+1), all
// other entries 0.
bandit::BanditSpec worst_case_bias_instance(int arms, double tau);

// Central finite differences of f per coordinate; step must be in
// [1e-8, 1e-3].
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& theta,
                        double step);

// Taylor-remainder test |f(y) - f(x) - <grad f(x), y - x>| <= L/2 |y - x|^2
// over random theta in [-5,5]^{SA} and perturbations of norm <= 1.
PropertyReport check_smoothness(const bandit::BanditSpec& spec, double tau, double L_claimed,
                                int trials, Rng& rng);
PropertyReport check_smoothness(const mdp::MdpSpec& spec, double tau, double L_claimed,
                                int trials, Rng& rng);

// Non-uniform Lojasiewicz lower bounds on the gradient norm.
//   bandit, xi = 0:    |grad f| >= pi(a*) (f* - f)
//   bandit, xi = 1/2:  |grad f^tau| >= sqrt(2 tau) min_a pi(a) sqrt(f*tau - f^tau)
//   MDP, xi = 0:       |grad f| >= min_s pi(a*(s)|s) / (sqrt(S) |d*/d|_inf) (f* - f)
//   MDP, xi = 1/2:     sqrt(2 tau / S) min_s sqrt(rho(s)) min pi |d*/d|_inf^{-1/2} sqrt(gap)
PropertyReport check_lojasiewicz(const bandit::BanditSpec& spec, double tau, int trials,
                                 Rng& rng);
PropertyReport check_lojasiewicz(const mdp::MdpSpec& spec, double tau, int trials, Rng& rng);

// Reversed Lojasiewicz upper bounds |grad f| <= nu (f* - f) with
// nu = sqrt(2)/Delta* (bandit) and sqrt(2)/((1-gamma) Delta*) (MDP).
PropertyReport check_reversed_lojasiewicz(const bandit::BanditSpec& spec, int trials, Rng& rng);
PropertyReport check_reversed_lojasiewicz(const mdp::MdpSpec& spec, int trials, Rng& rng);

// Strong growth condition E|g_hat|^2 <= rho |grad f| with the expectation
// computed by exact outcome enumeration (deterministic rewards). The MDP
// variant enumerates all A^S joint action choices and refuses when that
// exceeds 1e6.
PropertyReport check_sgc(const bandit::BanditSpec& spec, int trials, Rng& rng);
PropertyReport check_sgc(const mdp::MdpSpec& spec, int trials, Rng& rng);

// Exact unbiasedness of the IS estimators under outcome enumeration.
PropertyReport check_unbiased(const bandit::BanditSpec& spec, int trials, Rng& rng);
PropertyReport check_unbiased(const mdp::MdpSpec& spec, int trials, Rng& rng);

// Samplewise gradient-norm bounds |g_hat| <= sqrt(2) resp.
// sqrt(2 S)/(1-gamma)^2, and the second-moment bound E|g_hat|^2 <= 2 for
// bandits.
PropertyReport check_gradient_bounds(const bandit::BanditSpec& spec, int64_t samples, Rng& rng);
PropertyReport check_gradient_bounds(const mdp::MdpSpec& spec, int64_t samples, Rng& rng);
PropertyReport check_second_moment(const bandit::BanditSpec& spec, int64_t samples, Rng& rng);

// The two-arm SGC identity: with deterministic rewards r1 > r2 >= 0 and
// pi(a*) = p, enumeration gives lhs = rho * rhs exactly, with
// rho = sqrt(2) [(1-p) r1^2 + p r2^2] / Delta.
struct TwoArmSgc {
  double lhs = 0.0;  // E|g_hat|^2 by enumeration
  double rhs = 0.0;  // |grad f|
  double rho = 0.0;
};
TwoArmSgc two_arm_sgc_equality(double r1, double r2, double p);

// Entropy-annealing assumption suite (bias, suboptimality transfer, and the
// tau-shift growth) with the setting's constants. Random (theta, tau1, tau2)
// triples with tau2 < tau1.
PropertyReport check_entropy_assumptions(const bandit::BanditSpec& spec, int trials, Rng& rng);
PropertyReport check_entropy_assumptions(const mdp::MdpSpec& spec, int trials, Rng& rng);

// Constants of the stochastic convergence bounds, for acceptance-level
// comparisons of measured suboptimality against the stated rates.
enum class BoundSetting { VarianceRate, SgcRate };

struct BoundInputs {
  double L = 1.0;
  double mu = 1.0;
  double beta = 1.0;
  double T = 1.0;
  double eta0 = 1.0;
  double varrho = 1.0;  // SGC constant, SgcRate only
};

struct BoundParams {
  double kappa = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double T0 = 0.0;
  double alpha = 0.0;
};

BoundParams theorem_bound_constants(BoundSetting setting, const BoundInputs& in);

// Random logits in [-5,5]^{S x A}: covers near-uniform and near-deterministic
// policies without overflow.
Matrix random_theta(int S, int A, Rng& rng);

}  // namespace softpg::verify
