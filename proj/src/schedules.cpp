#include "softpg/schedules.hpp"

#include <cmath>
#include <stdexcept>

namespace softpg::schedules {

ExpSchedule::ExpSchedule(double eta0_, double beta_, int64_t horizon_)
    : eta0(eta0_), beta(beta_), horizon(horizon_) {
  if (!(eta0 > 0.0)) throw std::invalid_argument("ExpSchedule: eta0 must be positive");
  if (!(beta >= 1.0)) throw std::invalid_argument("ExpSchedule: beta must be >= 1");
  if (horizon < 1) throw std::invalid_argument("ExpSchedule: horizon must be >= 1");
  if (beta > static_cast<double>(horizon))
    throw std::invalid_argument("ExpSchedule: beta > T would give increasing steps");
  // log-space keeps alpha accurate for horizons up to 1e9 and beyond.
  alpha = std::exp(std::log(beta / static_cast<double>(horizon)) / static_cast<double>(horizon));
}

double ExpSchedule::step(int64_t t) const {
  if (t < 0) throw std::invalid_argument("ExpSchedule: t must be >= 0");
  return eta0 * std::pow(alpha, static_cast<double>(t));
}

DoublingSchedule::DoublingSchedule(double eta0_, double beta_, int64_t initial_horizon_)
    : eta0(eta0_), beta(beta_), initial_horizon(initial_horizon_) {
  if (initial_horizon < 1) throw std::invalid_argument("DoublingSchedule: T0 must be >= 1");
  // Constructing the first epoch validates eta0/beta once.
  ExpSchedule(eta0, beta, initial_horizon);
}

int64_t DoublingSchedule::epoch_start(int k) const {
  // T0 + 2 T0 + ... + 2^{k-1} T0 = T0 (2^k - 1).
  return initial_horizon * ((int64_t{1} << k) - 1);
}

double DoublingSchedule::step(int64_t t) const {
  if (t < 0) throw std::invalid_argument("DoublingSchedule: t must be >= 0");
  int k = 0;
  int64_t horizon = initial_horizon;
  int64_t start = 0;
  while (t >= start + horizon) {
    start += horizon;
    horizon *= 2;
    ++k;
  }
  const ExpSchedule epoch(eta0, beta, horizon);
  return epoch.step(t - start + 1);
}

int64_t stage_length_exact(double tau_prev, double tau_i, double eta_i, double mu_i,
                           double B4) {
  if (!(tau_prev > 0.0 && tau_i > 0.0 && eta_i > 0.0 && mu_i > 0.0) || B4 < 0.0)
    throw std::invalid_argument("stage_length_exact: arguments must be positive");
  const double t = (2.0 / (eta_i * mu_i)) * std::log((tau_prev / tau_i) * (1.0 + B4));
  return static_cast<int64_t>(std::ceil(t));
}

StochasticStageLength stage_length_stochastic(const StochasticStageParams& p) {
  if (!(p.tau_prev > 0.0 && p.tau_i > 0.0 && p.mu_i > 0.0 && p.B1 > 0.0 && p.beta >= 1.0 &&
        p.L_min > 0.0 && p.L_max >= p.L_min) ||
      p.sigma2 < 0.0 || p.B4 < 0.0)
    throw std::invalid_argument("stage_length_stochastic: invalid arguments");
  StochasticStageLength out;
  out.A1 = std::exp(p.B1 * p.beta / p.L_min);
  out.A2 = 0.69 / p.L_max;
  out.A3 = 5.0 * p.L_max * out.A1 / (std::exp(1.0) * std::exp(1.0));
  out.T_prime =
      (2.0 / (out.A2 * p.mu_i)) * std::log(2.0 * out.A1 * (p.tau_prev / p.tau_i) * (1.0 + p.B4));
  out.T_double_prime = 2.0 * out.A3 * p.sigma2 / (p.tau_i * p.mu_i * p.mu_i);
  double t = 5583.0;
  if (out.T_prime > 0.0)
    t = std::max(t, 2.0 * out.T_prime * std::log(out.T_prime));
  if (out.T_double_prime > 0.0) {
    const double lg = std::log(out.T_double_prime);
    t = std::max(t, 4.0 * out.T_double_prime * lg * lg);
  }
  out.T = static_cast<int64_t>(std::ceil(t));
  return out;
}

}  // namespace softpg::schedules
