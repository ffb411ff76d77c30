#include "softpg/linesearch.hpp"

#include <cmath>
#include <stdexcept>

namespace softpg::linesearch {

void Config::validate() const {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("linesearch: h must be in (0,1)");
  if (!(backtrack > 0.0 && backtrack < 1.0))
    throw std::invalid_argument("linesearch: backtrack factor must be in (0,1)");
  if (!(eta_max > 0.0)) throw std::invalid_argument("linesearch: eta_max must be positive");
  if (max_backtracks < 0) throw std::invalid_argument("linesearch: max_backtracks must be >= 0");
}

Result armijo_search(const Objective& f, const Matrix& theta, const Matrix& grad,
                     const Config& cfg) {
  cfg.validate();
  const double g2 = dot(grad, grad);
  if (!std::isfinite(g2)) throw std::invalid_argument("armijo_search: non-finite gradient");
  Result res;
  res.f_theta = f(theta);
  res.evaluations = 1;
  double eta = cfg.eta_max;
  for (int k = 0; k <= cfg.max_backtracks; ++k, eta *= cfg.backtrack) {
    const double f_new = f(axpy(theta, eta, grad));
    ++res.evaluations;
    if (f_new >= res.f_theta + cfg.h * eta * g2) {
      res.outcome = Outcome::Accepted;
      res.eta = eta;
      res.f_new = f_new;
      res.backtracks = k;
      return res;
    }
  }
  res.outcome = Outcome::BacktracksExhausted;
  res.eta = eta / cfg.backtrack;  // last trial
  res.backtracks = cfg.max_backtracks;
  return res;
}

Result log_armijo_search(const Objective& f, double f_star, const Matrix& theta,
                         const Matrix& grad, const Config& cfg) {
  cfg.validate();
  const double g2 = dot(grad, grad);
  if (!std::isfinite(g2)) throw std::invalid_argument("log_armijo_search: non-finite gradient");
  Result res;
  res.f_theta = f(theta);
  res.evaluations = 1;
  const double gap = f_star - res.f_theta;
  if (gap <= 1e-14) {
    res.outcome = Outcome::AtOptimum;
    return res;
  }
  const double log_gap = std::log(gap);
  double eta = cfg.eta_max;
  for (int k = 0; k <= cfg.max_backtracks; ++k, eta *= cfg.backtrack) {
    const double f_new = f(axpy(theta, eta, grad));
    ++res.evaluations;
    const double new_gap = f_star - f_new;
    // new_gap <= 0 means the trial reached (or numerically crossed) f*; the
    // left side is -inf, so the condition holds.
    const bool ok =
        new_gap <= 0.0 || std::log(new_gap) <= log_gap - cfg.h * eta * g2 / gap;
    if (ok) {
      res.outcome = Outcome::Accepted;
      res.eta = eta;
      res.f_new = f_new;
      res.backtracks = k;
      return res;
    }
  }
  res.outcome = Outcome::BacktracksExhausted;
  res.eta = eta / cfg.backtrack;
  res.backtracks = cfg.max_backtracks;
  return res;
}

}  // namespace softpg::linesearch
