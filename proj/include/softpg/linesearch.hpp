#pragma once

#include <functional>

#include "softpg/matrix.hpp"

namespace softpg::linesearch {

// Objective evaluator over logits; pure and re-entrant.
using Objective = std::function<double(const Matrix&)>;

struct Config {
  double h = 0.5;           // sufficient-increase parameter, in (0,1)
  double eta_max = 1.0;     // initial / maximum step
  double backtrack = 0.5;   // grid shrink factor, in (0,1)
  int max_backtracks = 60;  // 60 halvings span 18 orders of magnitude
  void validate() const;
};

enum class Outcome {
  Accepted,        // eta satisfies the condition; the next-larger grid point fails
  AtOptimum,       // log variant only: f* - f(theta) at or below the floor
  BacktracksExhausted,
};

struct Result {
  Outcome outcome = Outcome::Accepted;
  double eta = 0.0;        // accepted step (last trial when exhausted)
  double f_theta = 0.0;    // objective at theta
  double f_new = 0.0;      // objective at the accepted point
  int backtracks = 0;      // grid index of the accepted step
  int evaluations = 0;     // objective evaluations spent
};

// Backtracking search for the largest eta in {eta_max b^k} with
//   f(theta + eta grad) >= f(theta) + h eta |grad|^2.
// For an L-smooth objective the accepted step is >= min{2(1-h)/L, eta_max}.
Result armijo_search(const Objective& f, const Matrix& theta, const Matrix& grad,
                     const Config& cfg);

// The log-suboptimality variant: largest eta in the grid with
//   ln(f* - f(theta + eta grad)) <= ln(f* - f(theta)) - h eta |grad|^2 / (f* - f(theta)).
// A trial point at or above f* always satisfies the condition. Returns
// AtOptimum when f* - f(theta) <= 1e-14.
Result log_armijo_search(const Objective& f, double f_star, const Matrix& theta,
                         const Matrix& grad, const Config& cfg);

}  // namespace softpg::linesearch
