#pragma once

#include <span>
#include <vector>

#include "softpg/matrix.hpp"

namespace softpg::policy {

// Policy logits, one real per (state, action). Bandits use S = 1.
using Theta = Matrix;

// Row-stochastic action probabilities. Every entry of a softmax of finite
// logits is strictly positive, although it may underflow to 0.0 in doubles.
using Policy = Matrix;

// Row-stochastic softmax with per-row max subtraction; stable for logits of
// magnitude up to 1e4 and beyond. Throws std::invalid_argument on non-finite
// input.
Policy softmax(const Theta& theta);

// log pi(a|s) computed directly from the logits (log-softmax). Finite for any
// finite logits even where the probability itself underflows.
Matrix log_softmax(const Theta& theta);

// Per-row Shannon entropy -sum_a pi log pi, each value in [0, log A].
// Entries below 1e-300 contribute zero (the 0 log 0 = 0 convention).
std::vector<double> row_entropy(const Policy& pi);

// Applies the softmax Jacobian H(pi) = diag(pi) - pi pi^T of one row to v:
// returns diag(pi) v - pi (pi^T v). Output entries sum to zero.
std::vector<double> jacobian_apply(std::span<const double> pi_row, std::span<const double> v);

// Index of the row maximum; ties broken by lowest index.
int argmax_action(std::span<const double> row);

}  // namespace softpg::policy
