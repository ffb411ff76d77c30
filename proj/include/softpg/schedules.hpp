#pragma once

#include <cstdint>

namespace softpg::schedules {

// Exponentially decreasing step sizes eta_t = eta0 alpha^t with
// alpha = (beta/T)^(1/T). beta = T gives alpha = 1 (constant steps).
struct ExpSchedule {
  double eta0 = 1.0;
  double beta = 1.0;
  int64_t horizon = 1;
  double alpha = 1.0;

  ExpSchedule() = default;
  ExpSchedule(double eta0_, double beta_, int64_t horizon_);
  double step(int64_t t) const;  // eta0 alpha^t, t >= 0
};

// Doubling-trick restarts: epoch k runs an ExpSchedule with horizon 2^k T0,
// restarted at the epoch boundary. Within an epoch the first update uses
// eta0 alpha_k, the last uses eta0 beta / T_k.
struct DoublingSchedule {
  double eta0 = 1.0;
  double beta = 1.0;
  int64_t initial_horizon = 1;

  DoublingSchedule() = default;
  DoublingSchedule(double eta0_, double beta_, int64_t initial_horizon_);
  // t counts updates from 0; locates the epoch containing t and returns the
  // within-epoch exponential step.
  double step(int64_t t) const;
  // Start iteration of epoch k (0-based): T0 (2^k - 1).
  int64_t epoch_start(int k) const;
};

// Stage length of the exact multi-stage algorithm:
// ceil( 2/(eta_i mu_i) log((tau_prev/tau_i)(1 + B4)) ).
int64_t stage_length_exact(double tau_prev, double tau_i, double eta_i, double mu_i, double B4);

// Stage length of the stochastic multi-stage algorithm. The circular
// X1/X2/X3 quantities are replaced by their worst-case constants
// A1 = exp(B1 beta / L_min), A2 = 0.69 / L_max, A3 = 5 L_max A1 / e^2.
struct StochasticStageParams {
  double tau_prev = 1.0;
  double tau_i = 0.5;
  double mu_i = 0.0;
  double B1 = 1.0;
  double B4 = 1.0;
  double sigma2 = 0.0;
  double beta = 1.0;
  double L_min = 1.0;  // min over tau in [0,1] of L^tau
  double L_max = 1.0;  // max over tau in [0,1] of L^tau
};

struct StochasticStageLength {
  double A1 = 0.0, A2 = 0.0, A3 = 0.0;
  double T_prime = 0.0;        // 2/(A2 mu_i) log(2 A1 (tau_prev/tau_i)(1+B4))
  double T_double_prime = 0.0; // 2 A3 sigma^2 / (tau_i mu_i^2)
  int64_t T = 0;               // ceil of max(5583, 2 T' log T', 4 T'' log^2 T'')
};

StochasticStageLength stage_length_stochastic(const StochasticStageParams& p);

}  // namespace softpg::schedules
