#include "softpg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace softpg::policy {

Policy softmax(const Theta& theta) {
  if (!theta.all_finite()) throw std::invalid_argument("softmax: non-finite logits");
  Policy pi(theta.rows(), theta.cols());
  for (int s = 0; s < theta.rows(); ++s) {
    const double* in = theta.row(s);
    double* out = pi.row(s);
    double mx = in[0];
    for (int a = 1; a < theta.cols(); ++a) mx = std::max(mx, in[a]);
    double z = 0.0;
    for (int a = 0; a < theta.cols(); ++a) {
      out[a] = std::exp(in[a] - mx);
      z += out[a];
    }
    for (int a = 0; a < theta.cols(); ++a) out[a] /= z;
  }
  return pi;
}

Matrix log_softmax(const Theta& theta) {
  if (!theta.all_finite()) throw std::invalid_argument("log_softmax: non-finite logits");
  Matrix lp(theta.rows(), theta.cols());
  for (int s = 0; s < theta.rows(); ++s) {
    const double* in = theta.row(s);
    double* out = lp.row(s);
    double mx = in[0];
    for (int a = 1; a < theta.cols(); ++a) mx = std::max(mx, in[a]);
    double z = 0.0;
    for (int a = 0; a < theta.cols(); ++a) z += std::exp(in[a] - mx);
    const double log_z = std::log(z);
    for (int a = 0; a < theta.cols(); ++a) out[a] = in[a] - mx - log_z;
  }
  return lp;
}

std::vector<double> row_entropy(const Policy& pi) {
  std::vector<double> h(pi.rows(), 0.0);
  for (int s = 0; s < pi.rows(); ++s) {
    double acc = 0.0;
    for (int a = 0; a < pi.cols(); ++a) {
      const double p = pi(s, a);
      if (p > 1e-300) acc -= p * std::log(p);
    }
    h[s] = acc;
  }
  return h;
}

std::vector<double> jacobian_apply(std::span<const double> pi_row, std::span<const double> v) {
  if (pi_row.size() != v.size())
    throw std::invalid_argument("jacobian_apply: length mismatch");
  double pv = 0.0;
  for (size_t a = 0; a < pi_row.size(); ++a) pv += pi_row[a] * v[a];
  std::vector<double> out(pi_row.size());
  for (size_t a = 0; a < pi_row.size(); ++a) out[a] = pi_row[a] * (v[a] - pv);
  return out;
}

int argmax_action(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("argmax_action: empty row");
  int best = 0;
  for (size_t a = 1; a < row.size(); ++a)
    if (row[a] > row[best]) best = static_cast<int>(a);
  return best;
}

}  // namespace softpg::policy
