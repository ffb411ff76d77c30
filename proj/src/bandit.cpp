#include "softpg/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace softpg::bandit {

RewardFamily family_from_string(const std::string& name) {
  if (name == "bernoulli") return RewardFamily::Bernoulli;
  if (name == "gaussian") return RewardFamily::TruncatedGaussian;
  if (name == "beta") return RewardFamily::Beta;
  throw std::invalid_argument("unknown reward family: " + name);
}

std::string family_to_string(RewardFamily f) {
  switch (f) {
    case RewardFamily::Bernoulli: return "bernoulli";
    case RewardFamily::TruncatedGaussian: return "gaussian";
    case RewardFamily::Beta: return "beta";
  }
  return "bernoulli";
}

int BanditSpec::optimal_arm() const {
  return policy::argmax_action(std::span<const double>(means));
}

double BanditSpec::optimal_value() const { return means[optimal_arm()]; }

double BanditSpec::reward_gap() const {
  double gap = 1.0;
  for (size_t a = 0; a + 1 < means.size(); ++a)
    for (size_t b = a + 1; b < means.size(); ++b)
      gap = std::min(gap, std::abs(means[a] - means[b]));
  return gap;
}

double BanditSpec::max_gap() const {
  const int star = optimal_arm();
  double second = -1.0;
  for (int a = 0; a < arms(); ++a)
    if (a != star) second = std::max(second, means[a]);
  return means[star] - second;
}

void BanditSpec::validate() const {
  if (arms() < 2) throw std::invalid_argument("bandit: need at least 2 arms");
  for (double r : means)
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("bandit: means must lie in [0,1]");
  if (gaussian_std <= 0.0 || beta_concentration <= 0.0)
    throw std::invalid_argument("bandit: distribution parameters must be positive");
}

double value(const BanditSpec& spec, const policy::Theta& theta) {
  const auto pi = policy::softmax(theta);
  double f = 0.0;
  for (int a = 0; a < spec.arms(); ++a) f += pi(0, a) * spec.means[a];
  return f;
}

std::vector<double> gradient(const BanditSpec& spec, const policy::Theta& theta) {
  const auto pi = policy::softmax(theta);
  return policy::jacobian_apply(std::span<const double>(pi.row(0), pi.cols()),
                                std::span<const double>(spec.means));
}

double entropy_value(const BanditSpec& spec, const policy::Theta& theta, double tau) {
  const auto pi = policy::softmax(theta);
  double f = 0.0;
  for (int a = 0; a < spec.arms(); ++a) f += pi(0, a) * spec.means[a];
  return f + tau * policy::row_entropy(pi)[0];
}

std::vector<double> entropy_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                     double tau) {
  const auto pi = policy::softmax(theta);
  const auto lp = policy::log_softmax(theta);
  std::vector<double> v(spec.arms());
  for (int a = 0; a < spec.arms(); ++a) v[a] = spec.means[a] - tau * lp(0, a);
  return policy::jacobian_apply(std::span<const double>(pi.row(0), pi.cols()),
                                std::span<const double>(v));
}

namespace {

double draw_reward(const BanditSpec& spec, int arm, Rng& rng) {
  const double mean = spec.means[arm];
  switch (spec.family) {
    case RewardFamily::Bernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case RewardFamily::TruncatedGaussian:
      return std::clamp(mean + spec.gaussian_std * rng.normal(), 0.0, 1.0);
    case RewardFamily::Beta: {
      // Degenerate means would give a zero shape parameter; treat them as
      // point masses, which matches the limiting distribution.
      if (mean <= 0.0 || mean >= 1.0) return mean;
      return rng.beta(mean * spec.beta_concentration, (1.0 - mean) * spec.beta_concentration);
    }
  }
  return mean;
}

// g_hat(a) = pi(a)[r_hat(a) - <pi, r_hat>] collapses to R (1{a = a_t} - pi(a)):
// the 1/pi(a_t) factors cancel, so we build that form directly and never
// multiply by a potentially huge r_hat entry.
GradSample build_sample(const BanditSpec& spec, const policy::Policy& pi, int arm,
                        double reward) {
  GradSample out;
  out.arm = arm;
  out.reward = reward;
  out.r_hat.assign(spec.arms(), 0.0);
  out.r_hat[arm] = reward / pi(0, arm);
  out.g_hat.resize(spec.arms());
  for (int a = 0; a < spec.arms(); ++a)
    out.g_hat[a] = reward * ((a == arm ? 1.0 : 0.0) - pi(0, a));
  return out;
}

}  // namespace

GradSample sample_gradient(const BanditSpec& spec, const policy::Theta& theta, Rng& rng) {
  const auto pi = policy::softmax(theta);
  const int arm = rng.categorical(std::span<const double>(pi.row(0), pi.cols()));
  return build_sample(spec, pi, arm, draw_reward(spec, arm, rng));
}

GradSample forced_sample_gradient(const BanditSpec& spec, const policy::Theta& theta, int arm,
                                  double reward) {
  const auto pi = policy::softmax(theta);
  return build_sample(spec, pi, arm, reward);
}

namespace {

GradSample build_entropy_sample(const BanditSpec& spec, const policy::Theta& theta, double tau,
                                int arm, double reward) {
  const auto pi = policy::softmax(theta);
  GradSample out = build_sample(spec, pi, arm, reward);
  if (tau != 0.0) {
    const auto lp = policy::log_softmax(theta);
    const auto reg = policy::jacobian_apply(std::span<const double>(pi.row(0), pi.cols()),
                                            std::span<const double>(lp.row(0), lp.cols()));
    for (int a = 0; a < spec.arms(); ++a) out.g_hat[a] -= tau * reg[a];
  }
  return out;
}

}  // namespace

GradSample entropy_sample_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                   double tau, Rng& rng) {
  const auto pi = policy::softmax(theta);
  const int arm = rng.categorical(std::span<const double>(pi.row(0), pi.cols()));
  return build_entropy_sample(spec, theta, tau, arm, draw_reward(spec, arm, rng));
}

GradSample forced_entropy_sample_gradient(const BanditSpec& spec, const policy::Theta& theta,
                                          double tau, int arm, double reward) {
  return build_entropy_sample(spec, theta, tau, arm, reward);
}

SoftOptimum soft_optimum(const BanditSpec& spec, double tau) {
  SoftOptimum out;
  out.pi.assign(spec.arms(), 0.0);
  if (tau <= 0.0) {
    out.pi[spec.optimal_arm()] = 1.0;
    out.value = spec.optimal_value();
    return out;
  }
  policy::Theta scaled(1, spec.arms());
  for (int a = 0; a < spec.arms(); ++a) scaled(0, a) = spec.means[a] / tau;
  const auto pi = policy::softmax(scaled);
  for (int a = 0; a < spec.arms(); ++a) out.pi[a] = pi(0, a);
  // tau logsumexp(r / tau), max-shifted.
  const double mx = spec.optimal_value();
  double z = 0.0;
  for (int a = 0; a < spec.arms(); ++a) z += std::exp((spec.means[a] - mx) / tau);
  out.value = mx + tau * std::log(z);
  return out;
}

BanditSpec generate_instance(int arms, double gap, RewardFamily family, uint64_t seed) {
  if (arms < 2) throw std::invalid_argument("generate_instance: need at least 2 arms");
  if (!(gap > 0.0 && gap < 1.0)) throw std::invalid_argument("generate_instance: gap must be in (0,1)");
  Rng rng(seed);
  BanditSpec spec;
  spec.family = family;
  spec.seed = seed;
  spec.means.resize(arms);
  for (;;) {
    for (int a = 0; a < arms; ++a) spec.means[a] = rng.uniform(0.0, 1.0 - gap);
    const int star = policy::argmax_action(std::span<const double>(spec.means));
    double second = -1.0;
    for (int a = 0; a < arms; ++a)
      if (a != star) second = std::max(second, spec.means[a]);
    spec.means[star] = second + gap;
    // Duplicate suboptimal means would give a zero pairwise reward gap.
    bool distinct = true;
    for (int a = 0; a < arms && distinct; ++a)
      for (int b = a + 1; b < arms && distinct; ++b)
        if (spec.means[a] == spec.means[b]) distinct = false;
    if (distinct) break;
  }
  return spec;
}

std::string to_instance_file(const BanditSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "kind = bandit\n";
  os << "arms = " << spec.arms() << "\n";
  os << "family = " << family_to_string(spec.family) << "\n";
  os << "gaussian_std = " << spec.gaussian_std << "\n";
  os << "beta_concentration = " << spec.beta_concentration << "\n";
  os << "seed = " << spec.seed << "\n";
  os << "means =";
  for (double r : spec.means) os << " " << r;
  os << "\n";
  return os.str();
}

BanditSpec from_instance_file(const std::string& text) {
  BanditSpec spec;
  std::istringstream is(text);
  std::string line;
  int arms = 0;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = (b == std::string::npos) ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(val);
    if (key == "kind" && val != "bandit") throw std::invalid_argument("not a bandit instance file");
    if (key == "arms") arms = std::stoi(val);
    if (key == "family") spec.family = family_from_string(val);
    if (key == "gaussian_std") spec.gaussian_std = std::stod(val);
    if (key == "beta_concentration") spec.beta_concentration = std::stod(val);
    if (key == "seed") spec.seed = std::stoull(val);
    if (key == "means") {
      std::istringstream vs(val);
      double x;
      while (vs >> x) spec.means.push_back(x);
    }
  }
  if (arms != spec.arms() || spec.arms() < 2)
    throw std::invalid_argument("bandit instance file: inconsistent arm count");
  spec.validate();
  return spec;
}

void save_instance(const BanditSpec& spec, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_instance_file(spec);
}

BanditSpec load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  return from_instance_file(buf.str());
}

}  // namespace softpg::bandit
