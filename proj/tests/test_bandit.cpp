#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "oracles.hpp"
#include "softpg/bandit.hpp"
#include "softpg/verify.hpp"

using namespace softpg;

namespace {

policy::Theta row(std::vector<double> v) {
  policy::Theta t(1, static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) t(0, i) = v[i];
  return t;
}

bandit::BanditSpec make_spec(std::vector<double> means) {
  bandit::BanditSpec spec;
  spec.means = std::move(means);
  return spec;
}

Matrix to_matrix(const std::vector<double>& v) {
  Matrix m(1, static_cast<int>(v.size()));
  std::copy(v.begin(), v.end(), m.data().begin());
  return m;
}

}  // namespace

TEST_CASE("bandit value") {
  const auto spec = make_spec({1.0, 0.0});
  CHECK(bandit::value(spec, row({0.0, 0.0})) == doctest::Approx(0.5).epsilon(1e-15));
  // One-hot limit on the best arm.
  CHECK(std::abs(bandit::value(spec, row({30.0, 0.0})) - 1.0) <= 1e-9);

  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = bandit::generate_instance(5, 0.3, bandit::RewardFamily::Bernoulli,
                                                rng.next_u64());
    const auto theta = verify::random_theta(1, 5, rng);
    const auto pi = policy::softmax(theta);
    long double direct = 0.0L;
    for (int a = 0; a < 5; ++a) direct += static_cast<long double>(pi(0, a)) * inst.means[a];
    CHECK(std::abs(bandit::value(inst, theta) - static_cast<double>(direct)) <= 1e-14);
  }
}

TEST_CASE("bandit gradient vs finite differences") {
  const auto spec = make_spec({1.0, 0.0});
  const auto g = bandit::gradient(spec, row({0.0, 0.0}));
  const auto fd = verify::finite_diff_grad(
      [&](const Matrix& th) { return bandit::value(spec, th); }, row({0.0, 0.0}), 1e-6);
  CHECK(g[0] == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(std::abs(g[0] - fd(0, 0)) <= 1e-9);
  CHECK(std::abs(g[1] - fd(0, 1)) <= 1e-9);

  // Constant rewards: the objective is constant on the simplex.
  const auto flat = make_spec({0.7, 0.7, 0.7});
  for (double v : bandit::gradient(flat, row({1.0, -2.0, 0.5}))) CHECK(std::abs(v) <= 1e-15);

  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst =
        bandit::generate_instance(10, 0.2, bandit::RewardFamily::Bernoulli, rng.next_u64());
    const auto theta = verify::random_theta(1, 10, rng);
    const auto g2 = to_matrix(bandit::gradient(inst, theta));
    const auto fd2 = verify::finite_diff_grad(
        [&](const Matrix& th) { return bandit::value(inst, th); }, theta, 1e-6);
    CHECK(norm2(g2 - fd2) <= 1e-6 * std::max(1.0, norm2(g2)));
    double sum = 0.0;
    for (int a = 0; a < 10; ++a) sum += g2(0, a);
    CHECK(std::abs(sum) <= 1e-15);
  }
}

TEST_CASE("IS sample structure and hand-checked values") {
  const auto spec = make_spec({1.0, 0.0});
  const auto s = bandit::forced_sample_gradient(spec, row({0.0, 0.0}), 0, 1.0);
  CHECK(s.r_hat[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(s.r_hat[1] == 0.0);
  CHECK(s.g_hat[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.g_hat[1] == doctest::Approx(-0.5).epsilon(1e-15));

  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst =
        bandit::generate_instance(6, 0.3, bandit::RewardFamily::Bernoulli, rng.next_u64());
    const auto theta = verify::random_theta(1, 6, rng);
    const auto pi = policy::softmax(theta);
    const auto draw = bandit::sample_gradient(inst, theta, rng);
    for (int a = 0; a < 6; ++a)
      if (a != draw.arm) CHECK(draw.r_hat[a] == 0.0);
    CHECK(draw.r_hat[draw.arm] ==
          doctest::Approx(draw.reward / pi(0, draw.arm)).epsilon(1e-12));
    double sum = 0.0;
    for (double g : draw.g_hat) sum += g;
    CHECK(std::abs(sum) <= 1e-12);
  }
}

TEST_CASE("IS estimator is exactly unbiased under enumeration") {
  Rng rng(24);
  for (int arms : {2, 5, 10}) {
    const auto spec =
        bandit::generate_instance(arms, 0.25, bandit::RewardFamily::Bernoulli, rng.next_u64());
    for (int trial = 0; trial < 20; ++trial) {
      const auto theta = verify::random_theta(1, arms, rng);
      const auto pi = policy::softmax(theta);
      const auto exact = bandit::gradient(spec, theta);
      std::vector<double> mean(arms, 0.0);
      for (int arm = 0; arm < arms; ++arm) {
        const auto s = bandit::forced_sample_gradient(spec, theta, arm, spec.means[arm]);
        for (int a = 0; a < arms; ++a) mean[a] += pi(0, arm) * s.g_hat[a];
      }
      for (int a = 0; a < arms; ++a) CHECK(std::abs(mean[a] - exact[a]) <= 1e-15);
    }
  }
}

TEST_CASE("sampled gradient norms stay below sqrt(2) for every family") {
  Rng rng(25);
  for (auto family : {bandit::RewardFamily::Bernoulli, bandit::RewardFamily::TruncatedGaussian,
                      bandit::RewardFamily::Beta}) {
    const auto spec = bandit::generate_instance(5, 0.2, family, 77);
    for (int trial = 0; trial < 3000; ++trial) {
      const auto theta = verify::random_theta(1, 5, rng);
      const auto draw = bandit::sample_gradient(spec, theta, rng);
      CHECK(draw.reward >= 0.0);
      CHECK(draw.reward <= 1.0);
      double n2 = 0.0;
      for (double g : draw.g_hat) n2 += g * g;
      CHECK(std::sqrt(n2) <= std::sqrt(2.0) + 1e-12);
    }
  }
}

TEST_CASE("entropy value and gradient") {
  const auto spec = make_spec({1.0, 0.0});
  CHECK(bandit::entropy_value(spec, row({0.0, 0.0}), 1.0) ==
        doctest::Approx(0.5 + std::log(2.0)).epsilon(1e-14));
  CHECK(bandit::entropy_value(spec, row({1.3, -0.2}), 0.0) ==
        doctest::Approx(bandit::value(spec, row({1.3, -0.2}))).epsilon(1e-15));
  // One-hot limit has no entropy left.
  CHECK(std::abs(bandit::entropy_value(spec, row({30.0, 0.0}), 0.7) - 1.0) <= 1e-9);

  // tau = 0 reduction.
  Rng rng(26);
  for (int trial = 0; trial < 20; ++trial) {
    const auto theta = verify::random_theta(1, 4, rng);
    const auto spec4 =
        bandit::generate_instance(4, 0.3, bandit::RewardFamily::Bernoulli, rng.next_u64());
    const auto g0 = bandit::gradient(spec4, theta);
    const auto ge = bandit::entropy_gradient(spec4, theta, 0.0);
    for (int a = 0; a < 4; ++a) CHECK(std::abs(g0[a] - ge[a]) <= 1e-15);
  }

  // Uniform policy with constant rewards maximizes the regularized objective.
  const auto flat = make_spec({0.4, 0.4, 0.4});
  for (double tau : {0.1, 1.0})
    for (double v : bandit::entropy_gradient(flat, row({0.0, 0.0, 0.0}), tau))
      CHECK(std::abs(v) <= 1e-15);

  // Finite differences of f^tau.
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst =
        bandit::generate_instance(5, 0.25, bandit::RewardFamily::Bernoulli, rng.next_u64());
    const auto theta = verify::random_theta(1, 5, rng);
    const auto g = to_matrix(bandit::entropy_gradient(inst, theta, 0.3));
    const auto fd = verify::finite_diff_grad(
        [&](const Matrix& th) { return bandit::entropy_value(inst, th, 0.3); }, theta, 1e-6);
    CHECK(norm2(g - fd) <= 1e-6 * std::max(1.0, norm2(g)));
  }
}

TEST_CASE("entropy sample gradient: tau=0 reduction and Monte-Carlo mean") {
  const auto spec = make_spec({0.9, 0.4, 0.1});
  const auto theta = row({0.3, -0.5, 0.2});

  // Same (arm, reward) draw must coincide at tau = 0.
  for (int arm = 0; arm < 3; ++arm) {
    const auto a = bandit::forced_sample_gradient(spec, theta, arm, spec.means[arm]);
    const auto b = bandit::forced_entropy_sample_gradient(spec, theta, 0.0, arm, spec.means[arm]);
    for (int i = 0; i < 3; ++i) CHECK(a.g_hat[i] == doctest::Approx(b.g_hat[i]).epsilon(1e-15));
  }

  // Monte-Carlo mean within 4 standard errors per coordinate, and the
  // variance bound sigma^2 = 8 (1 + (tau log A)^2).
  const double tau = 0.25;
  const auto exact = bandit::entropy_gradient(spec, theta, tau);
  Rng rng(27);
  const int n = 1000000;
  std::vector<double> sum(3, 0.0), sum2(3, 0.0);
  double dev2_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto s = bandit::entropy_sample_gradient(spec, theta, tau, rng);
    double dev2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      sum[a] += s.g_hat[a];
      sum2[a] += s.g_hat[a] * s.g_hat[a];
      const double d = s.g_hat[a] - exact[a];
      dev2 += d * d;
    }
    dev2_sum += dev2;
  }
  for (int a = 0; a < 3; ++a) {
    const double mean = sum[a] / n;
    const double var = sum2[a] / n - mean * mean;
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - exact[a]) <= 4.0 * se + 1e-12);
  }
  const double sigma2 = bandit::sample_variance_bound(tau, 3);
  CHECK(dev2_sum / n <= sigma2);
}

TEST_CASE("instance generation") {
  const auto a = bandit::generate_instance(10, 0.5, bandit::RewardFamily::Beta, 42);
  const auto b = bandit::generate_instance(10, 0.5, bandit::RewardFamily::Beta, 42);
  CHECK(a.means == b.means);  // deterministic given the seed

  Rng rng(28);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst =
        bandit::generate_instance(8, 0.37, bandit::RewardFamily::Bernoulli, rng.next_u64());
    CHECK(std::abs(inst.max_gap() - 0.37) <= 1e-12);
    for (double r : inst.means) {
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
    }
    CHECK(inst.reward_gap() > 0.0);
  }
  CHECK_THROWS_AS(bandit::generate_instance(10, 1.0, bandit::RewardFamily::Bernoulli, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(bandit::generate_instance(1, 0.5, bandit::RewardFamily::Bernoulli, 1),
                  std::invalid_argument);
}

TEST_CASE("smoothness property against the 5/2 constant") {
  Rng rng(29);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto spec =
        bandit::generate_instance(4, 0.3, bandit::RewardFamily::Bernoulli, 1234);
    const auto theta = verify::random_theta(1, 4, rng);
    Matrix other = verify::random_theta(1, 4, rng);
    const Matrix diff = other - theta;
    const double remainder = std::abs(bandit::value(spec, other) - bandit::value(spec, theta) -
                                      dot(to_matrix(bandit::gradient(spec, theta)), diff));
    CHECK(remainder <= 1.25 * dot(diff, diff) + 1e-12);
  }
}

TEST_CASE("soft optimum") {
  const auto spec = make_spec({0.9, 0.5, 0.1});
  const auto soft = bandit::soft_optimum(spec, 0.4);
  // pi*_tau = softmax(r / tau).
  const auto expect = policy::softmax(row({0.9 / 0.4, 0.5 / 0.4, 0.1 / 0.4}));
  for (int a = 0; a < 3; ++a) CHECK(soft.pi[a] == doctest::Approx(expect(0, a)).epsilon(1e-14));
  // f^{*tau} dominates every softmax policy's regularized value.
  Rng rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    const auto theta = verify::random_theta(1, 3, rng);
    CHECK(bandit::entropy_value(spec, theta, 0.4) <= soft.value + 1e-12);
  }
  const auto hard = bandit::soft_optimum(spec, 0.0);
  CHECK(hard.value == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(hard.pi[0] == 1.0);
}

TEST_CASE("instance file round trip") {
  auto spec = bandit::generate_instance(6, 0.4, bandit::RewardFamily::TruncatedGaussian, 99);
  spec.gaussian_std = 0.15;
  const auto path = std::filesystem::temp_directory_path() / "softpg_bandit_roundtrip.txt";
  bandit::save_instance(spec, path.string());
  const auto loaded = bandit::load_instance(path.string());
  CHECK(loaded.means == spec.means);
  CHECK(loaded.family == spec.family);
  CHECK(loaded.gaussian_std == spec.gaussian_std);
  CHECK(loaded.seed == spec.seed);
  std::filesystem::remove(path);
}
