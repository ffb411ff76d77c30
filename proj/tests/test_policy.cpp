#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "softpg/policy.hpp"
#include "softpg/rng.hpp"

using namespace softpg;
using policy::Policy;
using policy::Theta;

namespace {

Theta row(std::vector<double> v) {
  Theta t(1, static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) t(0, i) = v[i];
  return t;
}

}  // namespace

TEST_CASE("softmax basics") {
  const auto uniform = policy::softmax(row({0.0, 0.0, 0.0}));
  for (int a = 0; a < 3; ++a) CHECK(uniform(0, a) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  const auto two = policy::softmax(row({std::log(2.0), 0.0}));
  CHECK(two(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(two(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("softmax matches extended-precision oracle under extreme logits") {
  const std::vector<double> logits = {100.0, 0.0, -100.0};
  const auto pi = policy::softmax(row(logits));
  const auto expect = oracles::softmax_ld(logits);
  for (int a = 0; a < 3; ++a) CHECK(std::abs(pi(0, a) - expect[a]) <= 1e-15);

  // Stability at magnitude 1e4: finite, row-stochastic.
  const auto big = policy::softmax(row({1e4, 0.0, -1e4}));
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    CHECK(std::isfinite(big(0, a)));
    sum += big(0, a);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax row sums and positivity") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Theta theta(3, 5);
    for (int i = 0; i < theta.size(); ++i) theta.data()[i] = rng.uniform(-30.0, 30.0);
    const auto pi = policy::softmax(theta);
    for (int s = 0; s < 3; ++s) {
      double sum = 0.0;
      for (int a = 0; a < 5; ++a) {
        CHECK(pi(s, a) > 0.0);
        CHECK(pi(s, a) <= 1.0);
        sum += pi(s, a);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("softmax is invariant under per-row constant shifts") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Theta theta(2, 4);
    for (int i = 0; i < theta.size(); ++i) theta.data()[i] = rng.uniform(-5.0, 5.0);
    Theta shifted = theta;
    const double c0 = rng.uniform(-50.0, 50.0);
    const double c1 = rng.uniform(-50.0, 50.0);
    for (int a = 0; a < 4; ++a) {
      shifted(0, a) += c0;
      shifted(1, a) += c1;
    }
    const auto p1 = policy::softmax(theta);
    const auto p2 = policy::softmax(shifted);
    for (int i = 0; i < p1.size(); ++i) CHECK(std::abs(p1.data()[i] - p2.data()[i]) <= 1e-12);
  }
}

TEST_CASE("softmax rejects non-finite input") {
  Theta bad(1, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(policy::softmax(bad), std::invalid_argument);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(policy::softmax(bad), std::invalid_argument);
}

TEST_CASE("row entropy") {
  Policy uniform(1, 4, 0.25);
  CHECK(policy::row_entropy(uniform)[0] == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // Deterministic limit: entropy of softmax([z, 0]) is ~ (z + 1) e^{-z}.
  const auto peaked = policy::softmax(row({35.0, 0.0}));
  CHECK(policy::row_entropy(peaked)[0] <= 1e-12);

  Policy mixed(1, 3);
  mixed(0, 0) = 0.5;
  mixed(0, 1) = 0.25;
  mixed(0, 2) = 0.25;
  // Direct summation: -(0.5 log 0.5 + 2 * 0.25 log 0.25) = 1.5 log 2.
  double direct = 0.0;
  for (int a = 0; a < 3; ++a) direct -= mixed(0, a) * std::log(mixed(0, a));
  CHECK(direct == doctest::Approx(1.5 * std::log(2.0)).epsilon(1e-15));
  CHECK(policy::row_entropy(mixed)[0] == doctest::Approx(direct).epsilon(1e-15));
}

TEST_CASE("row entropy is invariant under action permutation") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    Theta theta(1, 6);
    for (int i = 0; i < 6; ++i) theta.data()[i] = rng.uniform(-4.0, 4.0);
    const auto pi = policy::softmax(theta);
    Policy rotated(1, 6);
    for (int a = 0; a < 6; ++a) rotated(0, (a + 2) % 6) = pi(0, a);
    CHECK(policy::row_entropy(pi)[0] ==
          doctest::Approx(policy::row_entropy(rotated)[0]).epsilon(1e-13));
  }
}

TEST_CASE("jacobian apply hand-checked values") {
  // diag(pi) v - pi pi^T v for pi = [1/2, 1/2], v = [1, 0]:
  // [1/2, 0] - [1/4, 1/4] = [1/4, -1/4].
  const std::vector<double> u = {0.5, 0.5};
  const std::vector<double> v = {1.0, 0.0};
  const auto out = policy::jacobian_apply(u, v);
  CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(out[1] == doctest::Approx(-0.25).epsilon(1e-15));

  const std::vector<double> skew = {0.9, 0.1};
  const auto out2 = policy::jacobian_apply(skew, v);
  CHECK(out2[0] == doctest::Approx(0.09).epsilon(1e-12));
  CHECK(out2[1] == doctest::Approx(-0.09).epsilon(1e-12));
}

TEST_CASE("jacobian apply kernel and zero-sum") {
  Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    Theta theta(1, 5);
    for (int i = 0; i < 5; ++i) theta.data()[i] = rng.uniform(-5.0, 5.0);
    const auto pi = policy::softmax(theta);
    const std::vector<double> pirow(pi.row(0), pi.row(0) + 5);

    const double c = rng.uniform(-10.0, 10.0);
    const std::vector<double> constant(5, c);
    for (double x : policy::jacobian_apply(pirow, constant)) CHECK(std::abs(x) <= 1e-12);

    std::vector<double> v(5);
    for (auto& x : v) x = rng.uniform(-3.0, 3.0);
    const auto out = policy::jacobian_apply(pirow, v);
    double sum = 0.0;
    for (double x : out) sum += x;
    CHECK(std::abs(sum) <= 1e-12);
  }
}

TEST_CASE("jacobian apply equals the softmax directional derivative") {
  Rng rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    Theta theta(1, 4);
    std::vector<double> v(4);
    for (int i = 0; i < 4; ++i) {
      theta.data()[i] = rng.uniform(-3.0, 3.0);
      v[i] = rng.uniform(-1.0, 1.0);
    }
    const auto pi = policy::softmax(theta);
    const auto jv =
        policy::jacobian_apply(std::vector<double>(pi.row(0), pi.row(0) + 4), v);
    const double h = 1e-6;
    Theta up = theta, down = theta;
    for (int i = 0; i < 4; ++i) {
      up.data()[i] += h * v[i];
      down.data()[i] -= h * v[i];
    }
    const auto pu = policy::softmax(up);
    const auto pd = policy::softmax(down);
    for (int a = 0; a < 4; ++a) {
      const double fd = (pu(0, a) - pd(0, a)) / (2.0 * h);
      CHECK(std::abs(jv[a] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("jacobian apply rejects mismatched lengths") {
  const std::vector<double> u = {0.5, 0.5};
  const std::vector<double> v = {1.0, 0.0, 0.0};
  CHECK_THROWS_AS(policy::jacobian_apply(u, v), std::invalid_argument);
}

TEST_CASE("argmax action") {
  CHECK(policy::argmax_action(std::vector<double>{0.1, 0.9}) == 1);
  CHECK(policy::argmax_action(std::vector<double>{0.5, 0.5}) == 0);  // tie -> lowest index
  CHECK_THROWS_AS(policy::argmax_action(std::vector<double>{}), std::invalid_argument);

  Rng rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(10);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    int best = 0;
    for (int i = 1; i < 10; ++i)
      if (v[i] > v[best]) best = i;
    CHECK(policy::argmax_action(v) == best);
  }
}

TEST_CASE("log softmax stays finite where probabilities underflow") {
  const auto lp = policy::log_softmax(row({1e4, 0.0}));
  CHECK(std::isfinite(lp(0, 0)));
  CHECK(std::isfinite(lp(0, 1)));
  CHECK(lp(0, 1) == doctest::Approx(-1e4).epsilon(1e-12));
  CHECK(lp(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
}
