#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "softpg/verify.hpp"

using namespace softpg;

TEST_CASE("lambert W identity and known points") {
  CHECK(verify::lambert_w(0.0) == 0.0);
  CHECK(verify::lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  // W(1/e) from an independent bisection oracle.
  const double expect = oracles::lambert_w_bisect(1.0 / std::exp(1.0));
  CHECK(expect == doctest::Approx(0.278465).epsilon(1e-5));
  CHECK(verify::lambert_w(1.0 / std::exp(1.0)) == doctest::Approx(expect).epsilon(1e-12));
  for (const double x : {0.0, 1e-6, 1.0 / std::exp(1.0), 1.0, std::exp(1.0), 10.0, 1e6}) {
    const double w = verify::lambert_w(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, x));
  }
  CHECK_THROWS_AS(verify::lambert_w(-0.1), std::invalid_argument);
}

TEST_CASE("finite differences are exact on linear objectives") {
  Matrix coeff(2, 3);
  for (int i = 0; i < 6; ++i) coeff.data()[i] = 0.3 * i - 0.7;
  const auto f = [&](const Matrix& th) { return dot(coeff, th); };
  Matrix theta(2, 3, 0.4);
  const auto fd = verify::finite_diff_grad(f, theta, 1e-4);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(fd.data()[i] - coeff.data()[i]) <= 1e-12);
  CHECK_THROWS_AS(verify::finite_diff_grad(f, theta, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(verify::finite_diff_grad(f, theta, 1e-2), std::invalid_argument);
}

TEST_CASE("smoothness checkers pass with the setting constants") {
  Rng rng(61);
  const auto spec = bandit::generate_instance(10, 0.3, bandit::RewardFamily::Bernoulli, 1);
  CHECK(verify::check_smoothness(spec, 0.0, bandit::smoothness(), 2000, rng).pass);
  CHECK(verify::check_smoothness(spec, 0.5, bandit::entropy_smoothness(0.5, 10), 2000, rng)
            .pass);
  // A deliberately understated constant must fail.
  const auto broken = verify::check_smoothness(spec, 0.0, 0.01, 2000, rng);
  CHECK_FALSE(broken.pass);
  CHECK(broken.max_violation > 0.0);

  const auto m = mdp::random_instance(3, 3, 0.9, 2);
  CHECK(verify::check_smoothness(m, 0.0, mdp::smoothness(0.9), 300, rng).pass);
  CHECK(verify::check_smoothness(m, 0.5, mdp::entropy_smoothness(0.9, 0.5, 3), 300, rng).pass);
}

TEST_CASE("Lojasiewicz checkers") {
  Rng rng(62);
  const auto spec = bandit::generate_instance(6, 0.2, bandit::RewardFamily::Bernoulli, 3);
  CHECK(verify::check_lojasiewicz(spec, 0.0, 2000, rng).pass);
  CHECK(verify::check_lojasiewicz(spec, 0.5, 2000, rng).pass);
  CHECK(verify::check_reversed_lojasiewicz(spec, 2000, rng).pass);

  const auto m = mdp::random_instance(3, 3, 0.85, 4);
  CHECK(verify::check_lojasiewicz(m, 0.0, 200, rng).pass);
  CHECK(verify::check_lojasiewicz(m, 0.5, 200, rng).pass);
  CHECK(verify::check_reversed_lojasiewicz(m, 200, rng).pass);
}

TEST_CASE("strong growth condition checkers") {
  Rng rng(63);
  const auto spec = bandit::generate_instance(5, 0.25, bandit::RewardFamily::Bernoulli, 5);
  const auto rep = verify::check_sgc(spec, 500, rng);
  CHECK(rep.pass);

  // rho formula spot value: A = 10, Delta = 0.5.
  CHECK(bandit::sgc_constant(0.5, 10) == doctest::Approx(8.0 * std::pow(10.0, 1.5) / 0.25)
                                             .epsilon(1e-12));
  CHECK(bandit::sgc_constant(0.5, 10) == doctest::Approx(1011.93).epsilon(1e-4));

  const auto m = mdp::random_instance(2, 2, 0.8, 6);
  CHECK(verify::check_sgc(m, 200, rng).pass);
  const auto big = mdp::random_instance(8, 6, 0.8, 7);  // 6^8 > 1e6
  CHECK_THROWS_AS(verify::check_sgc(big, 1, rng), std::invalid_argument);
}

TEST_CASE("two-arm SGC identity") {
  const auto id = verify::two_arm_sgc_equality(1.0, 0.0, 0.5);
  CHECK(id.lhs == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(id.rhs == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  CHECK(id.rho == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));

  const auto id2 = verify::two_arm_sgc_equality(0.6, 0.5, 0.3);
  CHECK(std::abs(id2.lhs - id2.rho * id2.rhs) <= 1e-12);

  // Degenerate policies collapse both sides.
  const auto edge = verify::two_arm_sgc_equality(1.0, 0.0, 1e-9);
  CHECK(edge.lhs <= 1e-8);
  CHECK(edge.rhs <= 1e-8);

  CHECK_THROWS_AS(verify::two_arm_sgc_equality(0.5, 0.5, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(verify::two_arm_sgc_equality(1.0, 0.0, 0.0), std::invalid_argument);

  Rng rng(64);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double r2 = rng.uniform(0.0, 0.8);
    const double r1 = r2 + rng.uniform(0.01, 0.2);
    const double p = rng.uniform(0.01, 0.99);
    const auto t = verify::two_arm_sgc_equality(r1, r2, p);
    worst = std::max(worst, std::abs(t.lhs - t.rho * t.rhs));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("entropy bias bound") {
  // The worst-case reward vector achieves the bound.
  for (const double tau : {0.05, 0.1, 0.2}) {
    const auto spec = verify::worst_case_bias_instance(10, tau);
    const double bound = verify::entropy_bias_bound(10, tau);
    CHECK(std::abs(verify::measured_entropy_bias(spec, tau) - bound) <= 1e-9);
  }
  // Random instances stay below it.
  Rng rng(65);
  for (int i = 0; i < 1000; ++i) {
    const auto spec =
        bandit::generate_instance(10, 0.3, bandit::RewardFamily::Bernoulli, rng.next_u64());
    const double tau = 0.1;
    CHECK(verify::measured_entropy_bias(spec, tau) <=
          verify::entropy_bias_bound(10, tau) + 1e-12);
  }
  CHECK_THROWS_AS(verify::entropy_bias_bound(1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(verify::entropy_bias_bound(10, 0.0), std::invalid_argument);
}

TEST_CASE("entropy assumption suite") {
  Rng rng(66);
  const auto spec = bandit::generate_instance(10, 0.3, bandit::RewardFamily::Bernoulli, 8);
  const auto rb = verify::check_entropy_assumptions(spec, 1000, rng);
  CHECK(rb.pass);
  // theta = theta*_tau corner: the transfer inequality holds with slack tau B3.
  const auto m = mdp::random_instance(3, 3, 0.9, 9);
  const auto rm = verify::check_entropy_assumptions(m, 100, rng);
  CHECK(rm.pass);
}

TEST_CASE("estimator bound checkers") {
  Rng rng(67);
  const auto spec = bandit::generate_instance(10, 0.5, bandit::RewardFamily::Bernoulli, 10);
  CHECK(verify::check_unbiased(spec, 50, rng).pass);
  CHECK(verify::check_gradient_bounds(spec, 20000, rng).pass);
  CHECK(verify::check_second_moment(spec, 20000, rng).pass);
  const auto m = mdp::random_instance(2, 2, 0.8, 11);
  CHECK(verify::check_unbiased(m, 50, rng).pass);
  CHECK(verify::check_gradient_bounds(m, 2000, rng).pass);
}

TEST_CASE("theorem bound constants") {
  verify::BoundInputs in;
  in.L = 2.5;
  in.mu = 0.04;
  in.beta = 1.0;
  in.T = 100000.0;
  in.eta0 = 1.0 / 18.0;
  in.varrho = 1000.0;

  // beta = T makes alpha exactly 1.
  verify::BoundInputs flat = in;
  flat.beta = flat.T;
  CHECK(verify::theorem_bound_constants(verify::BoundSetting::VarianceRate, flat).alpha ==
        doctest::Approx(1.0).epsilon(1e-15));

  const auto var = verify::theorem_bound_constants(verify::BoundSetting::VarianceRate, in);
  CHECK(var.kappa == doctest::Approx(2.0 * 2.5 / 0.04).epsilon(1e-15));
  CHECK(var.C1 == doctest::Approx(std::exp(2.0 / (var.kappa * std::log(1e5)))).epsilon(1e-13));
  CHECK(var.C2 ==
        doctest::Approx(4.0 * var.kappa * var.kappa / (std::exp(2.0) * var.alpha * var.alpha))
            .epsilon(1e-13));
  CHECK(var.T0 == 0.0);

  const auto sgc = verify::theorem_bound_constants(verify::BoundSetting::SgcRate, in);
  CHECK(sgc.kappa == doctest::Approx(2.0 / (0.04 / 18.0)).epsilon(1e-13));
  CHECK(sgc.T0 == doctest::Approx(in.T * std::log(1000.0 / 18.0) / std::log(1e5)).epsilon(1e-13));

  // eta0 <= 1/rho turns the SGC warm-up phase off.
  verify::BoundInputs safe = in;
  safe.eta0 = 1.0 / 2000.0;
  CHECK(verify::theorem_bound_constants(verify::BoundSetting::SgcRate, safe).T0 == 0.0);
}

TEST_CASE("checker passes are reproducible under the same seed") {
  const auto spec = bandit::generate_instance(5, 0.3, bandit::RewardFamily::Bernoulli, 12);
  Rng a(99), b(99);
  const auto ra = verify::check_smoothness(spec, 0.0, bandit::smoothness(), 200, a);
  const auto rb = verify::check_smoothness(spec, 0.0, bandit::smoothness(), 200, b);
  CHECK(ra.max_violation == rb.max_violation);
  CHECK(ra.tightness == rb.tightness);
}
