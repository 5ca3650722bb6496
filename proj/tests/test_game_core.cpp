#include "dmd/equilibrium.hpp"
#include "dmd/experiment.hpp"
#include "dmd/game.hpp"
#include "dmd/numerics.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace dmd;
using testing::mat2;
using testing::vec;

TEST_CASE("action sets project and test membership") {
  SUBCASE("box clamps componentwise") {
    const auto box = ActionSet::box(vec({0, -1}), vec({1, 1}));
    CHECK(box.project(vec({2, -3})).isApprox(vec({1, -1})));
    CHECK(box.contains(vec({1 + 5e-10, 0})));
    CHECK_FALSE(box.contains(vec({1 + 1e-6, 0})));
  }
  SUBCASE("simplex projection matches the KKT conditions") {
    const auto simplex = ActionSet::simplex(4);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int k = 0; k < 200; ++k) {
      Vector y(4);
      for (Index i = 0; i < 4; ++i) y(i) = g(rng);
      const Vector p = simplex.project(y);
      REQUIRE(simplex.contains(p));
      // p = max(y - tau, 0) with one shared tau on the support.
      double tau = 0.0;
      int support = 0;
      for (Index i = 0; i < 4; ++i) {
        if (p(i) > 0) {
          tau += y(i) - p(i);
          ++support;
        }
      }
      tau /= support;
      for (Index i = 0; i < 4; ++i) {
        if (p(i) > 0)
          CHECK(y(i) - p(i) == doctest::Approx(tau).epsilon(1e-12));
        else
          CHECK(y(i) <= tau + 1e-12);
      }
    }
  }
  SUBCASE("ball projection rescales radially") {
    const auto ball = ActionSet::ball(vec({1, 1}), 2.0);
    CHECK(ball.project(vec({1, 5})).isApprox(vec({1, 3})));
    CHECK(ball.project(vec({1.5, 1})).isApprox(vec({1.5, 1})));
  }
  SUBCASE("shifted orthant and whole space") {
    const auto orth = ActionSet::shifted_orthant(1.0, 2);
    CHECK(orth.project(vec({-3, 4})).isApprox(vec({-1, 4})));
    CHECK_FALSE(orth.bounded());
    CHECK(truncate(orth).is<ActionSet::Box>());
    CHECK(ActionSet::whole_space(3).contains(vec({1e300, -1e300, 0})));
  }
  SUBCASE("malformed sets are rejected") {
    CHECK_THROWS_AS(ActionSet::box(vec({1}), vec({0})), ConfigError);
    CHECK_THROWS_AS(ActionSet::ball(vec({0}), -1.0), ConfigError);
    CHECK_THROWS_AS(ActionSet::simplex(0), ConfigError);
  }
}

TEST_CASE("pseudo_gradient of the quadratic games") {
  CHECK(pseudo_gradient(testing::monotone_game(), vec({0, 0}))
            .isApprox(vec({500, -500})));
  CHECK(pseudo_gradient(testing::mean_learning_game(), vec({50, 0})).norm() == 0.0);
  CHECK(pseudo_gradient(testing::hypo_game(), vec({20, -20})).norm() == 0.0);
}

TEST_CASE("pseudo_gradient rejects the wrong dimension") {
  CHECK_THROWS_AS(pseudo_gradient(testing::monotone_game(), vec({1, 2, 3})),
                  DimensionError);
}

TEST_CASE("pseudo_gradient is deterministic") {
  const auto g = testing::hypo_game();
  const Vector x = vec({0.123456789, -98.7654321});
  const Vector a = g.pseudo_gradient(x);
  const Vector b = g.pseudo_gradient(x);
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("quadratic games validate their shapes") {
  CHECK_THROWS_AS(GameSpec::affine(Matrix::Zero(2, 3), vec({0, 0}), testing::intervals()),
                  DimensionError);
  CHECK_THROWS_AS(GameSpec::affine(Matrix::Zero(3, 3), vec({0, 0, 0}), testing::intervals()),
                  DimensionError);
}

TEST_CASE("classify_monotonicity on the exact path") {
  auto classify = [](const Matrix& R) {
    return classify_monotonicity(QuadraticGame{R, Vector::Zero(R.rows()), {},
                                               {ActionSet::whole_space(R.rows())}});
  };
  SUBCASE("monotone") {
    const auto r = classify(mat2(-10, 10, 10, -10));
    CHECK(r.cls == MonotonicityClass::monotone);
    CHECK(r.modulus == 0.0);
  }
  SUBCASE("hypo-monotone with mu = 5") {
    const auto r = classify(mat2(-10, 15, 15, -10));
    CHECK(r.cls == MonotonicityClass::hypo_monotone);
    CHECK(r.modulus == doctest::Approx(5.0).epsilon(1e-12));
  }
  SUBCASE("strongly monotone with eta = 1") {
    const auto r = classify(-Matrix::Identity(2, 2));
    CHECK(r.cls == MonotonicityClass::strongly_monotone);
    CHECK(r.modulus == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("non-square R is rejected") {
    CHECK_THROWS_AS(classify_monotonicity(GameSpec::Affine{Matrix::Zero(2, 3), vec({0, 0})}),
                    DimensionError);
  }
}

TEST_CASE("sampled monotonicity agrees with the spectrum") {
  const auto mono = classify_monotonicity_sampled(testing::monotone_game(), 11);
  CHECK(mono.max_eigenvalue <= 2e-9);
  CHECK(mono.cls != MonotonicityClass::hypo_monotone);

  const auto hypo = classify_monotonicity_sampled(testing::hypo_game(), 11);
  CHECK(hypo.cls == MonotonicityClass::hypo_monotone);
  CHECK(hypo.modulus <= 5.0 + 1e-9);
  CHECK(hypo.modulus > 4.0);
  REQUIRE(hypo.violation.has_value());

  // Same seed, same report.
  const auto again = classify_monotonicity_sampled(testing::hypo_game(), 11);
  CHECK(again.modulus == hypo.modulus);
}

TEST_CASE("monotone quadratic games satisfy the monotonicity inequality on samples") {
  const auto g = testing::monotone_game();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int k = 0; k < 1000; ++k) {
    const Vector x = vec({u(rng), u(rng)});
    const Vector y = vec({u(rng), u(rng)});
    CHECK(-(g.pseudo_gradient(x) - g.pseudo_gradient(y)).dot(x - y) >= -1e-9);
  }
}

TEST_CASE("nash_residual") {
  CHECK(nash_residual(testing::hypo_game(), vec({20, -20})) <= 1e-9);
  CHECK(nash_residual(testing::monotone_game(), vec({25, -25})) == 0.0);
  CHECK(nash_residual(testing::monotone_game(), vec({0, 0})) ==
        doctest::Approx(100.0 * std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(nash_residual(testing::monotone_game(), vec({150, 0})), DomainError);
  const double a = nash_residual(testing::monotone_game(), vec({3.3, -7.1}));
  const double b = nash_residual(testing::monotone_game(), vec({3.3, -7.1}));
  CHECK(a == b);
}

TEST_CASE("perturbed_equilibrium against the linear-solve oracle") {
  SUBCASE("monotone game, eps = 0.5") {
    const auto g = testing::monotone_game();
    const auto pe = perturbed_equilibrium(g, testing::euclidean_profile(g, 0.5));
    const Vector oracle = testing::euclidean_rest_point_oracle(
        mat2(-10, 10, 10, -10), vec({500, -500}), 0.5);
    CHECK((pe.x - oracle).norm() <= 1e-9);
    CHECK(std::abs(pe.x(0) - 24.390) <= 1e-3);
    CHECK(std::abs(pe.x(1) + 24.390) <= 1e-3);
    CHECK(pe.residual <= 1e-8);
  }
  SUBCASE("hypo game, eps = 5.1") {
    const auto g = testing::hypo_game();
    const auto pe = perturbed_equilibrium(g, testing::euclidean_profile(g, 5.1));
    const Vector oracle = testing::euclidean_rest_point_oracle(
        mat2(-10, 15, 15, -10), vec({500, -500}), 5.1);
    CHECK((pe.x - oracle).norm() <= 1e-9);
    CHECK(std::abs(pe.x(0) - 16.611) <= 1e-3);
  }
  SUBCASE("single player U(x) = -x + b") {
    const GameSpec g = GameSpec::affine(-Matrix::Identity(2, 2), vec({1, 0}),
                                        {ActionSet::box(2, -100, 100)});
    const auto pe = perturbed_equilibrium(g, testing::euclidean_profile(g, 1.0));
    CHECK((pe.x - vec({0.5, 0})).norm() <= 1e-12);
  }
}

TEST_CASE("perturbed_equilibrium for Legendre regularizers meets the residual target") {
  const auto base = testing::monotone_game();
  for (auto kind : {RegularizerKind::boltzmann_shannon, RegularizerKind::fermi_dirac,
                    RegularizerKind::hellinger}) {
    CAPTURE(to_string(kind));
    const auto regs = build_regularizers(base, kind, 0.5);
    const auto game = base.with_sets(regs.domains());
    const auto pe = perturbed_equilibrium(game, regs);
    CHECK(pe.residual <= 1e-8);
    CHECK(perturbed_residual(game, regs, pe.x) <= 1e-8);
    // Rest point of the discounted dynamics: z = U(C(z)).
    CHECK((pe.z - game.pseudo_gradient(regs.mirror_map(pe.z))).norm() <=
          1e-6 * (1 + pe.z.norm()));
  }
}

TEST_CASE("perturbed_equilibrium reports non-convergence with its last iterate") {
  // No rest point exists for the entropy on the hypo game at eps = 5.1.
  const auto base = testing::hypo_game();
  const auto regs = build_regularizers(base, RegularizerKind::boltzmann_shannon, 5.1);
  PerturbedEquilibriumOptions opts;
  opts.fixed_point_iterations = 10'000;
  try {
    perturbed_equilibrium(base.with_sets(regs.domains()), regs, opts);
    FAIL("expected NonConvergenceError");
  } catch (const NonConvergenceError& e) {
    CHECK(e.last_iterate().size() == 2);
    CHECK(e.residual() > 1e-8);
  }
}

TEST_CASE("perturbed equilibria approach the equilibrium as eps shrinks") {
  const Vector b = vec({1, 0});
  const GameSpec g = GameSpec::affine(-Matrix::Identity(2, 2), b,
                                      {ActionSet::box(2, -100, 100)});
  double previous = INFINITY;
  for (double eps : {1.0, 0.1, 0.01}) {
    const auto pe = perturbed_equilibrium(g, testing::euclidean_profile(g, eps));
    const double d = (pe.x - b).norm();
    CHECK(d < previous);
    CHECK(d == doctest::Approx(eps * b.norm() / (1 + eps)).epsilon(1e-9));
    previous = d;
  }
}

TEST_CASE("distance_to_equilibrium_set") {
  const EquilibriumSet line = EquilibriumHyperplane{vec({1, -1}), 50.0};
  CHECK(distance_to_equilibrium_set(vec({25, -25}), line) == 0.0);
  CHECK(distance_to_equilibrium_set(vec({50, 0}), line) == 0.0);
  CHECK(distance_to_equilibrium_set(vec({0, 0}), line) ==
        doctest::Approx(50 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(distance_to_equilibrium_set(vec({3, 4}), EquilibriumPoint{vec({0, 0})}) == 5.0);
  CHECK_THROWS_AS(distance_to_equilibrium_set(vec({0, 0}),
                                              EquilibriumHyperplane{vec({0, 0}), 1.0}),
                  ConfigError);
  CHECK_THROWS_AS(distance_to_equilibrium_set(vec({0, 0, 0}), line), DimensionError);
}
