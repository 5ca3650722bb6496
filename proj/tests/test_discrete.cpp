#include "dmd/discrete.hpp"
#include "dmd/equilibrium.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace dmd;
using testing::vec;

namespace {

const EquilibriumSet kLine = EquilibriumHyperplane{vec({1, -1}), 50.0};

}  // namespace

TEST_CASE("discrete PDMD: first step by hand") {
  DiscreteOptions opts;
  opts.max_iter = 1;
  const auto run = run_discrete_pdmd(testing::monotone_game(), Vector::Zero(2), {}, opts);
  REQUIRE(run.samples() == 2);
  CHECK(run.iterates.col(0).isApprox(vec({0, 0})));
  // z_1 = 0.001 (500, -500), x_1 = proj(z_1 / 0.1)
  CHECK(run.iterates.col(1).isApprox(vec({5, -5})));
}

TEST_CASE("discrete PDMD converges to the eps = 0.1 rest point") {
  const Vector oracle = testing::euclidean_rest_point_oracle(
      testing::mat2(-10, 10, 10, -10), vec({500, -500}), 0.1);
  CHECK(std::abs(oracle(0) - 24.876) < 1e-3);
  DiscreteOptions opts;
  opts.record_every = 10'000;
  const auto run = run_discrete_pdmd(testing::monotone_game(), Vector::Zero(2), {}, opts);
  CHECK(run.iteration_count == 1'000'000);
  CHECK((run.final_x() - oracle).norm() <= 0.5);
  CHECK_FALSE(run.diverged);
}

TEST_CASE("discrete PDMD is stationary at eps times the rest point") {
  const auto g = testing::monotone_game();
  const auto pe = perturbed_equilibrium(g, testing::euclidean_profile(g, 0.1));
  DiscreteOptions opts;
  opts.max_iter = 5000;
  const auto run = run_discrete_pdmd(g, 0.1 * pe.x, {1e-3, 0.1}, opts);
  for (Index c = 0; c < run.samples(); ++c)
    CHECK((run.iterates.col(c) - pe.x).norm() <= 1e-9);
}

TEST_CASE("ITR: first step by hand") {
  DiscreteOptions opts;
  opts.max_iter = 1;
  const auto run = run_itr(testing::monotone_game(), Vector::Zero(2), {}, opts);
  // t_1 = eps_1 = 1: x_1 = proj(0 + (500, -500))
  CHECK(run.iterates.col(1).isApprox(vec({100, -100})));
}

TEST_CASE("ITR stays at the equilibrium of U(x) = -x") {
  const GameSpec g = GameSpec::affine(-Matrix::Identity(2, 2), Vector::Zero(2),
                                      {ActionSet::box(2, -1, 1)});
  DiscreteOptions opts;
  opts.max_iter = 1000;
  const auto run = run_itr(g, Vector::Zero(2), {}, opts);
  CHECK(run.iterates.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ITR approaches the equilibrium line") {
  DiscreteOptions opts;
  opts.record_every = 10'000;
  const auto run = run_itr(testing::monotone_game(), Vector::Zero(2), {}, opts);
  const Vector x = run.final_x();
  CHECK(std::abs(x(0) - x(1) - 50.0) <= 1.0);
}

TEST_CASE("PDMD reaches the equilibrium line in fewer iterations than ITR") {
  DiscreteOptions opts;
  opts.max_iter = 100'000;
  opts.record_every = 1000;
  opts.monitor = kLine;
  const auto pdmd = run_discrete_pdmd(testing::monotone_game(), Vector::Zero(2), {}, opts);
  const auto itr = run_itr(testing::monotone_game(), Vector::Zero(2), {}, opts);
  REQUIRE(pdmd.hit_iteration.has_value());
  REQUIRE(itr.hit_iteration.has_value());
  CHECK(*pdmd.hit_iteration < *itr.hit_iteration);
}

TEST_CASE("discrete runs keep iterates in Omega and align residuals") {
  DiscreteOptions opts;
  opts.max_iter = 2000;
  opts.record_every = 7;
  const auto g = testing::hypo_game();
  for (const auto& run : {run_discrete_pdmd(g, vec({3, -4}), {1e-2, 0.5}, opts),
                          run_itr(g, vec({3, -4}), {}, opts)}) {
    CHECK(run.residuals.size() == run.iterations.size());
    CHECK(run.iterations.back() == 2000);
    for (Index c = 0; c < run.samples(); ++c) {
      CHECK(g.contains(run.iterates.col(c)));
      CHECK((run.iterations[c] % 7 == 0 || run.iterations[c] == 2000));
      CHECK(run.residuals[c] == doctest::Approx(nash_residual(g, run.iterates.col(c))));
    }
  }
}

TEST_CASE("discrete schedules are validated") {
  const auto g = testing::monotone_game();
  CHECK_THROWS_AS(run_discrete_pdmd(g, Vector::Zero(2), {1.5, 0.1}), ConfigError);
  CHECK_THROWS_AS(run_discrete_pdmd(g, Vector::Zero(2), {1e-3, 0.0}), ConfigError);
  CHECK_THROWS_AS(run_discrete_pdmd(g, Vector::Zero(3), {}), DimensionError);
  CHECK_THROWS_AS(run_itr(g, Vector::Zero(2), {1.2, 0.5}), ConfigError);
  CHECK_THROWS_AS(run_itr(g, vec({500, 0}), {}), DomainError);
}

TEST_CASE("discrete PDMD flags a non-finite iterate") {
  const GameSpec g({ActionSet::whole_space(1)},
                   [](const Vector& x) -> Vector { return 1e300 * x; });
  DiscreteOptions opts;
  opts.max_iter = 100;
  const auto run = run_discrete_pdmd(g, vec({1.0}), {0.5, 1.0}, opts);
  CHECK(run.diverged);
  CHECK(run.iteration_count < 100);
  CHECK(run.iterates.allFinite());
}
