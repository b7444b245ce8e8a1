#include <doctest.h>

#include <cmath>

#include "scenarios.hpp"
#include "wkblab/hj.hpp"
#include "wkblab/variational.hpp"

using namespace wkb;

TEST_CASE("path rate sums jump costs") {
  const auto costs = MutationCosts(3, {0, 1, kInf, 1, 0, 2, 3, 2, 0});
  JumpPath p{0, {{1.0, 1}, {2.0, 2}}, 3.0};
  CHECK(path_rate(p, costs) == 3.0);
  CHECK(p.state_at(0.5) == 0);
  CHECK(p.state_at(1.0) == 1);
  CHECK(p.end_state() == 2);
  JumpPath q{0, {{1.0, 2}}, 3.0};
  CHECK(path_rate(q, costs) == kInf);
  CHECK(path_rate(JumpPath{1, {}, 1.0}, costs) == 0.0);
}

TEST_CASE("malformed paths are rejected") {
  CHECK_THROWS_AS(validate_path(JumpPath{0, {{1.0, 0}}, 2.0}, 2), Error);
  CHECK_THROWS_AS(validate_path(JumpPath{0, {{1.0, 1}, {0.5, 0}}, 2.0}, 2), Error);
  CHECK_THROWS_AS(validate_path(JumpPath{0, {{3.0, 1}}, 2.0}, 2), Error);
  CHECK_THROWS_AS(validate_path(JumpPath{0, {{1.0, 5}}, 2.0}, 2), Error);
  CHECK_NOTHROW(validate_path(JumpPath{0, {{1.0, 1}, {1.5, 0}}, 2.0}, 2));
}

TEST_CASE("dynamic programming agrees with the exact value function on S1") {
  const Scenario s = fixtures::s1();
  const HjResult hj = evolve_hj(s, 5.0);
  const DpGrid g = dp_solve(s, 5.0, 1e-3);
  double worst = 0.0;
  for (std::size_t k = 0; k <= g.steps; ++k)
    for (std::size_t i = 0; i < 2; ++i) worst = std::max(worst, std::abs(g.value(k, i) - hj.vf(g.time(k), i)));
  CHECK(worst <= 5e-3);
}

TEST_CASE("maximizing path of the rare trait on S1") {
  const Scenario s = fixtures::s1();
  const DpGrid g = dp_solve(s, 5.0, 1e-3);
  const JumpPath late = optimal_path(g, 5.0, 1);
  CHECK(late.jump_count() == 1);
  CHECK(path_rate(late, s.costs()) == 1.0);
  const JumpPath early = optimal_path(g, 1.0, 1);
  CHECK(early.jump_count() == 0);
}

TEST_CASE("path objective reproduces the grid value") {
  for (const Scenario& s : fixtures::random_validated(41, 4)) {
    const DpGrid g = dp_solve(s, 4.0, 2e-3);
    for (double t : {1.0, 2.5, 4.0})
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t k = static_cast<std::size_t>(std::lround(t / g.dt));
        const JumpPath p = optimal_path(g, g.time(k), i);
        CHECK(path_objective(g, p, s.costs()) == doctest::Approx(g.value(k, i)).epsilon(1e-9));
      }
  }
}

TEST_CASE("grid values satisfy the cost inequality") {
  for (const Scenario& s : fixtures::random_validated(43, 4)) {
    const DpGrid g = dp_solve(s, 4.0, 2e-3);
    for (std::size_t k = 0; k <= g.steps; ++k)
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
          if (i != j) CHECK(g.value(k, i) - g.value(k, j) + s.costs()(i, j) >= -1e-12);
  }
}

TEST_CASE("dp step limits") {
  CHECK_THROWS_AS(dp_solve(fixtures::s1(), 1.0, 0.05), Error);
  const DpGrid g = dp_solve(fixtures::s1(), 1.0, 3e-3);
  CHECK(g.time(g.steps) == doctest::Approx(1.0));
  CHECK(g.dt <= 3e-3);
}
