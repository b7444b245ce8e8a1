#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "scenarios.hpp"
#include "wkblab/core.hpp"
#include "wkblab/error.hpp"

using namespace wkb;

namespace {

MutationCosts sym3(double c12, double c23, double c13) {
  return MutationCosts(3, {0, c12, c13, c12, 0, c23, c13, c23, 0});
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("triangle slack on hand-computed tables") {
  CHECK(triangle_slack(sym3(1, 1, 1.5)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(triangle_slack(MutationCosts::uniform(3, 1.0)) == doctest::Approx(1.0));
  CHECK(code_of([] { triangle_slack(sym3(0.5, 0.5, 1.2)); }) == ErrorCode::SlackViolation);
  CHECK(triangle_slack_unchecked(sym3(0.5, 0.5, 1.2)) == doctest::Approx(-0.2));
}

TEST_CASE("triangle slack ignores forbidden composite routes") {
  const double inf = kInf;
  MutationCosts c(3, {0, 1, inf, 1, 0, 1, inf, 1, 0});
  // Every detour through the third trait uses a forbidden leg.
  CHECK(triangle_slack(c) == kInf);
  MutationCosts d(3, {0, 1, 1.5, 1, 0, 1, kInf, 1, 0});
  CHECK(triangle_slack(d) == doctest::Approx(0.5));
}

TEST_CASE("triangle slack is invariant under relabeling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.8, 1.6);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4;
    std::vector<double> cost(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) cost[i * n + j] = U(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) permuted[perm[i] * n + perm[j]] = cost[i * n + j];
    CHECK(triangle_slack_unchecked(MutationCosts(n, cost)) ==
          triangle_slack_unchecked(MutationCosts(n, permuted)));
  }
}

TEST_CASE("mutation costs reject non-positive off-diagonal entries") {
  CHECK(code_of([] { MutationCosts(2, {0, 0, 1, 0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { MutationCosts(2, {0, -1, 1, 0}); }) == ErrorCode::InvalidArgument);
  MutationCosts c(2, {5, 1, kInf, 7});
  CHECK(c(0, 0) == 0.0);
  CHECK(c(1, 1) == 0.0);
  CHECK(c.rate(1, 0, 0.1) == 0.0);
  CHECK(c.gamma() == 1.0);
  CHECK(c.beta() == 1.0);
}

TEST_CASE("growth rates of the built-in families") {
  ResourceWeights one(1, 1, {1.0});
  GrowthModel ch(Chemostat{{1}, {2}, {1}});
  const std::vector<double> v1{1.0}, v0{0.0};
  CHECK(evaluate_growth(ch, one, 0, v1) == doctest::Approx(0.0));
  CHECK(evaluate_growth(ch, one, 0, v0) == doctest::Approx(1.0));
  ResourceWeights w2(2, 2, {1, 0.5, 0.5, 1});
  GrowthModel lv(LotkaVolterra{{1, 1}, {1, 1}});
  const std::vector<double> v{0.4, 0.9};
  CHECK(evaluate_growth(lv, w2, 0, v) == doctest::Approx(0.6));
  CHECK(evaluate_growth(lv, w2, 1, v) == doctest::Approx(0.1));
}

TEST_CASE("resource map examples and linearity") {
  ResourceWeights w(2, 2, {1, 0.5, 0.5, 1});
  const std::vector<double> u{2.0 / 3.0, 2.0 / 3.0};
  const auto v = resource_map(w, u);
  CHECK(v[0] == doctest::Approx(1.0));
  CHECK(v[1] == doctest::Approx(1.0));
  const std::vector<double> zero{0.0, 0.0};
  CHECK(resource_map(w, zero) == std::vector<double>{0.0, 0.0});
  ResourceWeights single(1, 1, {1.0});
  const std::vector<double> one{1.0};
  CHECK(resource_map(single, one)[0] == 1.0);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> a{U(rng), U(rng)}, b{U(rng), U(rng)};
    const double al = U(rng), be = U(rng);
    const std::vector<double> mix{al * a[0] + be * b[0], al * a[1] + be * b[1]};
    const auto lhs = resource_map(w, mix);
    const auto ra = resource_map(w, a), rb = resource_map(w, b);
    for (std::size_t l = 0; l < 2; ++l) CHECK(lhs[l] == doctest::Approx(al * ra[l] + be * rb[l]).epsilon(1e-12));
  }
}

TEST_CASE("growth is strictly decreasing in every resource") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 3.0);
  const Scenario ch = fixtures::s1();
  const Scenario lv = fixtures::lv2();
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> v{U(rng)};
    const std::vector<double> vh{v[0] + 1e-4};
    for (std::size_t i = 0; i < 2; ++i) CHECK(ch.rate(i, vh) < ch.rate(i, v));
    std::vector<double> w{U(rng), U(rng)};
    for (std::size_t i = 0; i < 2; ++i) {
      auto wp = w;
      wp[i] += 1e-4;
      CHECK(lv.rate(i, wp) < lv.rate(i, w));
    }
  }
}

TEST_CASE("S1 bounds") {
  const auto& b = fixtures::s1().bounds();
  REQUIRE(b.v_min);
  REQUIRE(b.v_max);
  CHECK(*b.v_min == doctest::Approx(0.6));
  CHECK(*b.v_max == doctest::Approx(1.0));
  CHECK(b.A >= 1.0);
}

TEST_CASE("validation of built-in scenarios") {
  CHECK(validate_scenario(fixtures::s1(), 500).passed());
  const auto rep = validate_scenario(fixtures::lv2(), 500);
  CHECK(rep.passed());
  REQUIRE(rep.interaction_eigenvalues);
  CHECK((*rep.interaction_eigenvalues)[0] == doctest::Approx(0.5));
  CHECK((*rep.interaction_eigenvalues)[1] == doctest::Approx(1.5));
}

TEST_CASE("validation reports a table increasing in v") {
  Scenario s(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {1, 1}),
             GrowthModel(AffineTable{{1, 1}, {0.5, -1.0}}, DeclaredBounds{{}, {}, 0.5, 2.0}),
             InitialExponent({0, 0}));
  const auto rep = validate_scenario(s, 200);
  CHECK_FALSE(rep.passed());
  const bool mono = std::any_of(rep.failures.begin(), rep.failures.end(),
                                [](const ValidationFailure& f) { return f.check == "monotonicity"; });
  CHECK(mono);
}

TEST_CASE("validation reports a non-viable chemostat trait and a slack violation") {
  Scenario s(TraitSpace({"1", "2", "3"}), MutationCosts(3, {0, 0.5, 1.2, 0.5, 0, 0.5, 1.2, 0.5, 0}),
             ResourceWeights(1, 3, {1, 1, 1}), GrowthModel(Chemostat{{1, 1, 3}, {2, 2, 2}, {1}}),
             InitialExponent({0, 0, 0}));
  const auto rep = validate_scenario(s, 100);
  auto has = [&](const char* check) {
    return std::any_of(rep.failures.begin(), rep.failures.end(),
                       [&](const ValidationFailure& f) { return f.check == check; });
  };
  CHECK(has("viability"));
  CHECK(has("triangle_slack"));
}

TEST_CASE("scenario construction checks dimensions") {
  CHECK(code_of([] {
          Scenario(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {1, 1}),
                   GrowthModel(Chemostat{{1}, {2, 2}, {1}}), InitialExponent({0, 0}));
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] {
          Scenario(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {1, 1}),
                   GrowthModel(Chemostat{{1, 1}, {2, 2}, {1}}), InitialExponent({0}));
        }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([] { ResourceWeights(1, 2, {1, -0.5}); }) == ErrorCode::InvalidArgument);
}
