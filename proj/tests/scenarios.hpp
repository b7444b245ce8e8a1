#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/error.hpp"
#include "wkblab/hj.hpp"

namespace fixtures {

using namespace wkb;

// Two chemostat traits sharing one resource; trait 2 starts exp(-0.5/eps) low.
inline Scenario s1(std::vector<double> h = {0.0, 0.5}) {
  return Scenario(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {1.0, 0.8}),
                  GrowthModel(Chemostat{{1, 1}, {2, 2}, {1}}), InitialExponent(std::move(h)));
}

inline Scenario lv2() {
  return Scenario(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0),
                  ResourceWeights(2, 2, {1.0, 0.5, 0.5, 1.0}), GrowthModel(LotkaVolterra{{1, 1}, {1, 1}}),
                  InitialExponent({0.0, 0.0}));
}

// Two identical traits: every point of the segment u_1 + u_2 = 1 is a steady state.
inline Scenario degenerate() {
  return Scenario(TraitSpace({"a", "b"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {1.0, 1.0}),
                  GrowthModel(Chemostat{{1, 1}, {2, 2}, {1}}), InitialExponent({0.0, 0.0}));
}

// The weaker trait starts at macroscopic level; the fitter one invades.
inline Scenario invasion(double h2) {
  return Scenario(TraitSpace({"1", "2"}), MutationCosts::uniform(2, 1.0), ResourceWeights(1, 2, {0.8, 1.0}),
                  GrowthModel(Chemostat{{1, 1}, {2, 2}, {1}}), InitialExponent({0.0, h2}));
}

inline Scenario single_trait(double h = 0.0) {
  return Scenario(TraitSpace({"x"}), MutationCosts(1, {0.0}), ResourceWeights(1, 1, {1.0}),
                  GrowthModel(Chemostat{{1}, {2}, {1}}), InitialExponent({h}));
}

// R == 0 through an affine table with zero coefficients.
inline Scenario null_growth(std::size_t n = 2) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  return Scenario(TraitSpace(labels), MutationCosts::uniform(n, 1.0), ResourceWeights(1, n, std::vector<double>(n, 1.0)),
                  GrowthModel(AffineTable{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}),
                  InitialExponent(std::vector<double>(n, 0.0)));
}

// Random 3- or 4-trait chemostat with 1 or 2 resources. Costs lie in
// [0.8, 1.2] so the triangle slack is at least 0.4.
inline Scenario random_chemostat(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_n(3, 4), pick_r(1, 2);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * U(rng); };
  const std::size_t n = static_cast<std::size_t>(pick_n(rng));
  const std::size_t r = static_cast<std::size_t>(pick_r(rng));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
  std::vector<double> costs(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) costs[i * n + j] = in(0.8, 1.2);
  std::vector<double> psi(r * n);
  for (auto& p : psi) p = in(0.5, 1.5);
  Chemostat ch;
  for (std::size_t i = 0; i < n; ++i) {
    ch.d.push_back(in(0.5, 1.5));
    ch.c.push_back(in(1.5, 3.0));
  }
  for (std::size_t l = 0; l < r; ++l) ch.alpha.push_back(in(0.5, 1.5));
  std::vector<double> h(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) h[i] = in(0.0, 1.0);
  return Scenario(TraitSpace(labels), MutationCosts(n, costs), ResourceWeights(r, n, psi), GrowthModel(ch),
                  InitialExponent(h));
}

// Draws random scenarios until `count` pass validate_scenario and yield an
// HJ solution on [0, t_max] (every arising subsystem satisfies the
// equilibrium hypothesis).
inline std::vector<Scenario> random_validated(std::uint64_t seed, std::size_t count, double t_max = 5.0) {
  std::mt19937_64 rng(seed);
  std::vector<Scenario> out;
  for (int attempt = 0; out.size() < count && attempt < 100 * static_cast<int>(count); ++attempt) {
    Scenario s = random_chemostat(rng);
    if (!validate_scenario(s, 500).passed()) continue;
    try {
      (void)evolve_hj(s, t_max);
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fixtures
