#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/equilibria.hpp"

namespace wkb {

/// Right-continuous path on E: `start` on [0, first jump), then each jump's
/// state from its time on, up to `horizon`.
struct JumpPath {
  std::size_t start = 0;
  std::vector<std::pair<double, std::size_t>> jumps;  // (time, new state)
  double horizon = 0.0;

  std::size_t jump_count() const noexcept { return jumps.size(); }
  std::size_t state_at(double t) const;
  std::size_t end_state() const { return jumps.empty() ? start : jumps.back().second; }
};

/// Throws InvalidArgument for repeated states, unordered times or times
/// outside (0, horizon].
void validate_path(const JumpPath& path, std::size_t traits);

/// Sum of jump costs; +inf if any jump is forbidden.
double path_rate(const JumpPath& path, const MutationCosts& costs);

struct DpGrid {
  double dt = 0.0;
  std::size_t steps = 0;
  std::size_t traits = 0;
  std::vector<double> W;                 // (steps+1) x traits, row-major
  std::vector<std::int32_t> back;        // steps x traits; -1 = stay, j = jump from j
  std::vector<double> rates;             // steps x traits: R_i(F) used on step k
  std::vector<Subsystem> zero;           // zero set used on step k
  std::vector<double> initial_h;         // h, for the terminal condition
  std::vector<std::int32_t> initial_from;  // -1 = -h(i), j = -h(j) - cost(i,j)

  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  double value(std::size_t k, std::size_t i) const { return W[k * traits + i]; }
  std::int32_t backpointer(std::size_t k, std::size_t i) const { return back[(k - 1) * traits + i]; }
};

struct DpOptions {
  double tol = 1e-9;  // zero-set membership
  EquilibriumOptions equilibrium;
};

/// Forward marching of the one-jump-per-step recursion. dt must be <= 1e-2;
/// it is shrunk so that t_max is a whole number of steps.
DpGrid dp_solve(const Scenario& s, double t_max, double dt, const DpOptions& opt = {});
DpGrid dp_solve(const Scenario& s, double t_max, double dt, EquilibriumCache& cache,
                const DpOptions& opt = {});

/// Maximizing path from (grid time t, trait i), read forward from i. A
/// backpointer on step k is reported at the midpoint of that step's
/// path-time interval; the terminal correction of the initial value, if
/// any, is a jump at the horizon.
JumpPath optimal_path(const DpGrid& grid, double t, std::size_t i);

/// Objective of a path on the grid, accumulated in the recursion's order.
double path_objective(const DpGrid& grid, const JumpPath& path, const MutationCosts& costs);

std::string dp_grid_csv(const DpGrid& grid, const Scenario& s);
std::string jump_path_csv(const JumpPath& path, const Scenario& s);

}  // namespace wkb
