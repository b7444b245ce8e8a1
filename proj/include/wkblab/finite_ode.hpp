#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/ode.hpp"

namespace wkb {

/// Solution of the finite-trait system sampled on an output grid. Rows are
/// time-major: u[k] is the density vector at times[k].
struct Trajectory {
  double eps = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> v;
};

struct SimulateOptions {
  OdeOptions ode;
  bool check_initial_mass = true;
  double clip_exponent = 50.0;  // mutation exponent cap, in units of 1/eps
};

/// Lower and upper bounds on sum_i u for a given eps. `primary` is
/// (v_min - (n-1) e^{-beta/eps} / A) / psi_max below and
/// (v_max + A (n-1) e^{-gamma/eps}) / psi_min above; `alternate` swaps the
/// (1/A, beta) and (A, gamma) pairs.
struct MassWindow {
  double lower = 0.0;
  double upper = kInf;
};

struct MassWindows {
  MassWindow primary;
  MassWindow alternate;
};

MassWindows mass_window(const Scenario& s, double eps);

/// Integrates the log-space form of the system from w(0) = -h up to t_max,
/// storing the state every dt_out (plus t_max itself).
Trajectory simulate_finite(const Scenario& s, double eps, double t_max, double dt_out,
                           const SimulateOptions& opt = {});

struct MassViolation {
  std::size_t index;
  double time;
  double mass;
  double margin;  // negative: distance outside the window
};

struct BoundsReport {
  MassWindows windows;
  double tolerance = 1e-6;
  bool passed = true;
  bool alternate_passed = true;
  double min_margin = kInf;  // relative margin in the primary window
  std::optional<MassViolation> first_violation;
  std::optional<MassViolation> first_alternate_violation;
};

BoundsReport check_mass_bounds(const Trajectory& traj, const Scenario& s, double rel_tol = 1e-6);

std::string trajectory_csv(const Trajectory& traj, const Scenario& s);

}  // namespace wkb
