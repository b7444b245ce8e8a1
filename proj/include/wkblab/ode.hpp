#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace wkb {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 picks one from the initial slope
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-14;
  std::size_t max_steps = 50'000'000;
};

/// One accepted step, with both end slopes for Hermite dense output.
struct OdeStep {
  double t0;
  double t1;
  std::span<const double> y0;
  std::span<const double> f0;
  std::span<const double> y1;
  std::span<const double> f1;
};

/// Cubic Hermite interpolation inside an accepted step.
void hermite(const OdeStep& step, double t, std::span<double> out);

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct OdeHooks {
  /// Called before every step attempt, accepted or not.
  std::function<void()> before_attempt;
  /// Called for every accepted step; return false to stop integrating.
  std::function<bool(const OdeStep&)> on_accept;
};

struct OdeResult {
  double t_end = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool stopped_early = false;
};

/// Dormand-Prince 5(4) with PI step control, integrating y from t0 to t1 in
/// place. Throws Error(StepFailure) if the step size underflows or the step
/// budget runs out.
OdeResult integrate_dopri(const OdeRhs& rhs, double t0, double t1, std::vector<double>& y,
                          const OdeOptions& opt = {}, const OdeHooks& hooks = {});

}  // namespace wkb
