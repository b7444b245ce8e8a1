#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/equilibria.hpp"

namespace wkb {

struct InitialValue {
  std::vector<double> values;
  bool compatible = true;  // h(i) <= h(j) + cost(i,j) for all i != j
};

/// V(0,i) = max{-h(i), max_{j != i} -h(j) - cost(i,j)}.
InitialValue initial_value(const InitialExponent& h, const MutationCosts& costs);

/// {i : values_i >= -tol}. Throws MaxNotZero unless |max_i values_i| <= max_tol.
Subsystem zero_set(std::span<const double> values, double tol, double max_tol);
inline Subsystem zero_set(std::span<const double> values, double tol) {
  return zero_set(values, tol, tol);
}

/// {j : |values_j - cost(i,j) - values_i| <= tol}; always contains i.
Subsystem active_set(std::span<const double> values, std::size_t i, const MutationCosts& costs,
                     double tol);

enum class EventKind { ZeroSetChange, ActiveSetChange };
const char* to_string(EventKind k) noexcept;

struct HjEvent {
  double time = 0.0;
  EventKind kind = EventKind::ZeroSetChange;
  std::vector<std::size_t> traits;  // traits whose membership / active set changed
  Subsystem before = 0;
  Subsystem after = 0;
  std::vector<double> F_after;  // F used on the segment starting here
};

/// One linear piece of V on [t0, t1].
struct HjSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  std::vector<double> start;  // V(t0, .)
  std::vector<double> slope;
  Subsystem zero = 0;
  std::vector<double> F;
  std::vector<Subsystem> active;  // relations maintained on the segment, per trait
};

class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(std::vector<HjSegment> segments, std::vector<double> initial_raw);

  const std::vector<HjSegment>& segments() const noexcept { return segments_; }
  std::size_t traits() const noexcept { return initial_raw_.size(); }
  double t_max() const { return segments_.empty() ? 0.0 : segments_.back().t1; }
  std::vector<double> breakpoints() const;

  /// Right-continuous evaluation; t is clamped to [0, t_max].
  double operator()(double t, std::size_t i) const;
  std::vector<double> values(double t) const;
  /// -h, before the compatibility correction.
  const std::vector<double>& initial_raw() const noexcept { return initial_raw_; }

 private:
  std::vector<HjSegment> segments_;
  std::vector<double> initial_raw_;
};

struct HjOptions {
  double tol = 1e-9;         // zero-set and active-set membership
  double slope_tol = 1e-10;  // slopes below this are treated as zero
  EquilibriumOptions equilibrium;
};

struct HjResult {
  ValueFunction vf;
  std::vector<HjEvent> events;
  bool compatible = true;
};

HjResult evolve_hj(const Scenario& s, double t_max, const HjOptions& opt = {});
HjResult evolve_hj(const Scenario& s, double t_max, EquilibriumCache& cache,
                   const HjOptions& opt = {});

struct StructureReport {
  bool cost_inequality = true;
  bool max_zero = true;
  bool lipschitz = true;
  bool sandwich = true;
  bool raw_initial_compatible = true;  // cost inequality for -h itself at t = 0
  double worst_cost_gap = 0.0;         // most negative V_i - V_j + cost(i,j)
  double worst_max_zero = 0.0;         // max |max_i V(t,i)|
  double max_slope = 0.0;
  double slope_bound = 0.0;
  double worst_sandwich = 0.0;  // largest excess over M*delta
  std::vector<std::string> failures;

  bool passed() const noexcept { return cost_inequality && max_zero && lipschitz && sandwich; }
};

StructureReport check_structure(const ValueFunction& vf, const Scenario& s);

std::string breakpoints_csv(const HjResult& r, const Scenario& s);
std::string value_function_csv(const ValueFunction& vf, const Scenario& s, double dt_out);

}  // namespace wkb
