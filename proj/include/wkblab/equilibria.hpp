#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/error.hpp"

namespace wkb {

/// Nonempty set of traits as a bitmask (bit i <=> trait i).
using Subsystem = std::uint64_t;

inline constexpr std::size_t kMaxTraitsForSubsets = 64;

Subsystem subsystem_of(std::initializer_list<std::size_t> traits);
Subsystem full_subsystem(std::size_t n);
std::vector<std::size_t> members(Subsystem a);
inline bool contains(Subsystem a, std::size_t i) { return (a >> i) & 1u; }
/// "{1 2}" using trait labels.
std::string subsystem_label(const Scenario& s, Subsystem a);

struct Equilibrium {
  Subsystem A = 0;
  Subsystem support = 0;
  std::vector<double> u_star;  // full length |E|, zero off the support
  std::vector<double> v;       // resource_map(u_star)
  std::vector<std::pair<std::size_t, double>> off_support_rates;  // (trait, R_i) for A \ support
  std::vector<std::complex<double>> jacobian_spectrum;
  double residual = 0.0;  // max_i |u_i R_i(v)| over A
  bool hyperbolic = true;
  bool admissible = false;
};

struct EquilibriumOptions {
  std::size_t enumeration_cap = 20;  // maximum |A|
  double hyperbolicity_tol = 1e-7;
  double dedup_tol = 1e-8;
  double residual_tol = 1e-10;
  std::size_t newton_max_iter = 200;
  bool verify_dynamics = true;  // relaxation / Lyapunov checks in check_stability
  double t_cap = 2000.0;
};

struct SteadyStates {
  Subsystem A = 0;
  std::vector<Equilibrium> states;       // sorted by support bitmask
  std::vector<Subsystem> newton_failed;  // supports where no start converged
};

SteadyStates steady_states(const Scenario& s, Subsystem A, const EquilibriumOptions& opt = {});

/// Eigenvalues of the linearization of the restricted dynamics at u (full length).
std::vector<std::complex<double>> jacobian_spectrum(const Scenario& s, Subsystem A,
                                                    const std::vector<double>& u);

struct StabilityReport {
  Subsystem A = 0;
  SteadyStates states;
  bool all_hyperbolic = true;
  std::vector<std::size_t> admissible;  // indices into states.states
  bool unique_admissible = false;
  bool lyapunov_checked = false;   // Lotka-Volterra decrease verified along relaxation
  bool relaxation_checked = false;  // relaxation from sampled starts reached u*
  std::optional<ErrorCode> failure;
  std::string detail;

  bool passed() const noexcept { return !failure.has_value(); }
  const Equilibrium& admissible_state() const;
};

StabilityReport check_stability(const Scenario& s, Subsystem A,
                                   const EquilibriumOptions& opt = {});

/// F(A)_l = sum_{j in A} psi_l(j) u*_{A,j}. Throws the stability failure.
std::vector<double> equilibrium_F(const Scenario& s, Subsystem A,
                                  const EquilibriumOptions& opt = {});

struct RelaxResult {
  std::vector<double> times;
  std::vector<std::vector<double>> u;  // full length |E|
  std::vector<double> target;
  double hitting_time = 0.0;
};

/// Integrates u_i' = u_i R_i(v) on A from u0 (full length, positive on A)
/// until |u - u*_A| < rho. Throws TimeoutNoConvergence past t_cap.
RelaxResult relax(const Scenario& s, Subsystem A, const std::vector<double>& u0, double rho,
                  const EquilibriumOptions& opt = {});

/// Same, towards an explicitly supplied target.
RelaxResult relax_to(const Scenario& s, Subsystem A, const std::vector<double>& u0,
                     const std::vector<double>& target, double rho, double t_cap);

/// d/dt of L(u) = 1/2 sum c_i psi_i(j) u_i u_j - sum c_i r_i u_i along the
/// dynamics. Throws WrongFamily unless the model is Lotka-Volterra.
double lyapunov_rate(const Scenario& s, const std::vector<double>& u);
double lyapunov_value(const Scenario& s, const std::vector<double>& u);

/// Per-subset stability results for one scenario. Lookups are shared;
/// each subset is computed at most once and never overwritten.
class EquilibriumCache {
 public:
  explicit EquilibriumCache(const Scenario& s, EquilibriumOptions opt = {});

  /// Report for A (computed on first use).
  std::shared_ptr<const StabilityReport> report(Subsystem A);
  /// F(A); throws the stability failure for A.
  const std::vector<double>& F(Subsystem A);

  std::size_t size() const;

 private:
  const Scenario& s_;
  EquilibriumOptions opt_;
  mutable std::shared_mutex mu_;
  std::map<Subsystem, std::shared_ptr<const StabilityReport>> reports_;
  std::map<Subsystem, std::vector<double>> f_;
};

std::string equilibria_csv(const Scenario& s, const std::vector<Subsystem>& subsets,
                           const EquilibriumOptions& opt = {});

}  // namespace wkb
