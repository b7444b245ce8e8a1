#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace wkb {

/// Polynomial sum_k coef[k] x^k; the empty polynomial is 0.
struct Polynomial {
  std::vector<double> coef;

  double operator()(double x) const;
  Polynomial derivative() const;
  bool operator==(const Polynomial&) const = default;
};

/// Continuous-trait model on the line: R(x, v) = base(x) - sum_l uptake_l v_l
/// with uptake_l > 0, weights psi_l(x) > 0 and initial exponent h(x).
struct PdeModel {
  Polynomial base;
  std::vector<double> uptake;
  std::vector<Polynomial> psi;
  Polynomial h;
  std::optional<double> v_min;  // declared bounds override the derived ones
  std::optional<double> v_max;

  std::size_t resources() const noexcept { return uptake.size(); }
  double rate(double x, const std::vector<double>& v) const;
  bool operator==(const PdeModel&) const = default;
};

/// Constants of the standing assumptions resolved on a grid [-L, L].
struct PdeBounds {
  double A = 1.0;
  std::optional<double> v_min;
  std::optional<double> v_max;
  double psi_min = 0.0;
  double psi_max = 0.0;
  std::vector<double> psi_w2inf;  // sup|psi_l| + sup|psi_l'| + sup|psi_l''| per resource
};

PdeBounds pde_bounds(const PdeModel& m, double L, double dx);

struct PdeGrid {
  std::vector<double> x;
  std::vector<double> weight;  // trapezoid weights; one cell of width dx when L = 0

  std::size_t size() const noexcept { return x.size(); }
};

PdeGrid make_grid(double L, double dx);

struct PdeOptions {
  double dt_out = 0.01;
  bool diffusion = true;  // test hook: off reduces each cell to an ODE
  bool check_initial_mass = true;
  double escape_fraction = 1e-6;
};

struct FieldHistory {
  double eps = 0.0;
  double L = 0.0;
  double dx = 0.0;
  double dt = 0.0;  // step actually used
  PdeGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> u;  // per snapshot, per grid point
  std::vector<std::vector<double>> v;  // per snapshot, per resource
  std::vector<double> mass;
};

/// Lie splitting: implicit (eps/2) Laplacian with no-flux ends, then
/// u <- u exp(dt R(x, v) / eps) with v frozen at the step start. dt must not
/// exceed eps dx; it is shrunk so that dt_out is a whole number of steps.
FieldHistory simulate_pde(const PdeModel& m, double eps, double t_max, double L, double dx,
                          double dt, const PdeOptions& opt = {});

struct ResourceBoundRow {
  double t = 0.0;
  std::vector<double> lower_margin;  // v_l - (v_min - slack_l)
  std::vector<double> upper_margin;  // (v_max + slack_l) - v_l
  double norm1_lower = 0.0;
  double norm1_upper = 0.0;
  double mass_lower = 0.0;
  double mass_upper = 0.0;
  bool ok = true;
};

/// Bounds on v and on the total mass, widened by the slack
/// A eps^2 |psi_l|_{W2inf} / psi_min. The tighter A eps^2 psi_min / |psi_l|_{W2inf}
/// is reported as alternate_slack and not checked.
struct ResourceBoundReport {
  std::vector<double> slack;
  std::vector<double> alternate_slack;
  double tolerance = 1e-6;
  std::vector<ResourceBoundRow> rows;
  std::optional<std::size_t> first_violation;
  bool vacuous = false;  // no v_min / v_max available
  double min_margin = 0.0;

  bool passed() const noexcept { return !first_violation.has_value(); }
};

ResourceBoundReport check_resource_bounds(const FieldHistory& hist, const PdeBounds& bounds);

struct WkbTrack {
  std::vector<std::vector<double>> w;
  std::vector<double> max_w;
  std::vector<double> argmax_x;
  double lipschitz_x = 0.0;  // max over snapshots of |dw/dx| by differences
  double lipschitz_t = 0.0;  // max over grid points of |dw/dt| between snapshots
};

WkbTrack wkb_extract(const FieldHistory& hist);

/// t, x, u, w
std::string pde_snapshots_csv(const FieldHistory& hist);
/// t, v_1..v_r, mass, max_w, argmax_x
std::string pde_diagnostics_csv(const FieldHistory& hist);

}  // namespace wkb
