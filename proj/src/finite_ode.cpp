#include "wkblab/finite_ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"

namespace wkb {

MassWindows mass_window(const Scenario& s, double eps) {
  const auto& b = s.bounds();
  const auto& costs = s.costs();
  const double n1 = static_cast<double>(s.size() - 1);
  const double psi_min = s.weights().psi_min();
  const double psi_max = s.weights().psi_max();
  const double eb = std::isfinite(costs.beta()) ? std::exp(-costs.beta() / eps) : 0.0;
  const double eg = std::isfinite(costs.gamma()) ? std::exp(-costs.gamma() / eps) : 0.0;
  MassWindows out;
  if (b.v_min) {
    out.primary.lower = std::max(0.0, (*b.v_min - n1 * eb / b.A) / psi_max);
    out.alternate.lower = std::max(0.0, (*b.v_min - n1 * eg * b.A) / psi_max);
  }
  if (b.v_max) {
    out.primary.upper = (*b.v_max + b.A * n1 * eg) / psi_min;
    out.alternate.upper = (*b.v_max + n1 * eb / b.A) / psi_min;
  }
  return out;
}

namespace {

// Relative signed distance of `mass` inside [lo, hi]; negative when outside.
double window_margin(const MassWindow& win, double mass) {
  double m = kInf;
  if (win.lower > 0.0) m = std::min(m, (mass - win.lower) / win.lower);
  if (std::isfinite(win.upper)) m = std::min(m, (win.upper - mass) / win.upper);
  return m;
}

struct LogSpaceRhs {
  const Scenario& s;
  double eps;
  double clip;
  bool clipped = false;
  std::vector<double> u;
  std::vector<double> v;

  void operator()(double, std::span<const double> w, std::span<double> dw) {
    const std::size_t n = s.size();
    u.resize(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = std::exp(w[i] / eps);
    v = s.resources_of(u);
    const auto& costs = s.costs();
    for (std::size_t i = 0; i < n; ++i) {
      double mut = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double c = costs(i, j);
        if (!std::isfinite(c)) continue;
        double e = (w[j] - w[i] - c) / eps;
        if (e > clip) {
          e = clip;
          clipped = true;
        }
        mut += std::exp(e) - std::exp(-c / eps);
      }
      dw[i] = s.rate(i, v) + eps * mut;
    }
  }
};

}  // namespace

Trajectory simulate_finite(const Scenario& s, double eps, double t_max, double dt_out,
                           const SimulateOptions& opt) {
  if (!(eps > 0.0) || !(t_max > 0.0) || !(dt_out > 0.0))
    throw Error(ErrorCode::InvalidArgument, "eps, t_max and dt_out must be positive");
  const std::size_t n = s.size();

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = -s.h()(i);

  Trajectory traj;
  traj.eps = eps;
  auto store = [&](double t, std::span<const double> wt) {
    std::vector<double> ws(wt.begin(), wt.end());
    std::vector<double> us(n);
    for (std::size_t i = 0; i < n; ++i) us[i] = std::exp(ws[i] / eps);
    traj.times.push_back(t);
    traj.v.push_back(s.resources_of(us));
    traj.u.push_back(std::move(us));
    traj.w.push_back(std::move(ws));
  };
  store(0.0, w);

  if (opt.check_initial_mass) {
    const auto win = mass_window(s, eps);
    double mass = 0.0;
    for (double x : traj.u[0]) mass += x;
    if (window_margin(win.primary, mass) < -1e-6) {
      std::ostringstream os;
      os << "initial mass " << mass << " outside [" << win.primary.lower << ", "
         << win.primary.upper << "] at eps=" << eps;
      throw Error(ErrorCode::InitialMassViolation, os.str());
    }
  }

  const auto n_out = static_cast<std::size_t>(std::floor(t_max / dt_out + 1e-9));
  std::vector<double> grid;
  for (std::size_t k = 1; k <= n_out; ++k) grid.push_back(static_cast<double>(k) * dt_out);
  if (grid.empty() || t_max - grid.back() > 1e-9 * dt_out) grid.push_back(t_max);
  else grid.back() = std::min(grid.back(), t_max);

  LogSpaceRhs rhs{s, eps, opt.clip_exponent, false, {}, {}};
  std::size_t next = 0;
  std::vector<double> buf(n);
  OdeHooks hooks;
  hooks.before_attempt = [&] { rhs.clipped = false; };
  hooks.on_accept = [&](const OdeStep& st) {
    if (rhs.clipped) {
      std::ostringstream os;
      os << "mutation exponent exceeded the clip at t in [" << st.t0 << ", " << st.t1 << "]";
      throw Error(ErrorCode::StepFailure, os.str());
    }
    while (next < grid.size() && grid[next] <= st.t1 + 1e-12) {
      if (grid[next] >= st.t1) store(grid[next], st.y1);
      else {
        hermite(st, grid[next], buf);
        store(grid[next], buf);
      }
      ++next;
    }
    return true;
  };
  integrate_dopri(std::ref(rhs), 0.0, grid.back(), w, opt.ode, hooks);
  return traj;
}

BoundsReport check_mass_bounds(const Trajectory& traj, const Scenario& s, double rel_tol) {
  BoundsReport rep;
  rep.tolerance = rel_tol;
  rep.windows = mass_window(s, traj.eps);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    double mass = 0.0;
    for (double x : traj.u[k]) mass += x;
    const double m = window_margin(rep.windows.primary, mass);
    rep.min_margin = std::min(rep.min_margin, m);
    if (m < -rel_tol && !rep.first_violation) {
      rep.passed = false;
      rep.first_violation = MassViolation{k, traj.times[k], mass, m};
    }
    const double ma = window_margin(rep.windows.alternate, mass);
    if (ma < -rel_tol && !rep.first_alternate_violation) {
      rep.alternate_passed = false;
      rep.first_alternate_violation = MassViolation{k, traj.times[k], mass, ma};
    }
  }
  return rep;
}

std::string trajectory_csv(const Trajectory& traj, const Scenario& s) {
  std::vector<std::string> head{"t", "trait", "u", "w"};
  for (std::size_t l = 0; l < s.resources(); ++l) head.push_back("v_" + std::to_string(l + 1));
  std::string out = csv::row(head);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      std::vector<std::string> cells{csv::num(traj.times[k]), s.traits().label(i),
                                     csv::num(traj.u[k][i]), csv::num(traj.w[k][i])};
      for (double x : traj.v[k]) cells.push_back(csv::num(x));
      out += csv::row(cells);
    }
  }
  return out;
}

}  // namespace wkb
