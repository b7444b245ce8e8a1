#include "wkblab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"

namespace wkb {

std::size_t JumpPath::state_at(double t) const {
  std::size_t st = start;
  for (const auto& [time, next] : jumps) {
    if (time > t) break;
    st = next;
  }
  return st;
}

void validate_path(const JumpPath& path, std::size_t traits) {
  if (path.start >= traits) throw Error(ErrorCode::InvalidArgument, "path start out of range");
  if (!(path.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "path horizon must be positive");
  std::size_t prev_state = path.start;
  double prev_time = 0.0;
  for (const auto& [time, next] : path.jumps) {
    if (next >= traits) throw Error(ErrorCode::InvalidArgument, "path state out of range");
    if (next == prev_state) throw Error(ErrorCode::InvalidArgument, "path jumps to its own state");
    if (!(time > prev_time) || time > path.horizon)
      throw Error(ErrorCode::InvalidArgument, "jump times must increase within (0, horizon]");
    prev_state = next;
    prev_time = time;
  }
}

double path_rate(const JumpPath& path, const MutationCosts& costs) {
  validate_path(path, costs.size());
  double total = 0.0;
  std::size_t cur = path.start;
  for (const auto& [time, next] : path.jumps) {
    total += costs(cur, next);
    cur = next;
  }
  return total;
}

DpGrid dp_solve(const Scenario& s, double t_max, double dt, EquilibriumCache& cache,
                const DpOptions& opt) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  if (!(dt > 0.0) || dt > 1e-2) throw Error(ErrorCode::InvalidArgument, "dt must lie in (0, 1e-2]");
  const std::size_t n = s.size();
  const auto& costs = s.costs();

  DpGrid g;
  g.steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  g.dt = t_max / static_cast<double>(g.steps);
  g.traits = n;
  g.W.resize((g.steps + 1) * n);
  g.back.resize(g.steps * n);
  g.rates.resize(g.steps * n);
  g.zero.resize(g.steps);
  g.initial_h = s.h().values();
  g.initial_from.assign(n, -1);

  // Terminal condition, with the same arithmetic as initial_value().
  for (std::size_t i = 0; i < n; ++i) {
    double best = -s.h()(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double cand = -s.h()(j) - costs(i, j);
      if (cand > best) {
        best = cand;
        g.initial_from[i] = static_cast<std::int32_t>(j);
      }
    }
    g.W[i] = best;
  }

  const double drift_tol = g.dt * s.bounds().rate_bound + 1e-12;
  for (std::size_t k = 0; k < g.steps; ++k) {
    const double* Wk = &g.W[k * n];
    double* Wn = &g.W[(k + 1) * n];
    const std::span<const double> row(Wk, n);
    const double mx = *std::max_element(row.begin(), row.end());
    if (std::abs(mx) > drift_tol) {
      std::ostringstream os;
      os << "max_i W = " << mx << " at t=" << g.time(k) << " exceeds " << drift_tol;
      throw Error(ErrorCode::MaxDrift, os.str());
    }
    Subsystem A = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (Wk[i] >= -opt.tol) A |= Subsystem{1} << i;
    g.zero[k] = A;
    const auto& F = cache.F(A);
    double* rho = &g.rates[k * n];
    for (std::size_t i = 0; i < n; ++i) rho[i] = s.rate(i, F);
    for (std::size_t i = 0; i < n; ++i) {
      double best = Wk[i] + g.dt * rho[i];
      std::int32_t from = -1;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !std::isfinite(costs(i, j))) continue;
        const double cand = Wk[j] - costs(i, j) + g.dt * rho[j];
        if (cand > best) {
          best = cand;
          from = static_cast<std::int32_t>(j);
        }
      }
      Wn[i] = best;
      g.back[k * n + i] = from;
    }
  }
  const std::span<const double> last(&g.W[g.steps * n], n);
  const double mx = *std::max_element(last.begin(), last.end());
  if (std::abs(mx) > drift_tol) {
    std::ostringstream os;
    os << "max_i W = " << mx << " at t=" << g.time(g.steps) << " exceeds " << drift_tol;
    throw Error(ErrorCode::MaxDrift, os.str());
  }
  return g;
}

DpGrid dp_solve(const Scenario& s, double t_max, double dt, const DpOptions& opt) {
  EquilibriumCache cache(s, opt.equilibrium);
  return dp_solve(s, t_max, dt, cache, opt);
}

namespace {

std::size_t row_of(const DpGrid& g, double t) {
  const double x = t / g.dt;
  const double k = std::round(x);
  if (std::abs(x - k) > 1e-6 || k < 0 || k > static_cast<double>(g.steps))
    throw Error(ErrorCode::InvalidArgument, "time is not on the DP grid");
  return static_cast<std::size_t>(k);
}

}  // namespace

JumpPath optimal_path(const DpGrid& g, double t, std::size_t i) {
  if (i >= g.traits) throw Error(ErrorCode::InvalidArgument, "trait out of range");
  const std::size_t K = row_of(g, t);
  JumpPath p;
  p.start = i;
  p.horizon = g.time(K);
  if (K == 0) {
    // Zero horizon: only the terminal correction could apply, and a path of
    // zero length has no room for it.
    p.horizon = 0.0;
    return p;
  }
  std::size_t cur = i;
  for (std::size_t k = K; k >= 1; --k) {
    const auto from = g.backpointer(k, cur);
    if (from >= 0) {
      const double when = (static_cast<double>(K - k) + 0.5) * g.dt;
      cur = static_cast<std::size_t>(from);
      p.jumps.emplace_back(when, cur);
    }
  }
  if (g.initial_from[cur] >= 0)
    p.jumps.emplace_back(p.horizon, static_cast<std::size_t>(g.initial_from[cur]));
  return p;
}

double path_objective(const DpGrid& g, const JumpPath& path, const MutationCosts& costs) {
  validate_path(path, g.traits);
  const std::size_t K = row_of(g, path.horizon);
  const double t = path.horizon;
  // State on each grid row: row k sits at path time t - k dt.
  std::vector<std::size_t> st(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double pt = t - g.time(k);
    st[k] = path.state_at(k == 0 ? pt - 0.25 * g.dt : pt);
  }
  const std::size_t last = path.end_state();
  double val = last != st[0] ? -g.initial_h[last] - costs(st[0], last) : -g.initial_h[st[0]];
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t i = st[k + 1];
    const std::size_t j = st[k];
    const double* rho = &g.rates[k * g.traits];
    if (i == j) val = val + g.dt * rho[i];
    else val = val - costs(i, j) + g.dt * rho[j];
  }
  return val;
}

std::string dp_grid_csv(const DpGrid& g, const Scenario& s) {
  std::string out = csv::row({"t", "trait", "W"});
  for (std::size_t k = 0; k <= g.steps; ++k)
    for (std::size_t i = 0; i < g.traits; ++i)
      out += csv::row({csv::num(g.time(k)), s.traits().label(i), csv::num(g.value(k, i))});
  return out;
}

std::string jump_path_csv(const JumpPath& p, const Scenario& s) {
  std::string out = csv::row({"leg", "state", "entry_time"});
  out += csv::row({"0", s.traits().label(p.start), csv::num(0.0)});
  for (std::size_t k = 0; k < p.jumps.size(); ++k)
    out += csv::row({std::to_string(k + 1), s.traits().label(p.jumps[k].second),
                     csv::num(p.jumps[k].first)});
  return out;
}

}  // namespace wkb
