#include "wkblab/hj.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"

namespace wkb {

InitialValue initial_value(const InitialExponent& h, const MutationCosts& costs) {
  const std::size_t n = h.size();
  if (costs.size() != n) throw Error(ErrorCode::DimensionMismatch, "h and costs differ in size");
  InitialValue iv;
  iv.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = -h(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double cand = -h(j) - costs(i, j);
      if (cand > best) {
        best = cand;
        iv.compatible = false;
      }
    }
    iv.values[i] = best;
  }
  return iv;
}

Subsystem zero_set(std::span<const double> values, double tol, double max_tol) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "empty value vector");
  if (values.size() > kMaxTraitsForSubsets)
    throw Error(ErrorCode::EnumerationCap, "more than 64 traits");
  const double mx = *std::max_element(values.begin(), values.end());
  if (mx > max_tol || mx < -max_tol) {
    std::ostringstream os;
    os << "max_i V = " << mx << " is not within " << max_tol << " of zero";
    throw Error(ErrorCode::MaxNotZero, os.str());
  }
  Subsystem a = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] >= -tol) a |= Subsystem{1} << i;
  return a;
}

Subsystem active_set(std::span<const double> values, std::size_t i, const MutationCosts& costs,
                     double tol) {
  Subsystem a = Subsystem{1} << i;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j == i || !std::isfinite(costs(i, j))) continue;
    if (std::abs(values[j] - costs(i, j) - values[i]) <= tol) a |= Subsystem{1} << j;
  }
  return a;
}

const char* to_string(EventKind k) noexcept {
  return k == EventKind::ZeroSetChange ? "ZeroSetChange" : "ActiveSetChange";
}

// ---------------------------------------------------------------------------
// ValueFunction

ValueFunction::ValueFunction(std::vector<HjSegment> segments, std::vector<double> initial_raw)
    : segments_(std::move(segments)), initial_raw_(std::move(initial_raw)) {}

std::vector<double> ValueFunction::breakpoints() const {
  std::vector<double> out;
  for (const auto& seg : segments_) out.push_back(seg.t0);
  if (!segments_.empty()) out.push_back(segments_.back().t1);
  return out;
}

double ValueFunction::operator()(double t, std::size_t i) const {
  if (segments_.empty()) throw Error(ErrorCode::InvalidArgument, "empty value function");
  t = std::clamp(t, 0.0, t_max());
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double x, const HjSegment& s) { return x < s.t0; });
  const auto& seg = *(it == segments_.begin() ? it : std::prev(it));
  return seg.start[i] + seg.slope[i] * (t - seg.t0);
}

std::vector<double> ValueFunction::values(double t) const {
  std::vector<double> out(traits());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(t, i);
  return out;
}

// ---------------------------------------------------------------------------
// evolve_hj

namespace {

std::vector<std::size_t> changed(Subsystem a, Subsystem b) { return members(a ^ b); }

}  // namespace

HjResult evolve_hj(const Scenario& s, double t_max, EquilibriumCache& cache,
                   const HjOptions& opt) {
  if (!(t_max > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_max must be positive");
  const std::size_t n = s.size();
  if (n > kMaxTraitsForSubsets) throw Error(ErrorCode::EnumerationCap, "more than 64 traits");
  const auto& costs = s.costs();

  auto iv = initial_value(s.h(), costs);
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = -s.h()(i);

  HjResult res;
  res.compatible = iv.compatible;
  std::vector<HjSegment> segs;

  std::vector<double> V = iv.values;
  double t = 0.0;
  Subsystem prev_zero = zero_set(V, opt.tol, 1e-6);
  std::vector<Subsystem> prev_active(n);
  for (std::size_t i = 0; i < n; ++i) prev_active[i] = active_set(V, i, costs, opt.tol);

  const double gamma = costs.gamma();
  const double event_cap =
      static_cast<double>(n) *
      ((std::isfinite(gamma) ? t_max * s.bounds().M / gamma : 0.0) + static_cast<double>(n));
  std::size_t zero_streak = 0;

  std::vector<double> rho(n), slope(n);
  std::vector<Subsystem> act(n), eff(n);
  while (t < t_max) {
    // Zero set, settled so that no member has a strictly negative rate.
    Subsystem Z = zero_set(V, opt.tol, 1e-6);
    std::vector<double> F;
    for (;;) {
      F = cache.F(Z);
      for (std::size_t j = 0; j < n; ++j) {
        rho[j] = s.rate(j, F);
        if (std::abs(rho[j]) <= opt.slope_tol) rho[j] = 0.0;
      }
      Subsystem drop = 0;
      for (auto i : members(Z))
        if (rho[i] < 0.0) drop |= Subsystem{1} << i;
      if (drop == 0) break;
      Z &= ~drop;
      if (Z == 0) throw Error(ErrorCode::MaxNotZero, "zero set emptied while settling");
    }
    for (auto i : members(Z)) {
      if (rho[i] > 0.0) {
        std::ostringstream os;
        os << "trait " << s.traits().label(i) << " in the zero set has rate " << rho[i]
           << " > 0 at t=" << t;
        throw Error(ErrorCode::MaxNotZero, os.str());
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (contains(Z, i)) {
        act[i] = Subsystem{1} << i;
        slope[i] = 0.0;
        continue;
      }
      act[i] = active_set(V, i, costs, opt.tol);
      double best = -kInf;
      for (auto j : members(act[i])) best = std::max(best, rho[j]);
      slope[i] = best;
    }
    for (std::size_t i = 0; i < n; ++i) {
      eff[i] = Subsystem{1} << i;
      for (auto j : members(act[i]))
        if (j != i && slope[i] - slope[j] <= opt.slope_tol) eff[i] |= Subsystem{1} << j;
    }

    // Events at this breakpoint: zero set first, then active sets by trait.
    if (Z != prev_zero) {
      res.events.push_back({t, EventKind::ZeroSetChange, changed(prev_zero, Z), prev_zero, Z, F});
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (eff[i] != prev_active[i])
        res.events.push_back({t, EventKind::ActiveSetChange, {i}, prev_active[i], eff[i], F});
    }
    if (static_cast<double>(res.events.size()) > event_cap) {
      std::ostringstream os;
      os << "event count " << res.events.size() << " exceeds the guard " << event_cap
         << " at t=" << t;
      throw Error(ErrorCode::EventStall, os.str());
    }

    // Earliest next event in closed form.
    double dt = t_max - t;
    for (std::size_t i = 0; i < n; ++i)
      if (!contains(Z, i) && slope[i] > opt.slope_tol) dt = std::min(dt, -V[i] / slope[i]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !std::isfinite(costs(i, j)) || contains(act[i], j)) continue;
        const double dg = slope[i] - slope[j];
        if (dg < -opt.slope_tol) {
          const double g = V[i] - V[j] + costs(i, j);
          dt = std::min(dt, std::max(g, 0.0) / -dg);
        }
      }
    }
    dt = std::max(dt, 0.0);

    HjSegment seg;
    seg.t0 = t;
    seg.t1 = t + dt;
    seg.start = V;
    seg.slope = slope;
    seg.zero = Z;
    seg.F = F;
    seg.active = eff;
    segs.push_back(std::move(seg));

    std::vector<double> Vn(n);
    for (std::size_t i = 0; i < n; ++i) Vn[i] = V[i] + slope[i] * dt;
    // Snap every event landing at this time onto its exact value.
    const double snap = 1e-12 * std::max(1.0, t_max);
    for (std::size_t i = 0; i < n; ++i) {
      if (contains(Z, i)) Vn[i] = 0.0;
      else if (slope[i] > opt.slope_tol && std::abs(-V[i] / slope[i] - dt) <= snap) Vn[i] = 0.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || !std::isfinite(costs(i, j)) || contains(act[i], j)) continue;
        const double dg = slope[i] - slope[j];
        if (dg < -opt.slope_tol) {
          const double g = V[i] - V[j] + costs(i, j);
          if (std::abs(std::max(g, 0.0) / -dg - dt) <= snap) Vn[i] = Vn[j] - costs(i, j);
        }
      }
    }
    V = std::move(Vn);

    zero_streak = dt <= snap ? zero_streak + 1 : 0;
    if (zero_streak > 4 * n + 4) {
      std::ostringstream os;
      os << "events cannot be ordered at t=" << t << "; V =";
      for (double x : V) os << ' ' << x;
      throw Error(ErrorCode::EventStall, os.str());
    }
    prev_zero = Z;
    prev_active = eff;
    t = (t_max - (t + dt) <= snap) ? t_max : t + dt;
  }
  if (!segs.empty()) segs.back().t1 = t_max;
  res.vf = ValueFunction(std::move(segs), std::move(raw));
  return res;
}

HjResult evolve_hj(const Scenario& s, double t_max, const HjOptions& opt) {
  EquilibriumCache cache(s, opt.equilibrium);
  return evolve_hj(s, t_max, cache, opt);
}

// ---------------------------------------------------------------------------
// check_structure

StructureReport check_structure(const ValueFunction& vf, const Scenario& s) {
  StructureReport rep;
  const std::size_t n = s.size();
  const auto& costs = s.costs();
  const double M = s.bounds().M;
  rep.slope_bound = M + s.bounds().rate_bound;
  const auto& segs = vf.segments();
  if (segs.empty()) {
    rep.failures.push_back("empty value function");
    rep.lipschitz = false;
    return rep;
  }

  auto fail = [&](bool& flag, const std::string& what) {
    if (flag) rep.failures.push_back(what);
    flag = false;
  };

  std::vector<double> times;
  for (const auto& seg : segs) {
    times.push_back(seg.t0);
    times.push_back(0.5 * (seg.t0 + seg.t1));
  }
  times.push_back(vf.t_max());

  for (double t : times) {
    const auto V = vf.values(t);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j || !std::isfinite(costs(i, j))) continue;
        const double gap = V[i] - V[j] + costs(i, j);
        rep.worst_cost_gap = std::min(rep.worst_cost_gap, gap);
        if (gap < -1e-9) {
          std::ostringstream os;
          os << "cost inequality fails at t=" << t << " for (" << s.traits().label(i) << ", "
             << s.traits().label(j) << "): gap " << gap;
          fail(rep.cost_inequality, os.str());
        }
      }
    const double mx = *std::max_element(V.begin(), V.end());
    rep.worst_max_zero = std::max(rep.worst_max_zero, std::abs(mx));
    if (std::abs(mx) > 1e-6) {
      std::ostringstream os;
      os << "max_i V = " << mx << " at t=" << t;
      fail(rep.max_zero, os.str());
    }
  }

  for (std::size_t k = 0; k < segs.size(); ++k) {
    for (double sl : segs[k].slope) rep.max_slope = std::max(rep.max_slope, std::abs(sl));
    if (k + 1 < segs.size()) {
      const double dt = segs[k].t1 - segs[k].t0;
      for (std::size_t i = 0; i < n; ++i) {
        const double end = segs[k].start[i] + segs[k].slope[i] * dt;
        const double jump = std::abs(end - segs[k + 1].start[i]);
        if (jump > 1e-9 * (1.0 + std::abs(end))) {
          std::ostringstream os;
          os << "V(., " << s.traits().label(i) << ") jumps by " << jump << " at t="
             << segs[k + 1].t0;
          fail(rep.lipschitz, os.str());
        }
      }
    }
  }
  if (rep.max_slope > rep.slope_bound) {
    std::ostringstream os;
    os << "slope " << rep.max_slope << " exceeds the bound " << rep.slope_bound;
    fail(rep.lipschitz, os.str());
  }

  for (double t : times) {
    const auto V = vf.values(t);
    for (double delta : {1e-3, 1e-2, 1e-1, 1.0}) {
      if (t + delta > vf.t_max()) continue;
      const auto W = vf.values(t + delta);
      for (std::size_t i = 0; i < n; ++i) {
        double base = V[i];
        for (std::size_t j = 0; j < n; ++j)
          if (j != i && std::isfinite(costs(i, j))) base = std::max(base, V[j] - costs(i, j));
        const double excess = std::abs(W[i] - base) - M * delta;
        rep.worst_sandwich = std::max(rep.worst_sandwich, excess);
        if (excess > 1e-9) {
          std::ostringstream os;
          os << "V(" << t + delta << ", " << s.traits().label(i) << ") leaves the band around "
             << base << " by " << excess;
          fail(rep.sandwich, os.str());
        }
      }
    }
  }

  const auto& raw = vf.initial_raw();
  for (std::size_t i = 0; i < n && rep.raw_initial_compatible; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && std::isfinite(costs(i, j)) && raw[i] < raw[j] - costs(i, j) - 1e-9)
        rep.raw_initial_compatible = false;
  return rep;
}

std::string breakpoints_csv(const HjResult& r, const Scenario& s) {
  std::string out = csv::row({"t", "kind", "A_before", "A_after"});
  for (const auto& e : r.events)
    out += csv::row({csv::num(e.time), to_string(e.kind), subsystem_label(s, e.before),
                     subsystem_label(s, e.after)});
  return out;
}

std::string value_function_csv(const ValueFunction& vf, const Scenario& s, double dt_out) {
  if (!(dt_out > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt_out must be positive");
  std::string out = csv::row({"t", "trait", "V"});
  const auto steps = static_cast<std::size_t>(std::floor(vf.t_max() / dt_out + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = std::min(static_cast<double>(k) * dt_out, vf.t_max());
    for (std::size_t i = 0; i < s.size(); ++i)
      out += csv::row({csv::num(t), s.traits().label(i), csv::num(vf(t, i))});
  }
  return out;
}

}  // namespace wkb
