#include "wkblab/montecarlo.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/error.hpp"

namespace wkb {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix(splitmix(seed) ^ splitmix(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix(key_ ^ splitmix(counter_++ * 0xD1B54A32D192ED03ULL));
}

double CounterRng::uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double CounterRng::exponential(double rate) { return -std::log(uniform()) / rate; }

namespace {

// Walks one path of the chain; `visit(time, state)` is called per jump.
template <class Visit>
void walk(const MutationCosts& costs, double eps, std::size_t i0, double t, CounterRng& rng,
          Visit&& visit) {
  const std::size_t n = costs.size();
  std::size_t cur = i0;
  double now = 0.0;
  for (;;) {
    const double c = costs.total_rate(cur, eps);
    if (!(c > 0.0)) return;
    now += rng.exponential(c);
    if (now > t) return;
    double target = rng.uniform() * c;
    std::size_t next = cur;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = costs.rate(cur, j, eps);
      if (r <= 0.0) continue;
      next = j;
      if (target <= r) break;
      target -= r;
    }
    cur = next;
    visit(now, cur);
  }
}

}  // namespace

std::vector<JumpProcessSample> sample_paths(const MutationCosts& costs, double eps, std::size_t i0,
                                            double t, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (i0 >= costs.size()) throw Error(ErrorCode::InvalidArgument, "start trait out of range");
  if (!(eps > 0.0) || !(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps and t must be positive");
  std::vector<JumpProcessSample> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto& smp = out[k];
    smp.stream = k;
    smp.path.start = i0;
    smp.path.horizon = t;
    CounterRng rng(seed, k);
    walk(costs, eps, i0, t, rng, [&](double when, std::size_t st) {
      smp.path.jumps.emplace_back(when, st);
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// ResourceSchedule

ResourceSchedule::ResourceSchedule(std::vector<double> times, std::vector<std::vector<double>> values)
    : times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || times_.size() != values_.size())
    throw Error(ErrorCode::InvalidArgument, "schedule needs matching nonempty times and values");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "schedule times must increase strictly");
    if (values_[k].size() != values_[0].size())
      throw Error(ErrorCode::DimensionMismatch, "schedule values differ in length");
  }
}

ResourceSchedule ResourceSchedule::from_trajectory(const Trajectory& traj) {
  return ResourceSchedule(traj.times, traj.v);
}

bool ResourceSchedule::covers(double t0, double t1) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(t1));
  return times_.front() <= t0 + slack && times_.back() >= t1 - slack;
}

namespace {

std::size_t segment_of(const std::vector<double>& times, double tau) {
  if (times.size() < 2) return 0;
  auto it = std::upper_bound(times.begin(), times.end(), tau);
  std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
  return std::min(k, times.size() - 2);
}

}  // namespace

std::vector<double> ResourceSchedule::at(double tau) const {
  if (times_.size() == 1) return values_[0];
  const std::size_t k = segment_of(times_, tau);
  const double th = (tau - times_[k]) / (times_[k + 1] - times_[k]);
  std::vector<double> v(values_[k].size());
  for (std::size_t l = 0; l < v.size(); ++l)
    v[l] = values_[k][l] + th * (values_[k + 1][l] - values_[k][l]);
  return v;
}

namespace {

// Integral of R_j over [a, b] with v linear between va = v(a) and vb = v(b).
double linear_leg_integral(const Scenario& s, std::size_t j, const std::vector<double>& va,
                           const std::vector<double>& vb, double L) {
  if (L <= 0.0) return 0.0;
  const auto& fam = s.model().family();
  if (const auto* ch = std::get_if<Chemostat>(&fam)) {
    double sum = 0.0;
    for (std::size_t l = 0; l < va.size(); ++l) {
      const double p = 1.0 + va[l];
      const double q = (vb[l] - va[l]) / p;
      const double f = std::abs(q) < 1e-8 ? 1.0 - 0.5 * q + q * q / 3.0 : std::log1p(q) / q;
      sum += ch->alpha[l] * s.weights()(l, j) * (L / p) * f;
    }
    return -ch->d[j] * L + ch->c[j] * sum;
  }
  // Affine in v: the trapezoid rule is exact.
  std::vector<double> mid(va.size());
  for (std::size_t l = 0; l < va.size(); ++l) mid[l] = 0.5 * (va[l] + vb[l]);
  return s.rate(j, mid) * L;
}

}  // namespace

double integrate_rate(const Scenario& s, const ResourceSchedule& sched, std::size_t trait,
                      double tau0, double tau1) {
  if (tau1 <= tau0) return 0.0;
  const auto& T = sched.times();
  if (T.size() == 1) return s.rate(trait, sched.values()[0]) * (tau1 - tau0);
  double total = 0.0;
  double a = tau0;
  std::size_t k = segment_of(T, a);
  while (a < tau1) {
    const double b = (k + 1 < T.size() - 1) ? std::min(tau1, T[k + 1]) : tau1;
    total += linear_leg_integral(s, trait, sched.at(a), sched.at(b), b - a);
    a = b;
    ++k;
  }
  return total;
}

FkEstimate fk_estimate(const Scenario& s, const ResourceSchedule& sched, double eps, double t,
                       std::size_t i, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  if (i >= s.size()) throw Error(ErrorCode::InvalidArgument, "trait out of range");
  if (!(eps > 0.0) || !(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps and t must be positive");
  if (!sched.covers(0.0, t)) {
    std::ostringstream os;
    os << "schedule covers [" << sched.times().front() << ", " << sched.times().back()
       << "], need [0, " << t << "]";
    throw Error(ErrorCode::ScheduleGap, os.str());
  }
  if (sched.values()[0].size() != s.resources())
    throw Error(ErrorCode::DimensionMismatch, "schedule has the wrong number of resources");

  // Cumulative integrals at the knots make whole-segment legs O(1).
  const auto& T = sched.times();
  const std::size_t n_tr = s.size();
  std::vector<std::vector<double>> cum(n_tr, std::vector<double>(T.size(), 0.0));
  for (std::size_t j = 0; j < n_tr; ++j)
    for (std::size_t k = 1; k < T.size(); ++k)
      cum[j][k] = cum[j][k - 1] +
                  linear_leg_integral(s, j, sched.values()[k - 1], sched.values()[k], T[k] - T[k - 1]);
  auto primitive = [&](std::size_t j, double tau) {
    if (T.size() == 1) return s.rate(j, sched.values()[0]) * (tau - T[0]);
    const std::size_t k = segment_of(T, tau);
    return cum[j][k] + linear_leg_integral(s, j, sched.values()[k], sched.at(tau), tau - T[k]);
  };

  std::vector<double> lw(n);
  for (std::size_t k = 0; k < n; ++k) {
    CounterRng rng(seed, k);
    // Legs in path time [a, b) map to schedule time [t - b, t - a].
    double a = 0.0;
    std::size_t cur = i;
    double integral = 0.0;
    walk(s.costs(), eps, i, t, rng, [&](double when, std::size_t st) {
      integral += primitive(cur, t - a) - primitive(cur, t - when);
      a = when;
      cur = st;
    });
    integral += primitive(cur, t - a) - primitive(cur, 0.0);
    lw[k] = (-s.h()(cur) + integral) / eps;
  }

  // Mean and variance of exp(lw) in scaled form.
  const double m = *std::max_element(lw.begin(), lw.end());
  double s1 = 0.0, s2 = 0.0;
  for (double x : lw) {
    const double e = std::exp(x - m);
    s1 += e;
    s2 += e * e;
  }
  const double dn = static_cast<double>(n);
  FkEstimate est;
  est.n = n;
  est.log_estimate = m + std::log(s1 / dn);
  est.estimate = std::exp(est.log_estimate);
  if (n > 1) {
    const double var = std::max(0.0, (s2 - s1 * s1 / dn) / (dn - 1.0));
    est.std_error = std::exp(m) * std::sqrt(var / dn);
  }
  return est;
}

// ---------------------------------------------------------------------------
// LDP balls

namespace {

// log of int_a^b exp(-k x) dx for a < b.
double log_exp_integral(double k, double a, double b) {
  const double L = b - a;
  if (!(L > 0.0)) return -kInf;
  const double kl = k * L;
  const double factor = std::abs(kl) < 1e-12 ? L : -std::expm1(-kl) / k;
  return -k * a + std::log(factor);
}

double exp_integral(double k, double a, double b) {
  if (!(b > a)) return 0.0;
  const double L = b - a;
  const double kl = k * L;
  const double factor = std::abs(kl) < 1e-12 ? L : -std::expm1(-kl) / k;
  return std::exp(-k * a) * factor;
}

double ball_log_probability(const MutationCosts& costs, double eps, const JumpPath& phi,
                            double delta) {
  const double t = phi.horizon;
  const auto N = phi.jumps.size();
  std::vector<std::size_t> st{phi.start};
  for (const auto& j : phi.jumps) st.push_back(j.second);
  std::vector<double> c(st.size());
  for (std::size_t k = 0; k < st.size(); ++k) c[k] = costs.total_rate(st[k], eps);
  double log_r = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const double cost = costs(st[k], st[k + 1]);
    if (!std::isfinite(cost)) return -kInf;
    log_r -= cost / eps;
  }
  auto window = [&](std::size_t k) {
    const double s = phi.jumps[k].first;
    return std::pair{std::max(0.0, s - delta), std::min(t, s + delta)};
  };
  if (N == 0) return -c[0] * t;
  if (N == 1) {
    const auto [a, b] = window(0);
    // int_a^b e^{-c0 x} e^{-c1 (t - x)} dx
    return log_r - c[1] * t + log_exp_integral(c[0] - c[1], a, b);
  }
  const auto [a1, b1] = window(0);
  const auto [a2, b2] = window(1);
  // Inner: int_{max(a2, x)}^{b2} e^{-c1 (y - x)} e^{-c2 (t - y)} dy, closed form.
  auto inner = [&](double x) {
    const double lo = std::max(a2, x);
    if (!(b2 > lo)) return 0.0;
    return std::exp(c[1] * x - c[2] * t) * exp_integral(c[1] - c[2], lo, b2);
  };
  auto outer = [&](double x) { return std::exp(-c[0] * x) * inner(x); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  const double hi = std::min(b1, b2);
  if (hi > a1) {
    const double kink = std::clamp(a2, a1, hi);
    if (kink > a1) total += GK::integrate(outer, a1, kink, 15, 1e-14);
    if (hi > kink) total += GK::integrate(outer, kink, hi, 15, 1e-14);
  }
  if (!(total > 0.0)) return -kInf;
  return log_r + std::log(total);
}

}  // namespace

std::vector<LdpRow> ldp_point_check(const MutationCosts& costs, const std::vector<double>& eps_list,
                                    const JumpPath& phi, double delta) {
  validate_path(phi, costs.size());
  if (phi.jumps.size() > 2) {
    std::ostringstream os;
    os << "path has " << phi.jumps.size() << " jumps; exact quadrature covers at most 2";
    throw Error(ErrorCode::TooManyJumps, os.str());
  }
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  std::vector<LdpRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const double lp = ball_log_probability(costs, eps, phi, delta);
    rows.push_back({eps, lp, eps * lp});
  }
  return rows;
}

double ldp_slope(const std::vector<LdpRow>& rows) {
  if (rows.size() < 2) throw Error(ErrorCode::InvalidArgument, "slope needs at least two rows");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    const double x = 1.0 / r.eps;
    sx += x;
    sy += r.log_p;
    sxx += x * x;
    sxy += x * r.log_p;
  }
  const double n = static_cast<double>(rows.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

JumpTail jump_tail(const MutationCosts& costs, double eps, double t, std::size_t i0, std::size_t N,
                   std::size_t n_samples, std::uint64_t seed) {
  if (i0 >= costs.size()) throw Error(ErrorCode::InvalidArgument, "start trait out of range");
  JumpTail out;
  out.n = n_samples;
  if (N == 0) return out;
  // (K^N 1)_{i0} with K_ij = exp(-cost(i,j)/eps), i != j.
  const std::size_t n = costs.size();
  std::vector<double> vec(n, 1.0), nxt(n);
  for (std::size_t step = 0; step < N; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += costs.rate(i, j, eps) * vec[j];
      nxt[i] = s;
    }
    vec.swap(nxt);
  }
  out.bound = std::exp(static_cast<double>(N) * std::log(t) - std::lgamma(static_cast<double>(N) + 1.0)) *
              vec[i0];
  if (n_samples == 0) {
    out.sampled = std::nan("");
    return out;
  }
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    CounterRng rng(seed, k);
    std::size_t jumps = 0;
    walk(costs, eps, i0, t, rng, [&](double, std::size_t) { ++jumps; });
    if (jumps >= N) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(n_samples);
  out.sampled = p;
  out.sampled_se = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  return out;
}

}  // namespace wkb
