#include "wkblab/equilibria.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/ode.hpp"

namespace wkb {

Subsystem subsystem_of(std::initializer_list<std::size_t> traits) {
  Subsystem a = 0;
  for (auto i : traits) {
    if (i >= kMaxTraitsForSubsets) throw Error(ErrorCode::InvalidArgument, "trait index too large");
    a |= Subsystem{1} << i;
  }
  return a;
}

Subsystem full_subsystem(std::size_t n) {
  if (n > kMaxTraitsForSubsets) throw Error(ErrorCode::EnumerationCap, "more than 64 traits");
  return n == 64 ? ~Subsystem{0} : ((Subsystem{1} << n) - 1);
}

std::vector<std::size_t> members(Subsystem a) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kMaxTraitsForSubsets; ++i)
    if (contains(a, i)) out.push_back(i);
  return out;
}

std::string subsystem_label(const Scenario& s, Subsystem a) {
  std::string out = "{";
  bool first = true;
  for (auto i : members(a)) {
    if (!first) out += ' ';
    out += i < s.size() ? s.traits().label(i) : std::to_string(i);
    first = false;
  }
  return out + "}";
}

namespace {

void check_subsystem(const Scenario& s, Subsystem A) {
  if (A == 0) throw Error(ErrorCode::InvalidArgument, "subsystem must be nonempty");
  if (s.size() < kMaxTraitsForSubsets && (A >> s.size()) != 0)
    throw Error(ErrorCode::InvalidArgument, "subsystem contains unknown traits");
}

double norm_on(const std::vector<double>& a, const std::vector<double>& b,
               const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (auto i : idx) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// R_i(v(u)) for i in a support, with u zero off the support.
struct SupportSystem {
  const Scenario& s;
  std::vector<std::size_t> idx;

  std::vector<double> full(const Eigen::VectorXd& x) const {
    std::vector<double> u(s.size(), 0.0);
    for (std::size_t k = 0; k < idx.size(); ++k) u[idx[k]] = x[k];
    return u;
  }

  bool eval(const Eigen::VectorXd& x, Eigen::VectorXd& f, Eigen::MatrixXd* jac) const {
    const auto u = full(x);
    const auto v = s.resources_of(u);
    const std::size_t m = idx.size();
    const std::size_t r = s.resources();
    std::vector<double> grad(r);
    f.resize(m);
    if (jac) jac->resize(m, m);
    for (std::size_t a = 0; a < m; ++a) {
      f[a] = s.rate(idx[a], v);
      if (!std::isfinite(f[a])) return false;
      if (jac) {
        s.model().rate_gradient(s.weights(), idx[a], v, grad);
        for (std::size_t b = 0; b < m; ++b) {
          double sum = 0.0;
          for (std::size_t l = 0; l < r; ++l) sum += grad[l] * s.weights()(l, idx[b]);
          (*jac)(a, b) = sum;
        }
      }
    }
    return true;
  }
};

// Damped Newton with minimum-norm steps so that singular (continuum) systems
// still land on a solution.
std::optional<Eigen::VectorXd> newton(const SupportSystem& sys, Eigen::VectorXd x,
                                      std::size_t max_iter) {
  Eigen::VectorXd f, ft;
  Eigen::MatrixXd J;
  if (!sys.eval(x, f, &J)) return std::nullopt;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double fn = f.norm();
    if (f.lpNorm<Eigen::Infinity>() < 1e-13) return x;
    Eigen::VectorXd dx = J.completeOrthogonalDecomposition().solve(-f);
    if (!dx.allFinite()) return std::nullopt;
    double lambda = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      Eigen::VectorXd xt = x + lambda * dx;
      if (sys.eval(xt, ft, nullptr) && ft.norm() < (1.0 - 1e-4 * lambda) * fn) {
        x = xt;
        moved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!moved) {
      if (f.lpNorm<Eigen::Infinity>() < 1e-11) return x;
      return std::nullopt;
    }
    if (!sys.eval(x, f, &J)) return std::nullopt;
  }
  if (f.lpNorm<Eigen::Infinity>() < 1e-11) return x;
  return std::nullopt;
}

// Deterministic multiplier in [0.2, 5) for start q, component k.
double start_multiplier(std::size_t q, std::size_t k) {
  std::uint64_t z = (q + 1) * 0x9E3779B97F4A7C15ULL ^ (k + 7) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 31)) * 0x94D049BB133111EBULL;
  z ^= z >> 29;
  const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
  return 0.2 * std::pow(25.0, unit);
}

}  // namespace

std::vector<std::complex<double>> jacobian_spectrum(const Scenario& s, Subsystem A,
                                                    const std::vector<double>& u) {
  const auto idx = members(A);
  const std::size_t m = idx.size();
  const std::size_t r = s.resources();
  const auto v = s.resources_of(u);
  Eigen::MatrixXd J(m, m);
  std::vector<double> grad(r);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t i = idx[a];
    s.model().rate_gradient(s.weights(), i, v, grad);
    const double Ri = s.rate(i, v);
    for (std::size_t b = 0; b < m; ++b) {
      double sum = 0.0;
      for (std::size_t l = 0; l < r; ++l) sum += grad[l] * s.weights()(l, idx[b]);
      J(a, b) = u[i] * sum + (a == b ? Ri : 0.0);
    }
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  std::vector<std::complex<double>> out(m);
  for (std::size_t k = 0; k < m; ++k) out[k] = es.eigenvalues()[k];
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return out;
}

SteadyStates steady_states(const Scenario& s, Subsystem A, const EquilibriumOptions& opt) {
  check_subsystem(s, A);
  const auto all = members(A);
  if (all.size() > opt.enumeration_cap) {
    std::ostringstream os;
    os << "|A| = " << all.size() << " exceeds the enumeration cap " << opt.enumeration_cap;
    throw Error(ErrorCode::EnumerationCap, os.str());
  }
  const auto& b = s.bounds();
  const double v_mid = 0.5 * (b.window_lo + b.window_hi);

  SteadyStates out;
  out.A = A;
  const std::size_t n = s.size();
  const std::size_t subsets = std::size_t{1} << all.size();

  for (std::size_t code = 0; code < subsets; ++code) {
    Subsystem support = 0;
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < all.size(); ++k)
      if ((code >> k) & 1u) {
        support |= Subsystem{1} << all[k];
        idx.push_back(all[k]);
      }
    std::vector<std::vector<double>> found;
    if (idx.empty()) {
      found.emplace_back(n, 0.0);
    } else {
      SupportSystem sys{s, idx};
      const std::size_t m = idx.size();
      bool any_converged = false;
      for (std::size_t q = 0; q < 8; ++q) {
        Eigen::VectorXd x(m);
        for (std::size_t k = 0; k < m; ++k) {
          double psi_avg = 0.0;
          for (std::size_t l = 0; l < s.resources(); ++l) psi_avg += s.weights()(l, idx[k]);
          psi_avg /= static_cast<double>(s.resources());
          const double base = std::max(v_mid, 1e-3) / (static_cast<double>(m) * psi_avg);
          x[k] = base * (q == 0 ? 1.0 : start_multiplier(q, k));
        }
        auto sol = newton(sys, x, opt.newton_max_iter);
        if (!sol) continue;
        any_converged = true;
        if ((sol->array() <= 0.0).any()) continue;
        auto u = sys.full(*sol);
        bool dup = false;
        for (const auto& g : found)
          if (norm_on(g, u, idx) < opt.dedup_tol * std::max(1.0, sol->norm())) dup = true;
        if (!dup) found.push_back(std::move(u));
      }
      // Supports whose solution lies outside the orthant are skipped silently;
      // supports where no start converged are flagged.
      if (!any_converged) out.newton_failed.push_back(support);
    }
    for (auto& u : found) {
      Equilibrium e;
      e.A = A;
      e.support = support;
      e.v = s.resources_of(u);
      double res = 0.0;
      for (auto i : all) {
        const double Ri = s.rate(i, e.v);
        res = std::max(res, std::abs(u[i] * Ri));
        if (!contains(support, i)) e.off_support_rates.emplace_back(i, Ri);
      }
      e.residual = res;
      e.u_star = std::move(u);
      e.jacobian_spectrum = jacobian_spectrum(s, A, e.u_star);
      e.hyperbolic = std::all_of(e.jacobian_spectrum.begin(), e.jacobian_spectrum.end(),
                                 [&](auto z) { return std::abs(z.real()) >= opt.hyperbolicity_tol; });
      e.admissible = std::all_of(e.off_support_rates.begin(), e.off_support_rates.end(),
                                 [](const auto& p) { return p.second < 0.0; });
      out.states.push_back(std::move(e));
    }
  }
  std::stable_sort(out.states.begin(), out.states.end(),
                   [](const Equilibrium& a, const Equilibrium& b) { return a.support < b.support; });
  return out;
}

const Equilibrium& StabilityReport::admissible_state() const {
  if (admissible.size() != 1)
    throw Error(failure.value_or(ErrorCode::NoAdmissible), detail);
  return states.states[admissible.front()];
}

StabilityReport check_stability(const Scenario& s, Subsystem A, const EquilibriumOptions& opt) {
  StabilityReport rep;
  rep.A = A;
  rep.states = steady_states(s, A, opt);
  const auto label = subsystem_label(s, A);
  for (std::size_t k = 0; k < rep.states.states.size(); ++k) {
    const auto& e = rep.states.states[k];
    if (!e.hyperbolic) rep.all_hyperbolic = false;
    if (e.admissible) rep.admissible.push_back(k);
  }
  rep.unique_admissible = rep.admissible.size() == 1;
  if (!rep.all_hyperbolic) {
    rep.failure = ErrorCode::NonHyperbolic;
    rep.detail = "non-hyperbolic steady state in " + label;
    return rep;
  }
  if (rep.admissible.empty()) {
    rep.failure = ErrorCode::NoAdmissible;
    rep.detail = "no admissible steady state in " + label;
    return rep;
  }
  if (rep.admissible.size() > 1) {
    rep.failure = ErrorCode::MultipleAdmissible;
    rep.detail = std::to_string(rep.admissible.size()) + " admissible steady states in " + label;
    return rep;
  }
  if (!opt.verify_dynamics) return rep;

  // Relaxation from deterministic positive starts must reach u*.
  const auto& target = rep.admissible_state().u_star;
  const auto idx = members(A);
  double sep = kInf;
  for (const auto& e : rep.states.states)
    if (&e != &rep.admissible_state()) sep = std::min(sep, norm_on(e.u_star, target, idx));
  const double rho = std::min(0.05, 0.25 * sep);
  const bool lv = s.model().is_lotka_volterra();
  bool lyap_ok = true;
  double scale = 0.0;
  for (auto i : idx) scale += target[i];
  scale = std::max(scale, 0.1);
  for (std::size_t q = 0; q < 4; ++q) {
    std::vector<double> u0(s.size(), 0.0);
    for (auto i : idx) u0[i] = scale / static_cast<double>(idx.size()) * start_multiplier(q + 11, i);
    try {
      auto rr = relax_to(s, A, u0, target, rho, opt.t_cap);
      if (lv) {
        for (const auto& u : rr.u) {
          double mag = 0.0;
          for (double x : u) mag = std::max(mag, std::abs(x));
          if (lyapunov_rate(s, u) > 1e-12 * std::max(1.0, mag * mag)) lyap_ok = false;
        }
      }
    } catch (const Error& err) {
      rep.failure = err.code();
      rep.detail = "relaxation in " + label + " did not reach the admissible state: " + err.what();
      return rep;
    }
  }
  rep.relaxation_checked = true;
  rep.lyapunov_checked = lv && lyap_ok;
  return rep;
}

std::vector<double> equilibrium_F(const Scenario& s, Subsystem A, const EquilibriumOptions& opt) {
  auto rep = check_stability(s, A, opt);
  if (!rep.passed()) throw Error(*rep.failure, rep.detail);
  return rep.admissible_state().v;
}

RelaxResult relax_to(const Scenario& s, Subsystem A, const std::vector<double>& u0,
                     const std::vector<double>& target, double rho, double t_cap) {
  check_subsystem(s, A);
  const auto idx = members(A);
  const std::size_t n = s.size();
  if (u0.size() != n || target.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "u0 and target must have |E| entries");
  for (auto i : idx)
    if (!(u0[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "u0 must be positive on A");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");

  RelaxResult rr;
  rr.target = target;
  auto restrict = [&](std::vector<double> u) {
    for (std::size_t i = 0; i < n; ++i)
      if (!contains(A, i)) u[i] = 0.0;
    return u;
  };
  auto start = restrict(u0);
  rr.times.push_back(0.0);
  rr.u.push_back(start);
  if (norm_on(start, target, idx) < rho) return rr;

  const std::size_t m = idx.size();
  std::vector<double> z(m);
  for (std::size_t k = 0; k < m; ++k) z[k] = std::log(start[idx[k]]);
  auto to_u = [&](std::span<const double> zz) {
    std::vector<double> u(n, 0.0);
    for (std::size_t k = 0; k < m; ++k) u[idx[k]] = std::exp(zz[k]);
    return u;
  };
  auto rhs = [&](double, std::span<const double> zz, std::span<double> dz) {
    const auto v = s.resources_of(to_u(zz));
    for (std::size_t k = 0; k < m; ++k) dz[k] = s.rate(idx[k], v);
  };
  bool hit = false;
  std::vector<double> buf(m);
  OdeHooks hooks;
  hooks.on_accept = [&](const OdeStep& st) {
    auto u1 = to_u(st.y1);
    if (norm_on(u1, target, idx) >= rho) {
      rr.times.push_back(st.t1);
      rr.u.push_back(std::move(u1));
      return true;
    }
    double lo = st.t0, hi = st.t1;
    for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      hermite(st, mid, buf);
      if (norm_on(to_u(buf), target, idx) < rho) hi = mid;
      else lo = mid;
    }
    hermite(st, hi, buf);
    rr.times.push_back(hi);
    rr.u.push_back(to_u(buf));
    rr.hitting_time = hi;
    hit = true;
    return false;
  };
  OdeOptions oo;
  oo.rtol = 1e-10;
  oo.atol = 1e-12;
  integrate_dopri(rhs, 0.0, t_cap, z, oo, hooks);
  if (!hit) {
    std::ostringstream os;
    os << "no entry into the " << rho << "-ball of the target by t_cap=" << t_cap;
    throw Error(ErrorCode::TimeoutNoConvergence, os.str());
  }
  return rr;
}

RelaxResult relax(const Scenario& s, Subsystem A, const std::vector<double>& u0, double rho,
                  const EquilibriumOptions& opt) {
  EquilibriumOptions o = opt;
  o.verify_dynamics = false;
  auto rep = check_stability(s, A, o);
  if (!rep.passed()) throw Error(*rep.failure, rep.detail);
  return relax_to(s, A, u0, rep.admissible_state().u_star, rho, opt.t_cap);
}

namespace {

const LotkaVolterra& lv_params(const Scenario& s) {
  const auto* lv = std::get_if<LotkaVolterra>(&s.model().family());
  if (!lv) throw Error(ErrorCode::WrongFamily, "Lyapunov function needs a lotka_volterra model");
  return *lv;
}

}  // namespace

double lyapunov_value(const Scenario& s, const std::vector<double>& u) {
  const auto& lv = lv_params(s);
  const std::size_t n = s.size();
  if (u.size() != n) throw Error(ErrorCode::DimensionMismatch, "u must have |E| entries");
  double q = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) q += lv.c[i] * s.weights()(i, j) * u[i] * u[j];
    lin += lv.c[i] * lv.r[i] * u[i];
  }
  return 0.5 * q - lin;
}

double lyapunov_rate(const Scenario& s, const std::vector<double>& u) {
  const auto& lv = lv_params(s);
  const std::size_t n = s.size();
  if (u.size() != n) throw Error(ErrorCode::DimensionMismatch, "u must have |E| entries");
  const auto v = s.resources_of(u);
  double rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double grad = -lv.c[i] * lv.r[i];
    for (std::size_t j = 0; j < n; ++j)
      grad += 0.5 * (lv.c[i] * s.weights()(i, j) + lv.c[j] * s.weights()(j, i)) * u[j];
    rate += grad * u[i] * s.rate(i, v);
  }
  return rate;
}

EquilibriumCache::EquilibriumCache(const Scenario& s, EquilibriumOptions opt)
    : s_(s), opt_(opt) {}

std::shared_ptr<const StabilityReport> EquilibriumCache::report(Subsystem A) {
  {
    std::shared_lock lock(mu_);
    auto it = reports_.find(A);
    if (it != reports_.end()) return it->second;
  }
  auto fresh = std::make_shared<const StabilityReport>(check_stability(s_, A, opt_));
  std::unique_lock lock(mu_);
  auto [it, inserted] = reports_.emplace(A, std::move(fresh));
  if (inserted && it->second->passed()) f_.emplace(A, it->second->admissible_state().v);
  return it->second;
}

const std::vector<double>& EquilibriumCache::F(Subsystem A) {
  auto rep = report(A);
  if (!rep->passed()) throw Error(*rep->failure, rep->detail);
  std::shared_lock lock(mu_);
  return f_.at(A);
}

std::size_t EquilibriumCache::size() const {
  std::shared_lock lock(mu_);
  return reports_.size();
}

std::string equilibria_csv(const Scenario& s, const std::vector<Subsystem>& subsets,
                           const EquilibriumOptions& opt) {
  std::vector<std::string> head{"subset", "trait", "u_star", "R_off_support"};
  for (std::size_t l = 0; l < s.resources(); ++l) head.push_back("F_" + std::to_string(l + 1));
  std::string out = csv::row(head);
  for (Subsystem A : subsets) {
    auto rep = check_stability(s, A, opt);
    const std::string label = subsystem_label(s, A);
    if (!rep.passed()) {
      std::vector<std::string> cells{label, "", "nan", ""};
      for (std::size_t l = 0; l < s.resources(); ++l) cells.push_back("nan");
      out += csv::row(cells);
      continue;
    }
    const auto& e = rep.admissible_state();
    for (auto i : members(A)) {
      std::string roff;
      for (const auto& [j, R] : e.off_support_rates)
        if (j == i) roff = csv::num(R);
      std::vector<std::string> cells{label, s.traits().label(i), csv::num(e.u_star[i]), roff};
      for (double x : e.v) cells.push_back(csv::num(x));
      out += csv::row(cells);
    }
  }
  return out;
}

}  // namespace wkb
