#include "wkblab/pde1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/core.hpp"
#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"

namespace wkb {

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coef.rbegin(); it != coef.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  for (std::size_t k = 1; k < coef.size(); ++k) d.coef.push_back(static_cast<double>(k) * coef[k]);
  return d;
}

double PdeModel::rate(double x, const std::vector<double>& v) const {
  double r = base(x);
  for (std::size_t l = 0; l < uptake.size(); ++l) r -= uptake[l] * v[l];
  return r;
}

namespace {

void check_model(const PdeModel& m) {
  if (m.uptake.empty()) throw Error(ErrorCode::InvalidArgument, "model needs at least one resource");
  if (m.psi.size() != m.uptake.size())
    throw Error(ErrorCode::DimensionMismatch, "psi count differs from the resource count");
  for (double k : m.uptake)
    if (!(k > 0.0) || !std::isfinite(k))
      throw Error(ErrorCode::InvalidArgument, "uptake coefficients must be positive");
}

}  // namespace

PdeGrid make_grid(double L, double dx) {
  if (!(dx > 0.0) || !(L >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need dx > 0 and L >= 0");
  PdeGrid g;
  if (L == 0.0) {
    g.x = {0.0};
    g.weight = {dx};
    return g;
  }
  const double cells = 2.0 * L / dx;
  const auto n = static_cast<std::size_t>(std::llround(cells));
  if (n < 2 || std::abs(cells - static_cast<double>(n)) > 1e-9 * cells)
    throw Error(ErrorCode::InvalidArgument, "2L must be a whole number (>= 2) of cells dx");
  g.x.resize(n + 1);
  g.weight.assign(n + 1, dx);
  for (std::size_t k = 0; k <= n; ++k) g.x[k] = -L + dx * static_cast<double>(k);
  g.weight.front() = g.weight.back() = 0.5 * dx;
  return g;
}

PdeBounds pde_bounds(const PdeModel& m, double L, double dx) {
  check_model(m);
  const PdeGrid g = make_grid(L, dx);
  PdeBounds b;
  const auto [kmin, kmax] = std::minmax_element(m.uptake.begin(), m.uptake.end());
  b.A = std::max({1.0, *kmax, 1.0 / *kmin});

  double base_lo = kInf, base_hi = -kInf;
  for (double x : g.x) {
    base_lo = std::min(base_lo, m.base(x));
    base_hi = std::max(base_hi, m.base(x));
  }
  // min_x R > 0 once |v|_1 < base_lo / kmax; max_x R < 0 once |v|_1 > base_hi / kmin.
  const double lo = base_lo / *kmax;
  const double hi = base_hi / *kmin;
  if (lo > 0.0 && lo < hi) {
    b.v_min = lo;
    b.v_max = hi;
  }
  if (m.v_min) b.v_min = m.v_min;
  if (m.v_max) b.v_max = m.v_max;

  b.psi_min = kInf;
  b.psi_max = -kInf;
  for (const auto& p : m.psi) {
    const Polynomial d1 = p.derivative();
    const Polynomial d2 = d1.derivative();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double x : g.x) {
      const double val = p(x);
      if (!(val > 0.0)) throw Error(ErrorCode::InvalidArgument, "psi must be positive on the grid");
      b.psi_min = std::min(b.psi_min, val);
      b.psi_max = std::max(b.psi_max, val);
      s0 = std::max(s0, std::abs(val));
      s1 = std::max(s1, std::abs(d1(x)));
      s2 = std::max(s2, std::abs(d2(x)));
    }
    b.psi_w2inf.push_back(s0 + s1 + s2);
  }
  return b;
}

namespace {

// Solves (I - c L) y = rhs in place, L the conservative no-flux Laplacian
// with unit spacing folded into c.
void implicit_diffusion(std::vector<double>& u, double c, std::vector<double>& cp) {
  const std::size_t n = u.size();
  if (n < 2) return;
  cp.resize(n);
  // Ends use the reflected neighbour, so their single off-diagonal is -2c.
  auto lower = [&](std::size_t k) { return k == n - 1 ? -2.0 * c : -c; };
  auto upper = [&](std::size_t k) { return k == 0 ? -2.0 * c : -c; };
  const double diag = 1.0 + 2.0 * c;
  double denom = diag;
  cp[0] = upper(0) / denom;
  u[0] /= denom;
  for (std::size_t k = 1; k < n; ++k) {
    denom = diag - lower(k) * cp[k - 1];
    cp[k] = k + 1 < n ? upper(k) / denom : 0.0;
    u[k] = (u[k] - lower(k) * u[k - 1]) / denom;
  }
  for (std::size_t k = n - 1; k-- > 0;) u[k] -= cp[k] * u[k + 1];
}

}  // namespace

FieldHistory simulate_pde(const PdeModel& m, double eps, double t_max, double L, double dx,
                          double dt, const PdeOptions& opt) {
  check_model(m);
  if (!(eps > 0.0) || !(t_max > 0.0) || !(dt > 0.0) || !(opt.dt_out > 0.0))
    throw Error(ErrorCode::InvalidArgument, "eps, t_max, dt and dt_out must be positive");
  if (dt > eps * dx * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds eps dx = " << eps * dx;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  FieldHistory hist;
  hist.eps = eps;
  hist.L = L;
  hist.dx = dx;
  hist.grid = make_grid(L, dx);
  const auto& g = hist.grid;
  const std::size_t n = g.size();
  const std::size_t r = m.resources();

  const auto n_out = static_cast<std::size_t>(std::ceil(t_max / opt.dt_out - 1e-9));
  const double dt_out = t_max / static_cast<double>(n_out);
  const auto per_out = static_cast<std::size_t>(std::ceil(dt_out / dt - 1e-9));
  hist.dt = dt_out / static_cast<double>(per_out);

  std::vector<std::vector<double>> psi(r, std::vector<double>(n));
  for (std::size_t l = 0; l < r; ++l)
    for (std::size_t k = 0; k < n; ++k) psi[l][k] = m.psi[l](g.x[k]);
  std::vector<double> base(n);
  for (std::size_t k = 0; k < n; ++k) base[k] = m.base(g.x[k]);

  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = std::exp(-m.h(g.x[k]) / eps);

  auto resources = [&](const std::vector<double>& field) {
    std::vector<double> v(r, 0.0);
    for (std::size_t l = 0; l < r; ++l)
      for (std::size_t k = 0; k < n; ++k) v[l] += g.weight[k] * psi[l][k] * field[k];
    return v;
  };
  auto mass_of = [&](const std::vector<double>& field) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += g.weight[k] * field[k];
    return s;
  };
  auto record = [&](double t, const std::vector<double>& v) {
    hist.times.push_back(t);
    hist.u.push_back(u);
    hist.v.push_back(v);
    hist.mass.push_back(mass_of(u));
  };

  std::vector<double> v = resources(u);
  if (opt.check_initial_mass) {
    const PdeBounds b = pde_bounds(m, L, dx);
    for (std::size_t l = 0; l < r; ++l) {
      if ((b.v_min && v[l] < *b.v_min) || (b.v_max && v[l] > *b.v_max)) {
        std::ostringstream os;
        os << "initial v_" << (l + 1) << " = " << v[l] << " outside [" << b.v_min.value_or(0.0)
           << ", " << b.v_max.value_or(kInf) << "]";
        throw Error(ErrorCode::InitialMassViolation, os.str());
      }
    }
  }
  record(0.0, v);

  const double c = 0.5 * eps * hist.dt / (dx * dx);
  std::vector<double> scratch;
  for (std::size_t out = 1; out <= n_out; ++out) {
    for (std::size_t step = 0; step < per_out; ++step) {
      v = resources(u);
      if (opt.diffusion) implicit_diffusion(u, c, scratch);
      double shift = 0.0;
      for (std::size_t l = 0; l < r; ++l) shift += m.uptake[l] * v[l];
      for (std::size_t k = 0; k < n; ++k) u[k] *= std::exp(hist.dt * (base[k] - shift) / eps);
      if (n > 1) {
        const double total = mass_of(u);
        const double edge = g.weight.front() * u.front() + g.weight.back() * u.back();
        if (!(total > 0.0) || !std::isfinite(total))
          throw Error(ErrorCode::StepFailure, "field lost positivity or overflowed");
        if (edge > opt.escape_fraction * total) {
          std::ostringstream os;
          os << "boundary mass fraction " << edge / total << " at t = "
             << (static_cast<double>(out - 1) + static_cast<double>(step + 1) / per_out) * dt_out
             << " exceeds " << opt.escape_fraction;
          throw Error(ErrorCode::MassEscape, os.str());
        }
      }
    }
    record(static_cast<double>(out) * dt_out, resources(u));
  }
  return hist;
}

ResourceBoundReport check_resource_bounds(const FieldHistory& hist, const PdeBounds& b) {
  ResourceBoundReport rep;
  const double eps2 = hist.eps * hist.eps;
  const std::size_t r = b.psi_w2inf.size();
  double norm_max = 0.0, norm_min = kInf;
  for (double w : b.psi_w2inf) {
    rep.slack.push_back(b.A * eps2 * w / b.psi_min);
    rep.alternate_slack.push_back(b.A * eps2 * b.psi_min / w);
    norm_max = std::max(norm_max, w);
    norm_min = std::min(norm_min, w);
  }
  const double slack1 = b.A * eps2 * norm_max / b.psi_min;
  rep.vacuous = !b.v_min && !b.v_max;
  const double vmin = b.v_min.value_or(-kInf);
  const double vmax = b.v_max.value_or(kInf);
  rep.min_margin = kInf;
  for (std::size_t s = 0; s < hist.times.size(); ++s) {
    ResourceBoundRow row;
    row.t = hist.times[s];
    double norm1 = 0.0;
    for (std::size_t l = 0; l < r; ++l) {
      const double vl = hist.v[s][l];
      norm1 += std::abs(vl);
      row.lower_margin.push_back(vl - (vmin - rep.slack[l]));
      row.upper_margin.push_back((vmax + rep.slack[l]) - vl);
    }
    row.norm1_lower = norm1 - (vmin - slack1);
    row.norm1_upper = (vmax + slack1) - norm1;
    row.mass_lower = hist.mass[s] - (vmin - slack1) / b.psi_max;
    row.mass_upper = (vmax + slack1) / b.psi_min - hist.mass[s];
    double worst = std::min({row.norm1_lower, row.norm1_upper, row.mass_lower, row.mass_upper});
    for (std::size_t l = 0; l < r; ++l)
      worst = std::min({worst, row.lower_margin[l], row.upper_margin[l]});
    row.ok = worst >= -rep.tolerance;
    rep.min_margin = std::min(rep.min_margin, worst);
    if (!row.ok && !rep.first_violation) rep.first_violation = s;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

WkbTrack wkb_extract(const FieldHistory& hist) {
  WkbTrack tr;
  const auto& x = hist.grid.x;
  for (std::size_t s = 0; s < hist.times.size(); ++s) {
    std::vector<double> w(x.size());
    std::size_t best = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      w[k] = hist.eps * std::log(hist.u[s][k]);
      if (w[k] > w[best]) best = k;
    }
    for (std::size_t k = 1; k < x.size(); ++k)
      tr.lipschitz_x = std::max(tr.lipschitz_x, std::abs(w[k] - w[k - 1]) / (x[k] - x[k - 1]));
    if (s > 0) {
      const double dt = hist.times[s] - hist.times[s - 1];
      for (std::size_t k = 0; k < x.size(); ++k)
        tr.lipschitz_t = std::max(tr.lipschitz_t, std::abs(w[k] - tr.w.back()[k]) / dt);
    }
    tr.max_w.push_back(w[best]);
    tr.argmax_x.push_back(x[best]);
    tr.w.push_back(std::move(w));
  }
  return tr;
}

std::string pde_snapshots_csv(const FieldHistory& hist) {
  std::string out = csv::row({"t", "x", "u", "w"});
  for (std::size_t s = 0; s < hist.times.size(); ++s)
    for (std::size_t k = 0; k < hist.grid.size(); ++k) {
      const double u = hist.u[s][k];
      out += csv::row({csv::num(hist.times[s]), csv::num(hist.grid.x[k]), csv::num(u),
                       csv::num(hist.eps * std::log(u))});
    }
  return out;
}

std::string pde_diagnostics_csv(const FieldHistory& hist) {
  const std::size_t r = hist.v.empty() ? 0 : hist.v[0].size();
  std::vector<std::string> head{"t"};
  for (std::size_t l = 0; l < r; ++l) head.push_back("v_" + std::to_string(l + 1));
  head.insert(head.end(), {"mass", "max_w", "argmax_x"});
  std::string out = csv::row(head);
  const WkbTrack tr = wkb_extract(hist);
  for (std::size_t s = 0; s < hist.times.size(); ++s) {
    std::vector<std::string> cells{csv::num(hist.times[s])};
    for (double vl : hist.v[s]) cells.push_back(csv::num(vl));
    cells.push_back(csv::num(hist.mass[s]));
    cells.push_back(csv::num(tr.max_w[s]));
    cells.push_back(csv::num(tr.argmax_x[s]));
    out += csv::row(cells);
  }
  return out;
}

}  // namespace wkb
