#include "wkblab/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "wkblab/error.hpp"

namespace wkb {

namespace {

std::string fmt_vec(std::span<const double> v) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < v.size(); ++k) os << (k ? ", " : "") << v[k];
  os << ')';
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// TraitSpace

TraitSpace::TraitSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error(ErrorCode::InvalidArgument, "trait space must be nonempty");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate trait label '" + l + "'");
  }
}

std::optional<std::size_t> TraitSpace::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return i;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// MutationCosts

MutationCosts::MutationCosts(std::size_t n, std::vector<double> row_major)
    : n_(n), cost_(std::move(row_major)) {
  if (n_ == 0) throw Error(ErrorCode::InvalidArgument, "cost table must be nonempty");
  if (cost_.size() != n_ * n_)
    throw Error(ErrorCode::DimensionMismatch, "cost table must be |E| x |E|");
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      double& c = cost_[i * n_ + j];
      if (i == j) {
        c = 0.0;
        continue;
      }
      if (std::isnan(c) || !(c > 0.0)) {
        std::ostringstream os;
        os << "off-diagonal cost (" << i << ", " << j << ") must be positive, got " << c;
        throw Error(ErrorCode::InvalidArgument, os.str());
      }
      if (std::isfinite(c)) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
  }
  gamma_ = lo;
  beta_ = hi < 0.0 ? kInf : hi;
}

MutationCosts MutationCosts::uniform(std::size_t n, double cost) {
  return MutationCosts(n, std::vector<double>(n * n, cost));
}

double MutationCosts::rate(std::size_t i, std::size_t j, double eps) const {
  if (i == j) return 0.0;
  const double c = (*this)(i, j);
  if (!std::isfinite(c)) return 0.0;
  return std::exp(-c / eps);
}

double MutationCosts::total_rate(std::size_t i, double eps) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += rate(i, j, eps);
  return s;
}

double triangle_slack_unchecked(const MutationCosts& costs) {
  const std::size_t n = costs.size();
  double eta = kInf;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        if (!std::isfinite(costs(i, k))) continue;
        eta = std::min(eta, costs(i, j) + costs(j, k) - costs(i, k));
      }
  return eta;
}

double triangle_slack(const MutationCosts& costs) {
  const double eta = triangle_slack_unchecked(costs);
  if (!(eta > 0.0)) {
    std::ostringstream os;
    os << "strict triangle inequality fails, slack = " << eta;
    throw Error(ErrorCode::SlackViolation, os.str());
  }
  return eta;
}

// ---------------------------------------------------------------------------
// ResourceWeights

ResourceWeights::ResourceWeights(std::size_t resources, std::size_t traits,
                                 std::vector<double> row_major)
    : r_(resources), n_(traits), psi_(std::move(row_major)) {
  if (r_ == 0 || n_ == 0) throw Error(ErrorCode::InvalidArgument, "psi must be nonempty");
  if (psi_.size() != r_ * n_) throw Error(ErrorCode::DimensionMismatch, "psi must be r x |E|");
  min_ = kInf;
  max_ = 0.0;
  for (double p : psi_) {
    if (!std::isfinite(p) || !(p > 0.0))
      throw Error(ErrorCode::InvalidArgument, "psi entries must be finite and positive");
    min_ = std::min(min_, p);
    max_ = std::max(max_, p);
  }
}

std::vector<double> resource_map(const ResourceWeights& weights, std::span<const double> u) {
  if (u.size() != weights.traits())
    throw Error(ErrorCode::DimensionMismatch, "density vector length differs from |E|");
  std::vector<double> v(weights.resources(), 0.0);
  for (std::size_t l = 0; l < weights.resources(); ++l)
    for (std::size_t j = 0; j < weights.traits(); ++j) v[l] += weights(l, j) * u[j];
  return v;
}

// ---------------------------------------------------------------------------
// GrowthModel

GrowthModel::GrowthModel(GrowthFamily family, DeclaredBounds declared)
    : family_(std::move(family)), declared_(declared) {}

std::string_view GrowthModel::family_name() const noexcept {
  if (std::holds_alternative<Chemostat>(family_)) return "chemostat";
  if (std::holds_alternative<LotkaVolterra>(family_)) return "lotka_volterra";
  return "table";
}

double GrowthModel::rate(const ResourceWeights& w, std::size_t i,
                         std::span<const double> v) const {
  if (const auto* ch = std::get_if<Chemostat>(&family_)) {
    double s = 0.0;
    for (std::size_t l = 0; l < v.size(); ++l) s += ch->alpha[l] * w(l, i) / (1.0 + v[l]);
    return -ch->d[i] + ch->c[i] * s;
  }
  if (const auto* lv = std::get_if<LotkaVolterra>(&family_)) return lv->r[i] - v[i];
  const auto& t = std::get<AffineTable>(family_);
  double s = t.base[i];
  for (std::size_t l = 0; l < v.size(); ++l) s += t.slope[i * v.size() + l] * v[l];
  return s;
}

void GrowthModel::rate_gradient(const ResourceWeights& w, std::size_t i,
                                std::span<const double> v, std::span<double> out) const {
  if (const auto* ch = std::get_if<Chemostat>(&family_)) {
    for (std::size_t l = 0; l < v.size(); ++l)
      out[l] = -ch->c[i] * ch->alpha[l] * w(l, i) / ((1.0 + v[l]) * (1.0 + v[l]));
    return;
  }
  if (std::holds_alternative<LotkaVolterra>(family_)) {
    for (std::size_t l = 0; l < v.size(); ++l) out[l] = (l == i) ? -1.0 : 0.0;
    return;
  }
  const auto& t = std::get<AffineTable>(family_);
  for (std::size_t l = 0; l < v.size(); ++l) out[l] = t.slope[i * v.size() + l];
}

double evaluate_growth(const GrowthModel& model, const ResourceWeights& weights, std::size_t trait,
                       std::span<const double> v) {
  if (trait >= weights.traits()) throw Error(ErrorCode::InvalidArgument, "trait out of range");
  if (v.size() != weights.resources())
    throw Error(ErrorCode::DimensionMismatch, "resource vector length differs from r");
  return model.rate(weights, trait, v);
}

InitialExponent::InitialExponent(std::vector<double> values) : h_(std::move(values)) {
  for (double x : h_)
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "h must be finite");
}

// ---------------------------------------------------------------------------
// Bounds

namespace {

// Per-trait threshold theta_i with R_i > 0 when every v_l < theta_i and
// R_i < 0 when every v_l > theta_i.
std::optional<std::vector<double>> thresholds(const GrowthModel& model,
                                              const ResourceWeights& w) {
  const std::size_t n = w.traits();
  const std::size_t r = w.resources();
  std::vector<double> theta(n);
  if (const auto* ch = std::get_if<Chemostat>(&model.family())) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t l = 0; l < r; ++l) s += ch->alpha[l] * w(l, i);
      theta[i] = ch->c[i] * s / ch->d[i] - 1.0;
    }
    return theta;
  }
  if (const auto* lv = std::get_if<LotkaVolterra>(&model.family())) return lv->r;
  const auto& t = std::get<AffineTable>(model.family());
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t l = 0; l < r; ++l) {
      const double a = t.slope[i * r + l];
      if (a > 0.0) return std::nullopt;
      s -= a;
    }
    if (!(s > 0.0)) return std::nullopt;
    theta[i] = t.base[i] / s;
  }
  return theta;
}

}  // namespace

ModelBounds compute_bounds(const GrowthModel& model, const ResourceWeights& w) {
  ModelBounds b;
  const std::size_t n = w.traits();
  const std::size_t r = w.resources();
  const auto& dec = model.declared();

  if (auto theta = thresholds(model, w)) {
    const double lo = *std::min_element(theta->begin(), theta->end());
    const double hi = *std::max_element(theta->begin(), theta->end());
    if (lo > 0.0) {
      b.v_min = lo;
      b.v_max = hi;
    }
  }
  if (dec.v_min) b.v_min = dec.v_min;
  if (dec.v_max) b.v_max = dec.v_max;
  if (b.v_min && b.v_max) {
    b.window_lo = *b.v_min / 2.0;
    b.window_hi = 2.0 * *b.v_max;
  }

  // Every family is monotone in each v_l, so extremes over the window box
  // sit at its corners.
  std::vector<double> corner(r);
  std::vector<double> grad(r);
  double rate_sup = 0.0;
  double grad_sup = 0.0;
  double grad_inf = kInf;
  const std::size_t corners = r <= 12 ? (std::size_t{1} << r) : 2;
  for (std::size_t mask = 0; mask < corners; ++mask) {
    for (std::size_t l = 0; l < r; ++l) {
      const bool high = r <= 12 ? ((mask >> l) & 1u) : (mask == 1);
      corner[l] = high ? b.window_hi : b.window_lo;
    }
    for (std::size_t i = 0; i < n; ++i) {
      rate_sup = std::max(rate_sup, std::abs(model.rate(w, i, corner)));
      model.rate_gradient(w, i, corner, grad);
      for (std::size_t l = 0; l < r; ++l) {
        if (model.is_lotka_volterra() && l != i) continue;
        const double g = std::abs(grad[l]);
        grad_sup = std::max(grad_sup, g);
        if (g > 0.0) grad_inf = std::min(grad_inf, g);
      }
    }
  }
  b.rate_bound = rate_sup;
  b.A = std::max({1.0, grad_sup, std::isfinite(grad_inf) ? 1.0 / grad_inf : 1.0});
  b.M = std::max(rate_sup, grad_sup);
  if (dec.A) b.A = *dec.A;
  if (dec.M) b.M = *dec.M;
  return b;
}

// ---------------------------------------------------------------------------
// Scenario

Scenario::Scenario(TraitSpace traits, MutationCosts costs, ResourceWeights weights,
                   GrowthModel model, InitialExponent h)
    : traits_(std::move(traits)),
      costs_(std::move(costs)),
      weights_(std::move(weights)),
      model_(std::move(model)),
      h_(std::move(h)) {
  const std::size_t n = traits_.size();
  const std::size_t r = weights_.resources();
  if (costs_.size() != n) throw Error(ErrorCode::DimensionMismatch, "costs must be |E| x |E|");
  if (weights_.traits() != n) throw Error(ErrorCode::DimensionMismatch, "psi must have |E| columns");
  if (h_.size() != n) throw Error(ErrorCode::DimensionMismatch, "h must have |E| entries");
  auto need = [](std::size_t got, std::size_t want, const char* what) {
    if (got != want)
      throw Error(ErrorCode::DimensionMismatch, std::string("model parameter '") + what +
                                                    "' has wrong length");
  };
  auto positive = [](const std::vector<double>& xs, const char* what) {
    for (double x : xs)
      if (!std::isfinite(x) || !(x > 0.0))
        throw Error(ErrorCode::InvalidArgument,
                    std::string("model parameter '") + what + "' must be positive");
  };
  if (const auto* ch = std::get_if<Chemostat>(&model_.family())) {
    need(ch->d.size(), n, "d");
    need(ch->c.size(), n, "c");
    need(ch->alpha.size(), r, "alpha");
    positive(ch->d, "d");
    positive(ch->c, "c");
    positive(ch->alpha, "alpha");
  } else if (const auto* lv = std::get_if<LotkaVolterra>(&model_.family())) {
    if (r != n)
      throw Error(ErrorCode::DimensionMismatch, "lotka_volterra needs one resource per trait");
    need(lv->r.size(), n, "r");
    need(lv->c.size(), n, "c");
    positive(lv->r, "r");
    positive(lv->c, "c");
  } else {
    const auto& t = std::get<AffineTable>(model_.family());
    need(t.base.size(), n, "base");
    need(t.slope.size(), n * r, "slope");
  }
  bounds_ = compute_bounds(model_, weights_);
}

std::vector<double> Scenario::rates(std::span<const double> v) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = rate(i, v);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "validation: " << (passed() ? "PASS" : "FAIL") << " (" << samples_checked
     << " samples, slack " << slack << ")\n";
  for (const auto& f : failures) {
    os << "  [" << f.check << "] " << f.detail;
    if (!f.sample.empty()) os << " at v=" << fmt_vec(f.sample);
    os << '\n';
  }
  return os.str();
}

ValidationReport validate_scenario(const Scenario& s, std::size_t sample_count) {
  ValidationReport rep;
  const std::size_t n = s.size();
  const std::size_t r = s.resources();
  const auto& b = s.bounds();
  const auto& model = s.model();
  const auto& w = s.weights();

  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // (a) -A <= dR_i/dv_l <= -1/A by central differences on the window.
  {
    const double A = b.A;
    std::vector<std::vector<bool>> reported(n, std::vector<bool>(r, false));
    std::vector<double> v(r), vp(r), vm(r);
    for (std::size_t k = 0; k < sample_count; ++k) {
      for (auto& x : v) x = b.window_lo + (b.window_hi - b.window_lo) * unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t l = 0; l < r; ++l) {
          if (model.is_lotka_volterra() && l != i) continue;
          if (reported[i][l]) continue;
          const double step = 1e-6 * std::max(1.0, v[l]);
          vp = v;
          vm = v;
          vp[l] += step;
          vm[l] -= step;
          const double g = (model.rate(w, i, vp) - model.rate(w, i, vm)) / (2.0 * step);
          const double tol = 1e-6 * std::max(1.0, A);
          if (g < -A - tol || g > -1.0 / A + tol) {
            std::ostringstream os;
            os << "dR_" << s.traits().label(i) << "/dv_" << (l + 1) << " = " << g
               << " outside [" << -A << ", " << -1.0 / A << "]";
            rep.failures.push_back({"monotonicity", os.str(), v});
            reported[i][l] = true;
          }
        }
      }
    }
    rep.samples_checked = sample_count;
  }

  // (b) chemostat viability.
  if (const auto* ch = std::get_if<Chemostat>(&model.family())) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t l = 0; l < r; ++l) sum += ch->alpha[l] * w(l, i);
      if (!(ch->c[i] * sum > ch->d[i])) {
        std::ostringstream os;
        os << "trait " << s.traits().label(i) << ": c*sum(alpha psi) = " << ch->c[i] * sum
           << " <= d = " << ch->d[i];
        rep.failures.push_back({"viability", os.str(), {}});
      }
    }
  }

  // (c) Lotka-Volterra symmetry and positive definiteness.
  if (const auto* lv = std::get_if<LotkaVolterra>(&model.family())) {
    Eigen::MatrixXd S(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) S(i, j) = lv->c[i] * w(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double scale = std::max(std::abs(S(i, j)), std::abs(S(j, i)));
        if (std::abs(S(i, j) - S(j, i)) > 1e-12 * std::max(1.0, scale)) {
          std::ostringstream os;
          os << "c_i psi_i(j) != c_j psi_j(i) for (" << s.traits().label(i) << ", "
             << s.traits().label(j) << ")";
          rep.failures.push_back({"symmetry", os.str(), {}});
        }
      }
    const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    std::vector<double> eig(es.eigenvalues().data(), es.eigenvalues().data() + n);
    rep.interaction_eigenvalues = eig;
    if (!(eig.front() > 0.0)) {
      std::ostringstream os;
      os << "interaction matrix not positive definite, smallest eigenvalue " << eig.front();
      rep.failures.push_back({"positive_definite", os.str(), {}});
    }
  }

  // (d) strict triangle inequality.
  rep.slack = triangle_slack_unchecked(s.costs());
  if (!(rep.slack > 0.0)) {
    std::ostringstream os;
    os << "triangle slack " << rep.slack << " is not positive";
    rep.failures.push_back({"triangle_slack", os.str(), {}});
  }

  // (e) the resource thresholds really bracket the sign change of R.
  {
    std::vector<double> v(r);
    bool low_bad = false;
    bool high_bad = false;
    for (std::size_t k = 0; k < sample_count; ++k) {
      if (b.v_min && !low_bad) {
        for (auto& x : v) x = *b.v_min * unit(rng);
        for (std::size_t i = 0; i < n && !low_bad; ++i) {
          if (!(model.rate(w, i, v) > 0.0)) {
            rep.failures.push_back({"v_min", "R_" + s.traits().label(i) +
                                                 " not positive below v_min", v});
            low_bad = true;
          }
        }
      }
      if (b.v_max && !high_bad) {
        for (auto& x : v) x = *b.v_max * (1.0 + 1e-9 + 2.0 * unit(rng));
        for (std::size_t i = 0; i < n && !high_bad; ++i) {
          if (!(model.rate(w, i, v) < 0.0)) {
            rep.failures.push_back({"v_max", "R_" + s.traits().label(i) +
                                                 " not negative above v_max", v});
            high_bad = true;
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace wkb
