#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wkb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Ordered, labelled finite trait set. Trait i is always the i-th label.
class TraitSpace {
 public:
  explicit TraitSpace(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const TraitSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// Dense mutation-cost table. Off-diagonal entries lie in (0, +inf]; the
/// diagonal is 0 by convention whatever the input says.
class MutationCosts {
 public:
  MutationCosts(std::size_t n, std::vector<double> row_major);
  static MutationCosts uniform(std::size_t n, double cost);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return cost_[i * n_ + j]; }

  /// Smallest finite off-diagonal cost (+inf when there is none).
  double gamma() const noexcept { return gamma_; }
  /// Largest finite off-diagonal cost (+inf when there is none).
  double beta() const noexcept { return beta_; }

  /// exp(-cost(i,j)/eps); exactly 0 for forbidden mutations and for i == j.
  double rate(std::size_t i, std::size_t j, double eps) const;
  /// Total jump rate out of i.
  double total_rate(std::size_t i, double eps) const;

  bool operator==(const MutationCosts&) const = default;

 private:
  std::size_t n_;
  std::vector<double> cost_;
  double gamma_ = kInf;
  double beta_ = kInf;
};

/// inf over distinct (i, j, k) with finite cost(i,k) of
/// cost(i,j) + cost(j,k) - cost(i,k). Throws SlackViolation when not positive.
double triangle_slack(const MutationCosts& costs);

/// Same quantity without the positivity check.
double triangle_slack_unchecked(const MutationCosts& costs);

/// psi(l, j): weight of trait j in resource l, strictly positive.
class ResourceWeights {
 public:
  ResourceWeights(std::size_t resources, std::size_t traits, std::vector<double> row_major);

  std::size_t resources() const noexcept { return r_; }
  std::size_t traits() const noexcept { return n_; }
  double operator()(std::size_t l, std::size_t j) const { return psi_[l * n_ + j]; }
  double psi_min() const noexcept { return min_; }
  double psi_max() const noexcept { return max_; }
  const std::vector<double>& data() const noexcept { return psi_; }

  bool operator==(const ResourceWeights&) const = default;

 private:
  std::size_t r_;
  std::size_t n_;
  std::vector<double> psi_;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// v_l = sum_j psi(l, j) u_j.
std::vector<double> resource_map(const ResourceWeights& weights, std::span<const double> u);

// Growth-rate families. Chemostat: R_i(v) = -d_i + c_i sum_l alpha_l psi_l(i)/(1+v_l).
// Lotka-Volterra: R_i(v) = r_i - v_i (one resource per trait).
// AffineTable: R_i(v) = base_i + sum_l slope(i,l) v_l, used for test fixtures.
struct Chemostat {
  std::vector<double> d;
  std::vector<double> c;
  std::vector<double> alpha;
  bool operator==(const Chemostat&) const = default;
};

struct LotkaVolterra {
  std::vector<double> r;
  std::vector<double> c;
  bool operator==(const LotkaVolterra&) const = default;
};

struct AffineTable {
  std::vector<double> base;
  std::vector<double> slope;  // traits x resources, row-major
  bool operator==(const AffineTable&) const = default;
};

using GrowthFamily = std::variant<Chemostat, LotkaVolterra, AffineTable>;

/// Constants that override the ones derived from the family parameters.
struct DeclaredBounds {
  std::optional<double> A;
  std::optional<double> M;
  std::optional<double> v_min;
  std::optional<double> v_max;
  bool operator==(const DeclaredBounds&) const = default;
};

class GrowthModel {
 public:
  explicit GrowthModel(GrowthFamily family, DeclaredBounds declared = {});

  const GrowthFamily& family() const noexcept { return family_; }
  std::string_view family_name() const noexcept;
  const DeclaredBounds& declared() const noexcept { return declared_; }

  bool is_chemostat() const noexcept { return std::holds_alternative<Chemostat>(family_); }
  bool is_lotka_volterra() const noexcept { return std::holds_alternative<LotkaVolterra>(family_); }

  double rate(const ResourceWeights& w, std::size_t trait, std::span<const double> v) const;
  /// Writes dR_trait/dv_l for every resource l into `out`.
  void rate_gradient(const ResourceWeights& w, std::size_t trait, std::span<const double> v,
                     std::span<double> out) const;

  bool operator==(const GrowthModel&) const = default;

 private:
  GrowthFamily family_;
  DeclaredBounds declared_;
};

double evaluate_growth(const GrowthModel& model, const ResourceWeights& weights, std::size_t trait,
                       std::span<const double> v);

class InitialExponent {
 public:
  explicit InitialExponent(std::vector<double> values);
  std::size_t size() const noexcept { return h_.size(); }
  double operator()(std::size_t i) const { return h_[i]; }
  const std::vector<double>& values() const noexcept { return h_; }
  bool operator==(const InitialExponent&) const = default;

 private:
  std::vector<double> h_;
};

/// Resolved constants of the standing assumptions.
///
/// v_min and v_max are read per component: every R_i is positive once
/// max_l v_l < v_min and negative once min_l v_l > v_max. The sampling window
/// used for A, M and validation is [v_min/2, 2 v_max] in each component.
struct ModelBounds {
  double A = 1.0;
  double M = 0.0;
  double rate_bound = 0.0;  // sup |R_i(v)| over the window
  std::optional<double> v_min;
  std::optional<double> v_max;
  double window_lo = 0.0;
  double window_hi = 1.0;
};

ModelBounds compute_bounds(const GrowthModel& model, const ResourceWeights& weights);

/// A complete problem instance. Immutable once built.
class Scenario {
 public:
  Scenario(TraitSpace traits, MutationCosts costs, ResourceWeights weights, GrowthModel model,
           InitialExponent h);

  std::size_t size() const noexcept { return traits_.size(); }
  std::size_t resources() const noexcept { return weights_.resources(); }
  const TraitSpace& traits() const noexcept { return traits_; }
  const MutationCosts& costs() const noexcept { return costs_; }
  const ResourceWeights& weights() const noexcept { return weights_; }
  const GrowthModel& model() const noexcept { return model_; }
  const InitialExponent& h() const noexcept { return h_; }
  const ModelBounds& bounds() const noexcept { return bounds_; }

  double rate(std::size_t trait, std::span<const double> v) const {
    return model_.rate(weights_, trait, v);
  }
  std::vector<double> rates(std::span<const double> v) const;
  std::vector<double> resources_of(std::span<const double> u) const {
    return resource_map(weights_, u);
  }

  bool operator==(const Scenario& o) const {
    return traits_ == o.traits_ && costs_ == o.costs_ && weights_ == o.weights_ &&
           model_ == o.model_ && h_ == o.h_;
  }

 private:
  TraitSpace traits_;
  MutationCosts costs_;
  ResourceWeights weights_;
  GrowthModel model_;
  InitialExponent h_;
  ModelBounds bounds_;
};

struct ValidationFailure {
  std::string check;
  std::string detail;
  std::vector<double> sample;  // offending resource vector, if any
};

struct ValidationReport {
  std::vector<ValidationFailure> failures;
  double slack = kInf;
  std::optional<std::vector<double>> interaction_eigenvalues;  // Lotka-Volterra only
  std::size_t samples_checked = 0;

  bool passed() const noexcept { return failures.empty(); }
  std::string summary() const;
};

/// Runs every standing-assumption check and lists failures; never throws for
/// a well-formed scenario.
ValidationReport validate_scenario(const Scenario& s, std::size_t sample_count);

}  // namespace wkb
