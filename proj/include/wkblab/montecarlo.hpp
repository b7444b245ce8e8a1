#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/finite_ode.hpp"
#include "wkblab/variational.hpp"

namespace wkb {

/// Stateless-hash generator: draw k of stream s under seed is a fixed function
/// of (seed, s, k), so streams can be consumed in any order or in parallel.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on (0, 1].
  double uniform();
  /// Exponential with the given positive rate.
  double exponential(double rate);
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct JumpProcessSample {
  JumpPath path;
  double log_weight = 0.0;
  std::uint64_t stream = 0;
};

/// n paths of the mutation chain started at i0 on [0, t]; path k uses stream k.
std::vector<JumpProcessSample> sample_paths(const MutationCosts& costs, double eps, std::size_t i0,
                                            double t, std::size_t n, std::uint64_t seed);

/// Piecewise-linear resource vector v(tau) through stored points.
class ResourceSchedule {
 public:
  ResourceSchedule(std::vector<double> times, std::vector<std::vector<double>> values);
  static ResourceSchedule from_trajectory(const Trajectory& traj);

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<std::vector<double>>& values() const noexcept { return values_; }
  std::vector<double> at(double tau) const;
  bool covers(double t0, double t1) const;

 private:
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

/// Exact integral of R_trait(v(tau)) over [tau0, tau1] along the schedule.
double integrate_rate(const Scenario& s, const ResourceSchedule& sched, std::size_t trait,
                      double tau0, double tau1);

struct FkEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double log_estimate = 0.0;
  std::size_t n = 0;
};

/// Feynman-Kac estimate of u(t, i) with the resource schedule supplied.
/// Throws ScheduleGap if the schedule does not cover [0, t].
FkEstimate fk_estimate(const Scenario& s, const ResourceSchedule& sched, double eps, double t,
                       std::size_t i, std::size_t n, std::uint64_t seed);

struct LdpRow {
  double eps = 0.0;
  double log_p = 0.0;
  double eps_log_p = 0.0;
};

/// Exact probability that the chain stays in the Skorokhod ball around phi:
/// same number of jumps on [0, horizon], same states, each jump time within
/// delta of phi's. Throws TooManyJumps when phi has more than two jumps.
std::vector<LdpRow> ldp_point_check(const MutationCosts& costs, const std::vector<double>& eps_list,
                                    const JumpPath& phi, double delta);

/// Least-squares slope of log P against 1/eps.
double ldp_slope(const std::vector<LdpRow>& rows);

struct JumpTail {
  double bound = 1.0;        // (t^N / N!) sum over chains of exp(-cost / eps)
  double sampled = 1.0;      // frequency of N_t >= N
  double sampled_se = 0.0;   // binomial standard error
  std::size_t n = 0;
};

JumpTail jump_tail(const MutationCosts& costs, double eps, double t, std::size_t i0, std::size_t N,
                   std::size_t n_samples, std::uint64_t seed);

}  // namespace wkb
