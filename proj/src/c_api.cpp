#include "wkblab/wkblab.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "wkblab/config.hpp"
#include "wkblab/csv.hpp"
#include "wkblab/equilibria.hpp"
#include "wkblab/error.hpp"
#include "wkblab/finite_ode.hpp"
#include "wkblab/hj.hpp"
#include "wkblab/montecarlo.hpp"
#include "wkblab/pde1d.hpp"
#include "wkblab/study.hpp"
#include "wkblab/variational.hpp"

struct wkb_config {
  wkb::Config c;
};

struct wkb_trajectory {
  wkb::Trajectory t;
};

struct wkb_hj {
  wkb::HjResult r;
};

struct wkb_dp {
  wkb::DpGrid g;
};

struct wkb_pde {
  wkb::FieldHistory h;
  wkb::PdeBounds bounds;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_kind;

wkb_status status_of(wkb::ErrorCode c) {
  using E = wkb::ErrorCode;
  switch (c) {
    case E::InvalidArgument:
    case E::DimensionMismatch:
    case E::WrongFamily:
    case E::ScheduleGap:
    case E::TooManyJumps:
      return WKB_ERR_INVALID_ARGUMENT;
    case E::Schema:
      return WKB_ERR_SCHEMA;
    case E::Io:
      return WKB_ERR_IO;
    case E::SlackViolation:
    case E::InitialMassViolation:
    case E::NonHyperbolic:
    case E::NoAdmissible:
    case E::MultipleAdmissible:
      return WKB_ERR_HYPOTHESIS;
    case E::StepFailure:
    case E::NewtonDivergence:
    case E::EnumerationCap:
    case E::TimeoutNoConvergence:
    case E::MaxNotZero:
    case E::MaxDrift:
    case E::EventStall:
    case E::MassEscape:
      return WKB_ERR_NUMERICAL;
  }
  return WKB_ERR_INTERNAL;
}

wkb_status fail(wkb_status st, std::string kind, std::string msg) {
  last_kind = std::move(kind);
  last_error = std::move(msg);
  return st;
}

template <class F>
wkb_status guard(F&& f) {
  last_error.clear();
  last_kind.clear();
  try {
    f();
    return WKB_OK;
  } catch (const wkb::Error& e) {
    return fail(status_of(e.code()), wkb::to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(WKB_ERR_INTERNAL, "Internal", e.what());
  } catch (...) {
    return fail(WKB_ERR_INTERNAL, "Internal", "unknown exception");
  }
}

void need(bool ok, const char* what) {
  if (!ok) throw wkb::Error(wkb::ErrorCode::InvalidArgument, what);
}

const wkb::Scenario& scenario(const wkb_config* cfg) {
  need(cfg != nullptr, "config handle is null");
  if (!cfg->c.scenario) throw wkb::Error(wkb::ErrorCode::InvalidArgument, "config has no finite-trait scenario");
  return *cfg->c.scenario;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* wkb_version(void) { return "0.1.0"; }
const char* wkb_last_error(void) { return last_error.c_str(); }
const char* wkb_last_error_kind(void) { return last_kind.c_str(); }
void wkb_free_string(char* s) { std::free(s); }

wkb_status wkb_config_load(const char* path, wkb_config** out) {
  return guard([&] {
    need(path && out, "null argument");
    *out = new wkb_config{wkb::parse_config(path)};
  });
}

wkb_status wkb_config_load_text(const char* text, wkb_config** out) {
  return guard([&] {
    need(text && out, "null argument");
    *out = new wkb_config{wkb::parse_config_text(text)};
  });
}

void wkb_config_free(wkb_config* cfg) { delete cfg; }

wkb_status wkb_config_serialize(const wkb_config* cfg, char** out) {
  return guard([&] {
    need(cfg && out, "null argument");
    *out = dup(wkb::serialize_config(cfg->c));
  });
}

wkb_status wkb_config_id(const wkb_config* cfg, const char** out) {
  return guard([&] {
    need(cfg && out, "null argument");
    *out = cfg->c.id.c_str();
  });
}

int wkb_config_has_scenario(const wkb_config* cfg) { return cfg && cfg->c.scenario ? 1 : 0; }
int wkb_config_has_pde(const wkb_config* cfg) { return cfg && cfg->c.pde ? 1 : 0; }

wkb_status wkb_config_trait_count(const wkb_config* cfg, size_t* out) {
  return guard([&] {
    need(out != nullptr, "null argument");
    *out = scenario(cfg).size();
  });
}

wkb_status wkb_config_trait_label(const wkb_config* cfg, size_t i, const char** out) {
  return guard([&] {
    need(out != nullptr, "null argument");
    const auto& s = scenario(cfg);
    need(i < s.size(), "trait index out of range");
    *out = s.traits().label(i).c_str();
  });
}

wkb_status wkb_config_trait_index(const wkb_config* cfg, const char* label, size_t* out) {
  return guard([&] {
    need(label && out, "null argument");
    const auto idx = scenario(cfg).traits().index_of(label);
    if (!idx) throw wkb::Error(wkb::ErrorCode::InvalidArgument, std::string("unknown trait '") + label + "'");
    *out = *idx;
  });
}

wkb_status wkb_config_get_run(const wkb_config* cfg, wkb_run_params* out) {
  return guard([&] {
    need(cfg && out, "null argument");
    const auto& r = cfg->c.run;
    out->n_eps = r.eps_list.size();
    out->eps = r.eps_list.data();
    out->t_max = r.t_max;
    out->dt_out = r.dt_out;
    out->seed = r.seed;
    out->dt = r.dt;
  });
}

wkb_status wkb_config_set_run(wkb_config* cfg, const wkb_run_params* run) {
  return guard([&] {
    need(cfg && run, "null argument");
    need(run->n_eps == 0 || run->eps != nullptr, "eps pointer is null");
    std::vector<double> eps(run->eps, run->eps + run->n_eps);
    for (std::size_t k = 0; k < eps.size(); ++k) {
      need(eps[k] > 0.0 && std::isfinite(eps[k]), "eps values must be positive");
      need(k == 0 || eps[k] < eps[k - 1], "eps values must be strictly decreasing");
    }
    need(run->t_max > 0.0 && run->dt_out > 0.0 && run->dt > 0.0, "t_max, dt_out and dt must be positive");
    auto& r = cfg->c.run;
    r.eps_list = std::move(eps);
    r.t_max = run->t_max;
    r.dt_out = run->dt_out;
    r.seed = run->seed;
    r.dt = run->dt;
  });
}

wkb_status wkb_validate(const wkb_config* cfg, int* passed, char** report) {
  return guard([&] {
    need(passed && report, "null argument");
    const auto rep = wkb::validate_scenario(scenario(cfg), 2000);
    *passed = rep.passed() ? 1 : 0;
    *report = dup(rep.summary());
  });
}

wkb_status wkb_simulate_finite(const wkb_config* cfg, double eps, double t_max, double dt_out,
                               wkb_trajectory** out) {
  return guard([&] {
    need(out != nullptr, "null argument");
    *out = new wkb_trajectory{wkb::simulate_finite(scenario(cfg), eps, t_max, dt_out)};
  });
}

void wkb_trajectory_free(wkb_trajectory* tr) { delete tr; }

wkb_status wkb_trajectory_size(const wkb_trajectory* tr, size_t* times, size_t* traits) {
  return guard([&] {
    need(tr && times && traits, "null argument");
    *times = tr->t.times.size();
    *traits = tr->t.u.empty() ? 0 : tr->t.u[0].size();
  });
}

wkb_status wkb_trajectory_get(const wkb_trajectory* tr, size_t k, size_t i, double* t, double* u,
                              double* w) {
  return guard([&] {
    need(tr != nullptr, "null argument");
    need(k < tr->t.times.size() && i < tr->t.u[k].size(), "index out of range");
    if (t) *t = tr->t.times[k];
    if (u) *u = tr->t.u[k][i];
    if (w) *w = tr->t.w[k][i];
  });
}

wkb_status wkb_trajectory_write_csv(const wkb_trajectory* tr, const wkb_config* cfg, const char* path) {
  return guard([&] {
    need(tr && path, "null argument");
    wkb::csv::write_file(path, wkb::trajectory_csv(tr->t, scenario(cfg)));
  });
}

wkb_status wkb_check_mass_bounds(const wkb_trajectory* tr, const wkb_config* cfg, int* passed,
                                 double* min_margin) {
  return guard([&] {
    need(tr && passed, "null argument");
    const auto rep = wkb::check_mass_bounds(tr->t, scenario(cfg));
    *passed = rep.passed ? 1 : 0;
    if (min_margin) *min_margin = rep.min_margin;
  });
}

wkb_status wkb_evolve_hj(const wkb_config* cfg, double t_max, wkb_hj** out) {
  return guard([&] {
    need(out != nullptr, "null argument");
    *out = new wkb_hj{wkb::evolve_hj(scenario(cfg), t_max)};
  });
}

void wkb_hj_free(wkb_hj* hj) { delete hj; }

wkb_status wkb_hj_value(const wkb_hj* hj, double t, size_t i, double* out) {
  return guard([&] {
    need(hj && out, "null argument");
    need(i < hj->r.vf.traits(), "trait index out of range");
    *out = hj->r.vf(t, i);
  });
}

wkb_status wkb_hj_event_count(const wkb_hj* hj, size_t* out) {
  return guard([&] {
    need(hj && out, "null argument");
    *out = hj->r.events.size();
  });
}

wkb_status wkb_hj_event(const wkb_hj* hj, size_t k, double* time, int* kind) {
  return guard([&] {
    need(hj != nullptr, "null argument");
    need(k < hj->r.events.size(), "event index out of range");
    if (time) *time = hj->r.events[k].time;
    if (kind) *kind = hj->r.events[k].kind == wkb::EventKind::ZeroSetChange ? 0 : 1;
  });
}

wkb_status wkb_hj_write_breakpoints_csv(const wkb_hj* hj, const wkb_config* cfg, const char* path) {
  return guard([&] {
    need(hj && path, "null argument");
    wkb::csv::write_file(path, wkb::breakpoints_csv(hj->r, scenario(cfg)));
  });
}

wkb_status wkb_hj_write_values_csv(const wkb_hj* hj, const wkb_config* cfg, double dt_out,
                                   const char* path) {
  return guard([&] {
    need(hj && path, "null argument");
    need(dt_out > 0.0, "dt_out must be positive");
    wkb::csv::write_file(path, wkb::value_function_csv(hj->r.vf, scenario(cfg), dt_out));
  });
}

wkb_status wkb_check_structure(const wkb_hj* hj, const wkb_config* cfg, int* passed, char** report) {
  return guard([&] {
    need(hj && passed, "null argument");
    const auto rep = wkb::check_structure(hj->r.vf, scenario(cfg));
    *passed = rep.passed() ? 1 : 0;
    if (report) {
      std::string text;
      for (const auto& f : rep.failures) text += f + "\n";
      *report = dup(text);
    }
  });
}

wkb_status wkb_dp_solve(const wkb_config* cfg, double t_max, double dt, wkb_dp** out) {
  return guard([&] {
    need(out != nullptr, "null argument");
    *out = new wkb_dp{wkb::dp_solve(scenario(cfg), t_max, dt)};
  });
}

void wkb_dp_free(wkb_dp* dp) { delete dp; }

wkb_status wkb_dp_steps(const wkb_dp* dp, size_t* steps, double* dt) {
  return guard([&] {
    need(dp != nullptr, "null argument");
    if (steps) *steps = dp->g.steps;
    if (dt) *dt = dp->g.dt;
  });
}

wkb_status wkb_dp_value(const wkb_dp* dp, size_t k, size_t i, double* out) {
  return guard([&] {
    need(dp && out, "null argument");
    need(k <= dp->g.steps && i < dp->g.traits, "index out of range");
    *out = dp->g.value(k, i);
  });
}

wkb_status wkb_dp_write_csv(const wkb_dp* dp, const wkb_config* cfg, const char* path) {
  return guard([&] {
    need(dp && path, "null argument");
    wkb::csv::write_file(path, wkb::dp_grid_csv(dp->g, scenario(cfg)));
  });
}

wkb_status wkb_dp_write_path_csv(const wkb_dp* dp, const wkb_config* cfg, double t, size_t i,
                                 const char* path) {
  return guard([&] {
    need(dp && path, "null argument");
    wkb::csv::write_file(path, wkb::jump_path_csv(wkb::optimal_path(dp->g, t, i), scenario(cfg)));
  });
}

wkb_status wkb_equilibria_write_csv(const wkb_config* cfg, const char* path, int* passed) {
  return guard([&] {
    need(path != nullptr, "null argument");
    const auto& s = scenario(cfg);
    need(s.size() <= 12, "subset enumeration is limited to 12 traits");
    std::vector<wkb::Subsystem> subsets;
    bool ok = true;
    for (wkb::Subsystem A = 1; A <= wkb::full_subsystem(s.size()); ++A) {
      subsets.push_back(A);
      ok = ok && wkb::check_stability(s, A).passed();
    }
    wkb::csv::write_file(path, wkb::equilibria_csv(s, subsets));
    if (passed) *passed = ok ? 1 : 0;
  });
}

wkb_status wkb_fk_estimate(const wkb_config* cfg, double eps, double t, size_t i, size_t n,
                           uint64_t seed, double* estimate, double* std_error, double* ode_ref) {
  return guard([&] {
    need(estimate && std_error, "null argument");
    const auto& s = scenario(cfg);
    need(i < s.size(), "trait index out of range");
    const auto tr = wkb::simulate_finite(s, eps, t, std::min(cfg->c.run.dt_out, t));
    const auto est = wkb::fk_estimate(s, wkb::ResourceSchedule::from_trajectory(tr), eps, t, i, n, seed);
    *estimate = est.estimate;
    *std_error = est.std_error;
    if (ode_ref) *ode_ref = tr.u.back()[i];
  });
}

wkb_status wkb_ldp_point_check(const wkb_config* cfg, size_t start, size_t n_jumps,
                               const double* jump_times, const size_t* jump_states, double horizon,
                               double delta, size_t n_eps, const double* eps, double* eps_log_p) {
  return guard([&] {
    need(n_jumps == 0 || (jump_times && jump_states), "null jump arrays");
    need(n_eps > 0 && eps && eps_log_p, "null eps arrays");
    wkb::JumpPath phi;
    phi.start = start;
    phi.horizon = horizon;
    for (std::size_t k = 0; k < n_jumps; ++k) phi.jumps.emplace_back(jump_times[k], jump_states[k]);
    const auto rows = wkb::ldp_point_check(scenario(cfg).costs(), std::vector<double>(eps, eps + n_eps),
                                           phi, delta);
    for (std::size_t k = 0; k < rows.size(); ++k) eps_log_p[k] = rows[k].eps_log_p;
  });
}

wkb_status wkb_jump_tail(const wkb_config* cfg, double eps, double t, size_t i0, size_t n_jumps,
                         size_t n_samples, uint64_t seed, double* bound, double* sampled) {
  return guard([&] {
    need(bound && sampled, "null argument");
    const auto jt = wkb::jump_tail(scenario(cfg).costs(), eps, t, i0, n_jumps, n_samples, seed);
    *bound = jt.bound;
    *sampled = jt.sampled;
  });
}

wkb_status wkb_config_get_pde(const wkb_config* cfg, wkb_pde_params* out) {
  return guard([&] {
    need(cfg && out, "null argument");
    if (!cfg->c.pde) throw wkb::Error(wkb::ErrorCode::InvalidArgument, "config has no pde section");
    const auto& p = *cfg->c.pde;
    *out = wkb_pde_params{p.eps, p.t_max, p.L, p.dx, p.dt, cfg->c.run.dt_out};
  });
}

wkb_status wkb_simulate_pde(const wkb_config* cfg, const wkb_pde_params* params, wkb_pde** out) {
  return guard([&] {
    need(cfg && params && out, "null argument");
    if (!cfg->c.pde) throw wkb::Error(wkb::ErrorCode::InvalidArgument, "config has no pde section");
    const auto& m = cfg->c.pde->model;
    wkb::PdeOptions opt;
    opt.dt_out = params->dt_out;
    auto h = wkb::simulate_pde(m, params->eps, params->t_max, params->L, params->dx, params->dt, opt);
    *out = new wkb_pde{std::move(h), wkb::pde_bounds(m, params->L, params->dx)};
  });
}

void wkb_pde_free(wkb_pde* pde) { delete pde; }

wkb_status wkb_pde_write_csv(const wkb_pde* pde, const char* snapshots_path, const char* diagnostics_path) {
  return guard([&] {
    need(pde != nullptr, "null argument");
    if (snapshots_path) wkb::csv::write_file(snapshots_path, wkb::pde_snapshots_csv(pde->h));
    if (diagnostics_path) wkb::csv::write_file(diagnostics_path, wkb::pde_diagnostics_csv(pde->h));
  });
}

wkb_status wkb_pde_check_resource_bounds(const wkb_pde* pde, int* passed, double* min_margin) {
  return guard([&] {
    need(pde && passed, "null argument");
    const auto rep = wkb::check_resource_bounds(pde->h, pde->bounds);
    *passed = rep.passed() ? 1 : 0;
    if (min_margin) *min_margin = rep.min_margin;
  });
}

wkb_status wkb_pde_max_w_range(const wkb_pde* pde, double t_from, double* lo, double* hi) {
  return guard([&] {
    need(pde && lo && hi, "null argument");
    const auto tr = wkb::wkb_extract(pde->h);
    *lo = wkb::kInf;
    *hi = -wkb::kInf;
    for (std::size_t s = 0; s < tr.max_w.size(); ++s) {
      if (pde->h.times[s] < t_from) continue;
      *lo = std::min(*lo, tr.max_w[s]);
      *hi = std::max(*hi, tr.max_w[s]);
    }
  });
}

wkb_status wkb_run_study(const wkb_config* cfg, const char* csv_path, int* passed, char** summary) {
  return guard([&] {
    need(passed != nullptr, "null argument");
    const auto res = wkb::run_study(scenario(cfg), cfg->c.id, cfg->c.run);
    if (csv_path) wkb::csv::write_file(csv_path, wkb::study_csv(res));
    *passed = !res.runs_ok() ? -1 : res.all_passed() ? 1 : 0;
    if (summary) *summary = dup(wkb::study_summary(res));
  });
}

}  // extern "C"
