// Command-line front end. Talks to the library only through wkblab.h.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wkblab/wkblab.h"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kInputError = 2, kNumericalError = 3 };

struct CliError {
  int code;
};

int exit_for(wkb_status st) {
  switch (st) {
    case WKB_OK:
      return kPass;
    case WKB_ERR_INVALID_ARGUMENT:
    case WKB_ERR_SCHEMA:
    case WKB_ERR_IO:
    case WKB_ERR_HYPOTHESIS:
      return kInputError;
    default:
      return kNumericalError;
  }
}

void check(wkb_status st) {
  if (st == WKB_OK) return;
  std::fprintf(stderr, "error: %s\n", wkb_last_error());
  throw CliError{exit_for(st)};
}

struct Options {
  std::string config;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<double> t_max;
  std::optional<double> dt_out;
  std::optional<double> dt;
  std::optional<std::string> trait;
  std::size_t n = 100000;
  double t = 1.0;
};

struct Session {
  wkb_config* cfg = nullptr;
  std::vector<double> eps;
  wkb_run_params run{};

  ~Session() { wkb_config_free(cfg); }
};

std::string eps_tag(double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

std::string out_path(const Options& o, const std::string& name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

// Loads the config, applies numeric overrides and prepares the output dir.
void open_session(Session& s, const Options& o, bool need_scenario) {
  check(wkb_config_load(o.config.c_str(), &s.cfg));
  if (need_scenario && !wkb_config_has_scenario(s.cfg)) {
    std::fprintf(stderr, "error: %s has no finite-trait scenario\n", o.config.c_str());
    throw CliError{kInputError};
  }
  check(wkb_config_get_run(s.cfg, &s.run));
  s.eps.assign(s.run.eps, s.run.eps + s.run.n_eps);
  if (o.eps) s.eps = {*o.eps};
  if (o.t_max) s.run.t_max = *o.t_max;
  if (o.dt_out) s.run.dt_out = *o.dt_out;
  if (o.dt) s.run.dt = *o.dt;
  if (o.seed) s.run.seed = *o.seed;
  s.run.n_eps = s.eps.size();
  s.run.eps = s.eps.data();
  check(wkb_config_set_run(s.cfg, &s.run));
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) {
    std::fprintf(stderr, "error: cannot create %s: %s\n", o.out_dir.c_str(), ec.message().c_str());
    throw CliError{kInputError};
  }
  if (need_scenario) {
    int passed = 0;
    char* report = nullptr;
    check(wkb_validate(s.cfg, &passed, &report));
    if (!passed) {
      std::fprintf(stderr, "scenario fails the standing assumptions:\n%s", report);
      wkb_free_string(report);
      throw CliError{kInputError};
    }
    wkb_free_string(report);
  }
}

std::size_t trait_index(const Session& s, const Options& o) {
  if (!o.trait) return 0;
  std::size_t idx = 0;
  check(wkb_config_trait_index(s.cfg, o.trait->c_str(), &idx));
  return idx;
}

int cmd_sim(const Options& o) {
  Session s;
  open_session(s, o, true);
  bool ok = true;
  for (double eps : s.eps) {
    wkb_trajectory* tr = nullptr;
    check(wkb_simulate_finite(s.cfg, eps, s.run.t_max, s.run.dt_out, &tr));
    const std::string path = out_path(o, "trajectory_eps" + eps_tag(eps) + ".csv");
    wkb_status st = wkb_trajectory_write_csv(tr, s.cfg, path.c_str());
    int passed = 0;
    double margin = 0.0;
    if (st == WKB_OK) st = wkb_check_mass_bounds(tr, s.cfg, &passed, &margin);
    wkb_trajectory_free(tr);
    check(st);
    std::printf("eps=%g  wrote %s  mass bounds %s (min margin %g)\n", eps, path.c_str(),
                passed ? "pass" : "FAIL", margin);
    ok = ok && passed;
  }
  return ok ? kPass : kCheckFailed;
}

int cmd_hj(const Options& o) {
  Session s;
  open_session(s, o, true);
  wkb_hj* hj = nullptr;
  check(wkb_evolve_hj(s.cfg, s.run.t_max, &hj));
  const std::string bp = out_path(o, "hj_breakpoints.csv");
  const std::string vals = out_path(o, "hj_values.csv");
  wkb_status st = wkb_hj_write_breakpoints_csv(hj, s.cfg, bp.c_str());
  if (st == WKB_OK) st = wkb_hj_write_values_csv(hj, s.cfg, s.run.dt_out, vals.c_str());
  int passed = 0;
  char* report = nullptr;
  if (st == WKB_OK) st = wkb_check_structure(hj, s.cfg, &passed, &report);
  std::size_t events = 0;
  if (st == WKB_OK) st = wkb_hj_event_count(hj, &events);
  for (std::size_t k = 0; st == WKB_OK && k < events; ++k) {
    double t = 0.0;
    int kind = 0;
    st = wkb_hj_event(hj, k, &t, &kind);
    std::printf("event t=%.12g %s\n", t, kind == 0 ? "ZeroSetChange" : "ActiveSetChange");
  }
  wkb_hj_free(hj);
  check(st);
  std::printf("wrote %s and %s\nstructure %s\n%s", bp.c_str(), vals.c_str(), passed ? "pass" : "FAIL",
              report ? report : "");
  wkb_free_string(report);
  return passed ? kPass : kCheckFailed;
}

int cmd_dp(const Options& o) {
  Session s;
  open_session(s, o, true);
  wkb_dp* dp = nullptr;
  check(wkb_dp_solve(s.cfg, s.run.t_max, s.run.dt, &dp));
  const std::string grid = out_path(o, "dp_grid.csv");
  wkb_status st = wkb_dp_write_csv(dp, s.cfg, grid.c_str());
  std::size_t steps = 0, n = 0;
  double dt = 0.0;
  if (st == WKB_OK) st = wkb_dp_steps(dp, &steps, &dt);
  if (st == WKB_OK) st = wkb_config_trait_count(s.cfg, &n);
  for (std::size_t i = 0; st == WKB_OK && i < n; ++i) {
    const char* label = nullptr;
    st = wkb_config_trait_label(s.cfg, i, &label);
    if (st != WKB_OK) break;
    const std::string path = out_path(o, std::string("dp_path_") + label + ".csv");
    st = wkb_dp_write_path_csv(dp, s.cfg, static_cast<double>(steps) * dt, i, path.c_str());
    double w = 0.0;
    if (st == WKB_OK) st = wkb_dp_value(dp, steps, i, &w);
    if (st == WKB_OK) std::printf("trait %s  W(t_max) = %.12g  path -> %s\n", label, w, path.c_str());
  }
  wkb_dp_free(dp);
  check(st);
  std::printf("wrote %s (%zu steps, dt = %g)\n", grid.c_str(), steps, dt);
  return kPass;
}

int cmd_eq(const Options& o) {
  Session s;
  open_session(s, o, true);
  const std::string path = out_path(o, "equilibria.csv");
  int passed = 0;
  check(wkb_equilibria_write_csv(s.cfg, path.c_str(), &passed));
  std::printf("wrote %s\nequilibrium hypothesis %s on every subsystem\n", path.c_str(),
              passed ? "holds" : "FAILS");
  return passed ? kPass : kCheckFailed;
}

int cmd_mc(const Options& o) {
  Session s;
  open_session(s, o, true);
  const double eps = s.eps.front();
  const std::size_t i = trait_index(s, o);
  double est = 0.0, se = 0.0, ref = 0.0;
  check(wkb_fk_estimate(s.cfg, eps, o.t, i, o.n, s.run.seed, &est, &se, &ref));
  const char* label = nullptr;
  check(wkb_config_trait_label(s.cfg, i, &label));
  const double z = se > 0.0 ? (est - ref) / se : (est == ref ? 0.0 : INFINITY);
  std::printf("eps=%g t=%g trait=%s n=%zu\nestimate %.10g\nstd_error %.4g\node_reference %.10g\nz %.3f\n",
              eps, o.t, label, o.n, est, se, ref, z);
  const std::string path = out_path(o, "mc.csv");
  if (FILE* f = std::fopen(path.c_str(), "w")) {
    std::fprintf(f, "eps,t,trait,n,estimate,std_error,ode_reference\n%.17g,%.17g,%s,%zu,%.17g,%.17g,%.17g\n",
                 eps, o.t, label, o.n, est, se, ref);
    std::fclose(f);
  } else {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return kInputError;
  }
  return std::abs(z) <= 3.0 ? kPass : kCheckFailed;
}

int cmd_pde(const Options& o) {
  Session s;
  open_session(s, o, false);
  if (!wkb_config_has_pde(s.cfg)) {
    std::fprintf(stderr, "error: %s has no pde section\n", o.config.c_str());
    return kInputError;
  }
  wkb_pde_params p{};
  check(wkb_config_get_pde(s.cfg, &p));
  if (o.eps) p.eps = *o.eps;
  if (o.t_max) p.t_max = *o.t_max;
  if (o.dt) p.dt = *o.dt;
  if (o.dt_out) p.dt_out = *o.dt_out;
  wkb_pde* pde = nullptr;
  check(wkb_simulate_pde(s.cfg, &p, &pde));
  const std::string snaps = out_path(o, "pde_snapshots.csv");
  const std::string diag = out_path(o, "pde_diagnostics.csv");
  wkb_status st = wkb_pde_write_csv(pde, snaps.c_str(), diag.c_str());
  int passed = 0;
  double margin = 0.0, lo = 0.0, hi = 0.0;
  if (st == WKB_OK) st = wkb_pde_check_resource_bounds(pde, &passed, &margin);
  if (st == WKB_OK) st = wkb_pde_max_w_range(pde, 0.0, &lo, &hi);
  wkb_pde_free(pde);
  check(st);
  std::printf("wrote %s and %s\nmass/resource bounds %s (min margin %g)\nmax_x w in [%g, %g]\n",
              snaps.c_str(), diag.c_str(), passed ? "pass" : "FAIL", margin, lo, hi);
  return passed ? kPass : kCheckFailed;
}

int cmd_study(const Options& o) {
  Session s;
  open_session(s, o, true);
  const std::string path = out_path(o, "study.csv");
  int passed = 0;
  char* summary = nullptr;
  check(wkb_run_study(s.cfg, path.c_str(), &passed, &summary));
  std::printf("%swrote %s\n", summary, path.c_str());
  wkb_free_string(summary);
  if (passed < 0) return kNumericalError;
  return passed ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-trait and 1-d WKB asymptotics toolkit"};
  app.set_version_flag("--version", std::string(wkb_version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "scenario config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out-dir", o.out_dir, "directory for CSV output");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--eps", o.eps, "single eps, overriding the config list")->check(CLI::PositiveNumber);
    sub->add_option("--t-max", o.t_max, "horizon")->check(CLI::PositiveNumber);
    sub->add_option("--dt-out", o.dt_out, "output grid spacing")->check(CLI::PositiveNumber);
    sub->add_option("--dt", o.dt, "step for dp / pde")->check(CLI::PositiveNumber);
  };

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Options&);
  };
  const Sub subs[] = {
      {"sim", "integrate the finite-trait system for each eps", cmd_sim},
      {"hj", "solve the Hamilton-Jacobi limit", cmd_hj},
      {"dp", "solve the variational problem on a time grid", cmd_dp},
      {"eq", "equilibria of every subsystem", cmd_eq},
      {"mc", "Feynman-Kac Monte Carlo estimate", cmd_mc},
      {"pde", "continuous-trait PDE in one dimension", cmd_pde},
      {"study", "convergence study over the eps list", cmd_study},
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> handlers;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    if (std::string(s.name) == "mc") {
      sub->add_option("--trait", o.trait, "trait label (default: first)");
      sub->add_option("--n", o.n, "number of paths")->check(CLI::PositiveNumber);
      sub->add_option("--t", o.t, "evaluation time")->check(CLI::PositiveNumber);
    }
    handlers.emplace_back(sub, s.run);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kInputError;
  }
  try {
    for (const auto& [sub, run] : handlers)
      if (sub->parsed()) return run(o);
  } catch (const CliError& e) {
    return e.code;
  }
  return kInputError;
}
