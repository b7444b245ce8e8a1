// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "wkblab/wkblab.h"

namespace {

std::string config_path(const char* name) { return std::string(WKBLAB_CONFIG_DIR) + "/" + name; }

struct Config {
  wkb_config* p = nullptr;
  explicit Config(const char* name) { REQUIRE(wkb_config_load(config_path(name).c_str(), &p) == WKB_OK); }
  ~Config() { wkb_config_free(p); }
};

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / (std::string("wkblab_capi_") + name)).string();
}

std::string first_line(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST_CASE("version and errors") {
  CHECK(std::string(wkb_version()).size() > 0);
  wkb_config* cfg = nullptr;
  CHECK(wkb_config_load_text("traits: [a]\ncosts: 3\n", &cfg) == WKB_ERR_SCHEMA);
  CHECK(cfg == nullptr);
  CHECK(std::string(wkb_last_error_kind()) == "SchemaError");
  CHECK(std::string(wkb_last_error()).find("costs") != std::string::npos);
  CHECK(wkb_config_load("/nonexistent.yaml", &cfg) == WKB_ERR_IO);
  size_t n = 0;
  CHECK(wkb_config_trait_count(nullptr, &n) == WKB_ERR_INVALID_ARGUMENT);
  wkb_config_free(nullptr);
}

TEST_CASE("config queries and run parameters") {
  Config c("s1.yaml");
  const char* id = nullptr;
  REQUIRE(wkb_config_id(c.p, &id) == WKB_OK);
  CHECK(std::string(id) == "s1");
  CHECK(wkb_config_has_scenario(c.p) == 1);
  CHECK(wkb_config_has_pde(c.p) == 0);
  size_t n = 0, idx = 9;
  CHECK(wkb_config_trait_count(c.p, &n) == WKB_OK);
  CHECK(n == 2);
  const char* label = nullptr;
  CHECK(wkb_config_trait_label(c.p, 1, &label) == WKB_OK);
  CHECK(std::string(label) == "2");
  CHECK(wkb_config_trait_index(c.p, "2", &idx) == WKB_OK);
  CHECK(idx == 1);
  CHECK(wkb_config_trait_index(c.p, "7", &idx) == WKB_ERR_INVALID_ARGUMENT);

  wkb_run_params run{};
  REQUIRE(wkb_config_get_run(c.p, &run) == WKB_OK);
  CHECK(run.n_eps == 4);
  CHECK(run.eps[3] == 0.05);
  const double eps[] = {0.2, 0.1};
  run.n_eps = 2;
  run.eps = eps;
  run.t_max = 3.0;
  CHECK(wkb_config_set_run(c.p, &run) == WKB_OK);
  wkb_run_params back{};
  wkb_config_get_run(c.p, &back);
  CHECK(back.n_eps == 2);
  CHECK(back.t_max == 3.0);
  const double bad[] = {0.1, 0.2};
  run.eps = bad;
  CHECK(wkb_config_set_run(c.p, &run) == WKB_ERR_INVALID_ARGUMENT);

  char* text = nullptr;
  REQUIRE(wkb_config_serialize(c.p, &text) == WKB_OK);
  wkb_config* again = nullptr;
  CHECK(wkb_config_load_text(text, &again) == WKB_OK);
  wkb_free_string(text);
  wkb_config_free(again);

  int passed = -1;
  char* report = nullptr;
  CHECK(wkb_validate(c.p, &passed, &report) == WKB_OK);
  CHECK(passed == 1);
  wkb_free_string(report);
}

TEST_CASE("finite ODE, HJ and DP through handles") {
  Config c("s1.yaml");
  wkb_trajectory* tr = nullptr;
  REQUIRE(wkb_simulate_finite(c.p, 0.1, 5.0, 0.05, &tr) == WKB_OK);
  size_t times = 0, traits = 0;
  wkb_trajectory_size(tr, &times, &traits);
  CHECK(times == 101);
  CHECK(traits == 2);
  double t, u, w;
  CHECK(wkb_trajectory_get(tr, 0, 1, &t, &u, &w) == WKB_OK);
  CHECK(w == doctest::Approx(-0.5));
  CHECK(wkb_trajectory_get(tr, times, 0, &t, &u, &w) == WKB_ERR_INVALID_ARGUMENT);
  int passed = 0;
  double margin = 0.0;
  CHECK(wkb_check_mass_bounds(tr, c.p, &passed, &margin) == WKB_OK);
  CHECK(passed == 1);
  const std::string csv = temp_file("traj.csv");
  CHECK(wkb_trajectory_write_csv(tr, c.p, csv.c_str()) == WKB_OK);
  CHECK(first_line(csv).rfind("t,", 0) == 0);
  wkb_trajectory_free(tr);

  wkb_hj* hj = nullptr;
  REQUIRE(wkb_evolve_hj(c.p, 5.0, &hj) == WKB_OK);
  double v = 0.0;
  wkb_hj_value(hj, 5.0, 1, &v);
  CHECK(v == doctest::Approx(-1.0));
  size_t events = 0;
  wkb_hj_event_count(hj, &events);
  REQUIRE(events == 1);
  double when = 0.0;
  int kind = -1;
  wkb_hj_event(hj, 0, &when, &kind);
  CHECK(when == doctest::Approx(2.5));
  CHECK(kind == 1);
  char* report = nullptr;
  CHECK(wkb_check_structure(hj, c.p, &passed, &report) == WKB_OK);
  CHECK(passed == 1);
  wkb_free_string(report);
  CHECK(wkb_hj_write_breakpoints_csv(hj, c.p, temp_file("bp.csv").c_str()) == WKB_OK);
  CHECK(wkb_hj_write_values_csv(hj, c.p, 0.1, temp_file("hv.csv").c_str()) == WKB_OK);
  wkb_hj_free(hj);

  wkb_dp* dp = nullptr;
  REQUIRE(wkb_dp_solve(c.p, 5.0, 1e-3, &dp) == WKB_OK);
  size_t steps = 0;
  double dt = 0.0;
  wkb_dp_steps(dp, &steps, &dt);
  CHECK(steps == 5000);
  wkb_dp_value(dp, steps, 1, &v);
  CHECK(std::abs(v + 1.0) < 5e-3);
  CHECK(wkb_dp_write_path_csv(dp, c.p, 5.0, 1, temp_file("path.csv").c_str()) == WKB_OK);
  CHECK(wkb_dp_write_csv(dp, c.p, temp_file("dp.csv").c_str()) == WKB_OK);
  wkb_dp_free(dp);

  CHECK(wkb_equilibria_write_csv(c.p, temp_file("eq.csv").c_str(), &passed) == WKB_OK);
  CHECK(passed == 1);
}

TEST_CASE("Monte Carlo entry points") {
  Config c("s1.yaml");
  double est = 0.0, se = 0.0, ref = 0.0;
  REQUIRE(wkb_fk_estimate(c.p, 0.3, 1.0, 1, 20000, 5, &est, &se, &ref) == WKB_OK);
  CHECK(std::abs(est - ref) < 4.0 * se);
  const double times[] = {1.0};
  const size_t states[] = {1};
  const double eps[] = {0.2, 0.1};
  double elp[2] = {0.0, 0.0};
  CHECK(wkb_ldp_point_check(c.p, 0, 1, times, states, 2.0, 0.25, 2, eps, elp) == WKB_OK);
  CHECK(elp[1] == doctest::Approx(0.1 * (std::log(0.5) - 10.0) - 0.1 * 2.0 * std::exp(-10.0)));
  double bound = 0.0, sampled = 0.0;
  CHECK(wkb_jump_tail(c.p, 0.5, 2.0, 0, 1, 20000, 3, &bound, &sampled) == WKB_OK);
  CHECK(bound == doctest::Approx(2.0 * std::exp(-2.0)));
  CHECK(sampled < bound);
}

TEST_CASE("PDE through handles") {
  Config c("logistic_pde.yaml");
  CHECK(wkb_config_has_scenario(c.p) == 0);
  wkb_pde_params p{};
  REQUIRE(wkb_config_get_pde(c.p, &p) == WKB_OK);
  CHECK(p.L == 4.0);
  p.t_max = 0.5;
  wkb_pde* pde = nullptr;
  REQUIRE(wkb_simulate_pde(c.p, &p, &pde) == WKB_OK);
  int passed = 0;
  double margin = 0.0;
  CHECK(wkb_pde_check_resource_bounds(pde, &passed, &margin) == WKB_OK);
  CHECK(passed == 1);
  double lo = 0.0, hi = 0.0;
  CHECK(wkb_pde_max_w_range(pde, 0.1, &lo, &hi) == WKB_OK);
  CHECK(lo <= hi);
  CHECK(hi < 0.1);
  CHECK(wkb_pde_write_csv(pde, temp_file("snap.csv").c_str(), temp_file("diag.csv").c_str()) == WKB_OK);
  CHECK(first_line(temp_file("snap.csv")) == "t,x,u,w");
  wkb_pde_free(pde);

  wkb_trajectory* tr = nullptr;
  CHECK(wkb_simulate_finite(c.p, 0.1, 1.0, 0.1, &tr) == WKB_ERR_INVALID_ARGUMENT);
}

TEST_CASE("hypothesis failures map to their status") {
  const char* text = R"(traits: [a, b]
costs: [[0, 1], [1, 0]]
psi: [[1, 1]]
model: {family: chemostat, params: {d: [1, 1], c: [2, 2], alpha: [1]}}
h: [0, 0]
run: {eps_list: [0.1]}
)";
  wkb_config* cfg = nullptr;
  REQUIRE(wkb_config_load_text(text, &cfg) == WKB_OK);
  wkb_hj* hj = nullptr;
  CHECK(wkb_evolve_hj(cfg, 1.0, &hj) == WKB_ERR_HYPOTHESIS);
  CHECK(std::string(wkb_last_error_kind()) == "NonHyperbolic");
  wkb_config_free(cfg);
}

TEST_CASE("study") {
  Config c("s1.yaml");
  const double eps[] = {0.2, 0.1};
  wkb_run_params run{};
  wkb_config_get_run(c.p, &run);
  run.n_eps = 2;
  run.eps = eps;
  REQUIRE(wkb_config_set_run(c.p, &run) == WKB_OK);
  int passed = -2;
  char* summary = nullptr;
  const std::string csv = temp_file("study.csv");
  REQUIRE(wkb_run_study(c.p, csv.c_str(), &passed, &summary) == WKB_OK);
  CHECK(passed == 1);
  CHECK(first_line(csv) == "eps,error,runtime_s,mass_bounds,status");
  wkb_free_string(summary);
}
