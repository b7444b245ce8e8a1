#include <doctest.h>

#include <cmath>

#include "scenarios.hpp"
#include "wkblab/finite_ode.hpp"
#include "wkblab/pde1d.hpp"

using namespace wkb;

namespace {

PdeModel logistic() {
  PdeModel m;
  m.base = {{1.0}};
  m.uptake = {1.0};
  m.psi = {Polynomial{{1.0}}};
  m.h = {{0.0, 0.0, 0.1}};
  m.v_min = 0.5;
  m.v_max = 2.0;
  return m;
}

double trapezoid(const PdeGrid& g, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) s += g.weight[k] * f[k];
  return s;
}

}  // namespace

TEST_CASE("polynomials") {
  const Polynomial p{{1.0, -2.0, 3.0}};
  CHECK(p(2.0) == 9.0);
  CHECK(p.derivative().coef == std::vector<double>{-2.0, 6.0});
  CHECK(Polynomial{}(3.0) == 0.0);
  CHECK(Polynomial{{4.0}}.derivative()(1.0) == 0.0);
}

TEST_CASE("grid geometry") {
  const PdeGrid g = make_grid(1.0, 0.25);
  CHECK(g.size() == 9);
  CHECK(g.x.front() == -1.0);
  CHECK(g.x.back() == 1.0);
  CHECK(trapezoid(g, std::vector<double>(9, 1.0)) == doctest::Approx(2.0));
  CHECK(make_grid(0.0, 0.5).size() == 1);
  CHECK_THROWS_AS(make_grid(1.0, 0.3), Error);
}

TEST_CASE("logistic mass follows the closed form") {
  const double eps = 0.1;
  const FieldHistory hist = simulate_pde(logistic(), eps, 1.0, 4.0, 0.02, 2.5e-4);
  const double m0 = hist.mass.front();
  CHECK(m0 == doctest::Approx(std::sqrt(M_PI * eps / 0.1)).epsilon(1e-6));
  double worst = 0.0;
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    const double exact = 1.0 / (1.0 + (1.0 / m0 - 1.0) * std::exp(-hist.times[k] / eps));
    worst = std::max(worst, std::abs(hist.mass[k] - exact));
    CHECK(hist.v[k][0] == doctest::Approx(hist.mass[k]));
  }
  CHECK(worst < 2e-3);
}

TEST_CASE("w starts at -h and keeps its maximum near zero") {
  const FieldHistory hist = simulate_pde(logistic(), 0.1, 1.0, 4.0, 0.02, 2.5e-4);
  const WkbTrack tr = wkb_extract(hist);
  for (std::size_t k = 0; k < hist.grid.size(); ++k) {
    const double x = hist.grid.x[k];
    CHECK(tr.w[0][k] == doctest::Approx(-0.1 * x * x).epsilon(1e-12));
  }
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    if (hist.times[k] < 0.1) continue;
    CHECK(std::abs(tr.max_w[k]) < 0.1);
    CHECK(std::abs(tr.argmax_x[k]) < 1e-12);
  }
}

TEST_CASE("maximum stays at the fittest trait") {
  PdeModel m;
  m.base = {{1.0, 0.0, -1.0}};
  m.uptake = {1.0};
  m.psi = {Polynomial{{1.0}}};
  m.h = {{0.0, 0.0, 1.0}};
  m.v_min = 0.1;
  m.v_max = 2.0;
  const FieldHistory hist = simulate_pde(m, 0.1, 1.0, 3.0, 0.02, 2.5e-4);
  const WkbTrack tr = wkb_extract(hist);
  for (double x : tr.argmax_x) CHECK(std::abs(x) < 1e-12);
}

TEST_CASE("a single cell without diffusion reproduces the finite ODE") {
  PdeModel m;
  m.base = {{1.0}};
  m.uptake = {1.0};
  m.psi = {Polynomial{{1.0}}};
  m.h = {{0.3}};
  m.v_min = 0.5;
  m.v_max = 2.0;
  PdeOptions opt;
  opt.diffusion = false;
  opt.check_initial_mass = false;
  opt.dt_out = 0.1;
  const double eps = 0.2;
  const FieldHistory hist = simulate_pde(m, eps, 2.0, 0.0, 1.0, 1e-5, opt);
  const Scenario s(TraitSpace({"x"}), MutationCosts(1, {0.0}), ResourceWeights(1, 1, {1.0}),
                   GrowthModel(AffineTable{{1.0}, {-1.0}}), InitialExponent({0.3}));
  SimulateOptions sopt;
  sopt.check_initial_mass = false;
  const Trajectory tr = simulate_finite(s, eps, 2.0, 0.1, sopt);
  REQUIRE(tr.times.size() == hist.times.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    CHECK(hist.u[k][0] == doctest::Approx(tr.u[k][0]).epsilon(1e-3));
}

TEST_CASE("resource bounds hold and fail for a doubled field") {
  const PdeModel m = logistic();
  FieldHistory hist = simulate_pde(m, 0.1, 2.0, 4.0, 0.02, 2.5e-4);
  const PdeBounds b = pde_bounds(m, 4.0, 0.02);
  const auto rep = check_resource_bounds(hist, b);
  CHECK(rep.passed());
  CHECK_FALSE(rep.vacuous);
  CHECK(rep.min_margin > 0.0);
  for (auto& v : hist.v)
    for (double& x : v) x *= 2.5;
  for (double& x : hist.mass) x *= 2.5;
  const auto bad = check_resource_bounds(hist, b);
  CHECK_FALSE(bad.passed());
  REQUIRE(bad.first_violation);
}

TEST_CASE("bound slack scales with eps squared") {
  const PdeModel m = logistic();
  const PdeBounds b = pde_bounds(m, 4.0, 0.02);
  const auto a = check_resource_bounds(simulate_pde(m, 0.1, 0.2, 4.0, 0.02, 2.5e-4), b);
  const auto c = check_resource_bounds(simulate_pde(m, 0.05, 0.2, 4.0, 0.02, 2.5e-4), b);
  CHECK(a.slack[0] == doctest::Approx(4.0 * c.slack[0]));
  CHECK(a.alternate_slack[0] == doctest::Approx(4.0 * c.alternate_slack[0]));
}

TEST_CASE("spatial Lipschitz constant of w is uniform in eps") {
  const PdeModel m = logistic();
  const auto a = wkb_extract(simulate_pde(m, 0.1, 1.0, 4.0, 0.02, 2.5e-4));
  const auto c = wkb_extract(simulate_pde(m, 0.05, 1.0, 4.0, 0.02, 2.5e-4));
  const double ratio = a.lipschitz_x / c.lipschitz_x;
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
}

TEST_CASE("mass reaching the boundary is reported") {
  PdeModel m = logistic();
  m.h = {{0.0}};
  PdeOptions opt;
  opt.check_initial_mass = false;
  try {
    (void)simulate_pde(m, 0.1, 0.1, 1.0, 0.05, 1e-3, opt);
    FAIL("expected MassEscape");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MassEscape);
  }
}

TEST_CASE("time step above eps dx is rejected") {
  CHECK_THROWS_AS(simulate_pde(logistic(), 0.1, 1.0, 4.0, 0.02, 0.01), Error);
}
