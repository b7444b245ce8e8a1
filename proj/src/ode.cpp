#include "wkblab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wkblab/error.hpp"

namespace wkb {

void hermite(const OdeStep& s, double t, std::span<double> out) {
  const double h = s.t1 - s.t0;
  if (h <= 0.0) {
    std::copy(s.y1.begin(), s.y1.end(), out.begin());
    return;
  }
  const double th = (t - s.t0) / h;
  const double th2 = th * th;
  const double th3 = th2 * th;
  const double h00 = 2 * th3 - 3 * th2 + 1;
  const double h10 = th3 - 2 * th2 + th;
  const double h01 = -2 * th3 + 3 * th2;
  const double h11 = th3 - th2;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = h00 * s.y0[k] + h10 * h * s.f0[k] + h01 * s.y1[k] + h11 * h * s.f1[k];
}

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b - bhat (error weights).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

OdeResult integrate_dopri(const OdeRhs& rhs, double t0, double t1, std::vector<double>& y,
                          const OdeOptions& opt, const OdeHooks& hooks) {
  OdeResult res;
  res.t_end = t0;
  const std::size_t n = y.size();
  if (!(t1 > t0) || n == 0) return res;

  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n);
  auto sc = [&](double a, double b) {
    return opt.atol + opt.rtol * std::max(std::abs(a), std::abs(b));
  };

  if (hooks.before_attempt) hooks.before_attempt();
  rhs(t0, y, k1);

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = sc(y[i], y[i]);
      d0 += (y[i] / s) * (y[i] / s);
      d1 += (k1[i] / s) * (k1[i] / s);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, 1e-2);
  }
  h = std::min({h, opt.max_step, t1 - t0});

  double t = t0;
  double err_prev = 1e-4;
  bool last_rejected = false;
  while (t < t1) {
    if (res.accepted + res.rejected >= opt.max_steps) {
      std::ostringstream os;
      os << "step budget exhausted at t=" << t;
      throw Error(ErrorCode::StepFailure, os.str());
    }
    if (h < opt.min_step * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow (h=" << h << ") at t=" << t;
      throw Error(ErrorCode::StepFailure, os.str());
    }
    bool final_step = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1))) {
      h = t1 - t;
      final_step = true;
    }
    if (hooks.before_attempt && res.accepted + res.rejected > 0) hooks.before_attempt();

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    rhs(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, ynew, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double r = e / sc(y[i], ynew[i]);
      err += r * r;
    }
    err = std::sqrt(err / n);
    if (!std::isfinite(err)) err = 1e10;

    if (err <= 1.0) {
      const double t_new = final_step ? t1 : t + h;
      OdeStep step{t, t_new, y, k1, ynew, k7};
      ++res.accepted;
      bool keep_going = true;
      if (hooks.on_accept) keep_going = hooks.on_accept(step);
      y.swap(ynew);
      k1.swap(k7);
      t = t_new;
      res.t_end = t;
      if (!keep_going) {
        res.stopped_early = t < t1;
        return res;
      }
      // PI controller (Hairer's beta = 0.04).
      double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04);
      if (err == 0.0) fac = 5.0;
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * fac, opt.max_step);
      err_prev = std::max(err, 1e-4);
      last_rejected = false;
    } else {
      ++res.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
  return res;
}

}  // namespace wkb
