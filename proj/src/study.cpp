#include "wkblab/study.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"
#include "wkblab/finite_ode.hpp"

namespace wkb {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StudyRow run_one(const Scenario& s, const ValueFunction* vf, double eps, const RunParams& run) {
  StudyRow row;
  row.eps = eps;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Trajectory tr = simulate_finite(s, eps, run.t_max, run.dt_out);
    row.mass_ok = check_mass_bounds(tr, s).passed;
    if (vf) {
      double e = 0.0;
      for (std::size_t k = 0; k < tr.times.size(); ++k) {
        const auto V = vf->values(tr.times[k]);
        for (std::size_t i = 0; i < V.size(); ++i) e = std::max(e, std::abs(tr.w[k][i] - V[i]));
      }
      row.error = e;
    } else {
      row.error = std::nan("");
    }
  } catch (const Error& e) {
    row.status = to_string(e.code());
    row.message = e.what();
    row.error = std::nan("");
  } catch (const std::exception& e) {
    row.status = "Internal";
    row.message = e.what();
    row.error = std::nan("");
  }
  row.runtime_s = seconds_since(t0);
  return row;
}

}  // namespace

bool StudyResult::runs_ok() const {
  if (!hj_ok) return false;
  for (const auto& r : rows)
    if (r.status != "ok") return false;
  return true;
}

bool StudyResult::all_passed() const {
  if (!runs_ok() || !structure.passed() || monotone == false) return false;
  for (const auto& r : rows)
    if (!r.mass_ok) return false;
  return true;
}

StudyResult run_study(const Scenario& s, const std::string& id, const RunParams& run) {
  if (run.eps_list.empty()) throw Error(ErrorCode::InvalidArgument, "eps_list is empty");
  for (std::size_t k = 1; k < run.eps_list.size(); ++k)
    if (!(run.eps_list[k] < run.eps_list[k - 1]))
      throw Error(ErrorCode::InvalidArgument, "eps_list must be strictly decreasing");
  StudyResult res;
  res.id = id;
  res.eps_list = run.eps_list;

  std::optional<HjResult> hj;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    hj = evolve_hj(s, run.t_max);
    res.structure = check_structure(hj->vf, s);
    res.hj_ok = true;
  } catch (const Error& e) {
    res.hj_message = e.what();
  }
  res.hj_runtime_s = seconds_since(t0);

  const ValueFunction* vf = hj ? &hj->vf : nullptr;
  std::vector<std::future<StudyRow>> jobs;
  for (double eps : run.eps_list)
    jobs.push_back(std::async(std::launch::async, run_one, std::cref(s), vf, eps, std::cref(run)));
  for (auto& j : jobs) res.rows.push_back(j.get());

  std::vector<double> errs;
  for (const auto& r : res.rows)
    if (r.status == "ok" && std::isfinite(r.error)) errs.push_back(r.error);
  if (errs.size() < 2) {
    res.monotone_note = "monotonicity check vacuous: fewer than two eps values with an error";
  } else {
    bool dec = true;
    for (std::size_t k = 1; k < errs.size(); ++k) dec = dec && errs[k] < errs[k - 1];
    res.monotone = dec;
    res.monotone_note = dec ? "error strictly decreasing in eps" : "error not strictly decreasing in eps";
  }
  return res;
}

std::string study_csv(const StudyResult& r) {
  std::string out = csv::row({"eps", "error", "runtime_s", "mass_bounds", "status"});
  for (const auto& row : r.rows)
    out += csv::row({csv::num(row.eps), csv::num(row.error), csv::num(row.runtime_s),
                     row.mass_ok ? "pass" : "fail", row.status});
  return out;
}

std::string study_summary(const StudyResult& r) {
  std::ostringstream os;
  os << "study " << r.id << "\n";
  os << "hj: " << (r.hj_ok ? "ok" : r.hj_message) << " (" << r.hj_runtime_s << " s)\n";
  if (r.hj_ok) {
    os << "structure: " << (r.structure.passed() ? "pass" : "fail") << "\n";
    for (const auto& f : r.structure.failures) os << "  " << f << "\n";
  }
  for (const auto& row : r.rows) {
    os << "eps=" << row.eps << " error=" << row.error << " runtime=" << row.runtime_s
       << "s mass_bounds=" << (row.mass_ok ? "pass" : "fail");
    if (row.status != "ok") os << " " << row.message;
    os << "\n";
  }
  os << r.monotone_note << "\n";
  os << "verdict: " << (r.all_passed() ? "pass" : "fail") << "\n";
  return os.str();
}

}  // namespace wkb
