#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wkblab/config.hpp"
#include "wkblab/core.hpp"
#include "wkblab/hj.hpp"

namespace wkb {

struct StudyRow {
  double eps = 0.0;
  double error = 0.0;    // max over output times and traits of |w - V|
  double runtime_s = 0.0;
  bool mass_ok = false;
  std::string status = "ok";  // error code name when the run failed
  std::string message;
};

struct StudyResult {
  std::string id;
  std::vector<double> eps_list;
  std::vector<StudyRow> rows;  // in eps_list order
  std::optional<bool> monotone;  // empty when fewer than two successful rows
  std::string monotone_note;
  bool hj_ok = false;
  std::string hj_message;
  StructureReport structure;
  double hj_runtime_s = 0.0;

  bool runs_ok() const;
  /// Every run finished, mass bounds and structure hold, errors decrease.
  bool all_passed() const;
};

/// evolve_hj once, then simulate_finite per eps concurrently; errors of one
/// eps are recorded in its row and do not stop the others.
StudyResult run_study(const Scenario& s, const std::string& id, const RunParams& run);

/// eps, error, runtime_s, mass_bounds, status
std::string study_csv(const StudyResult& r);
/// Human-readable verdict lines.
std::string study_summary(const StudyResult& r);

}  // namespace wkb
