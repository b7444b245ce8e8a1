#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wkblab/core.hpp"
#include "wkblab/pde1d.hpp"

namespace wkb {

struct RunParams {
  std::vector<double> eps_list;  // strictly decreasing
  double t_max = 5.0;
  double dt_out = 0.01;
  std::uint64_t seed = 0;
  double dt = 1e-3;  // DP step
  bool operator==(const RunParams&) const = default;
};

struct PdeParams {
  PdeModel model;
  double eps = 0.1;
  double t_max = 2.0;
  double L = 4.0;
  double dx = 0.02;
  double dt = 2.5e-4;
  bool operator==(const PdeParams&) const = default;
};

/// A parsed config file. At least one of `scenario` and `pde` is present.
struct Config {
  std::string id;
  std::optional<Scenario> scenario;
  RunParams run;
  std::optional<PdeParams> pde;
  bool operator==(const Config&) const = default;
};

/// Throws Error(Schema) naming the key path and line, Error(Io) for
/// unreadable files. Structural checks only; the standing assumptions are
/// left to validate_scenario.
Config parse_config(const std::string& path);
Config parse_config_text(const std::string& text, const std::string& id = "config");

/// YAML text that parses back to an equal Config.
std::string serialize_config(const Config& c);

}  // namespace wkb
