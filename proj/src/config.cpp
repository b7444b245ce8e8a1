#include "wkblab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wkblab/csv.hpp"
#include "wkblab/error.hpp"

namespace wkb {

namespace {

[[noreturn]] void schema_error(const std::string& key, const YAML::Node& node, const std::string& what) {
  std::ostringstream os;
  os << key << ": " << what;
  if (node.IsDefined() && node.Mark().line >= 0) os << " (line " << node.Mark().line + 1 << ")";
  throw Error(ErrorCode::Schema, os.str());
}

std::string index_key(const std::string& key, std::size_t i) {
  return key + "[" + std::to_string(i) + "]";
}

double read_number(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) schema_error(key, n, "expected a number");
  std::string text = n.Scalar();
  std::string lower = text;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (const char* p : {"inf", "+inf", ".inf", "+.inf", "infinity"})
    if (lower == p) return kInf;
  for (const char* p : {"-inf", "-.inf", "-infinity"})
    if (lower == p) return -kInf;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last || std::isnan(value))
    schema_error(key, n, "expected a number, got '" + text + "'");
  return value;
}

double read_finite(const YAML::Node& n, const std::string& key) {
  const double x = read_number(n, key);
  if (!std::isfinite(x)) schema_error(key, n, "expected a finite number");
  return x;
}

double read_positive(const YAML::Node& n, const std::string& key) {
  const double x = read_finite(n, key);
  if (!(x > 0.0)) schema_error(key, n, "must be positive");
  return x;
}

std::vector<double> read_list(const YAML::Node& n, const std::string& key, bool finite = true) {
  if (!n.IsSequence()) schema_error(key, n, "expected a list");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i)
    out.push_back(finite ? read_finite(n[i], index_key(key, i)) : read_number(n[i], index_key(key, i)));
  return out;
}

std::vector<double> read_list_of(const YAML::Node& n, const std::string& key, std::size_t len) {
  auto v = read_list(n, key);
  if (v.size() != len)
    schema_error(key, n, "expected " + std::to_string(len) + " entries, got " + std::to_string(v.size()));
  return v;
}

std::vector<std::vector<double>> read_matrix(const YAML::Node& n, const std::string& key, bool finite) {
  if (!n.IsSequence() || n.size() == 0) schema_error(key, n, "expected a nonempty list of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n.size(); ++i) {
    rows.push_back(read_list(n[i], index_key(key, i), finite));
    if (rows.back().size() != rows.front().size())
      schema_error(index_key(key, i), n[i], "row length differs from row 0");
  }
  return rows;
}

const YAML::Node require(const YAML::Node& map, const std::string& name, const std::string& parent) {
  const YAML::Node n = map[name];
  if (!n.IsDefined() || n.IsNull()) schema_error(parent.empty() ? name : parent + "." + name, map, "missing");
  return n;
}

void check_keys(const YAML::Node& map, const std::string& key, std::set<std::string> allowed) {
  if (!map.IsMap()) schema_error(key.empty() ? "<root>" : key, map, "expected a mapping");
  for (const auto& kv : map) {
    const auto name = kv.first.as<std::string>();
    if (!allowed.count(name))
      schema_error(key.empty() ? name : key + "." + name, kv.first, "unknown key");
  }
}

std::optional<double> read_optional(const YAML::Node& map, const std::string& name, const std::string& parent) {
  const YAML::Node n = map[name];
  if (!n.IsDefined() || n.IsNull()) return std::nullopt;
  return read_positive(n, parent + "." + name);
}

Scenario read_scenario(const YAML::Node& root) {
  const YAML::Node traits_n = require(root, "traits", "");
  if (!traits_n.IsSequence() || traits_n.size() == 0) schema_error("traits", traits_n, "expected a nonempty list");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < traits_n.size(); ++i) {
    if (!traits_n[i].IsScalar()) schema_error(index_key("traits", i), traits_n[i], "expected a label");
    labels.push_back(traits_n[i].Scalar());
  }
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    schema_error("traits", traits_n, "labels must be distinct");
  const std::size_t n = labels.size();

  const YAML::Node costs_n = require(root, "costs", "");
  const auto cost_rows = read_matrix(costs_n, "costs", false);
  if (cost_rows.size() != n || cost_rows[0].size() != n)
    schema_error("costs", costs_n, "expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  std::vector<double> cost_flat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = cost_rows[i][j];
      if (i != j && !(c > 0.0))
        schema_error(index_key(index_key("costs", i), j), costs_n[i][j], "off-diagonal cost must be positive or inf");
      if (i == j && c != 0.0)
        schema_error(index_key(index_key("costs", i), j), costs_n[i][j], "diagonal cost must be 0");
      cost_flat.push_back(i == j ? 0.0 : c);
    }

  const YAML::Node psi_n = require(root, "psi", "");
  const auto psi_rows = read_matrix(psi_n, "psi", true);
  if (psi_rows[0].size() != n)
    schema_error("psi", psi_n, "each row needs " + std::to_string(n) + " entries");
  std::vector<double> psi_flat;
  for (std::size_t l = 0; l < psi_rows.size(); ++l)
    for (std::size_t j = 0; j < n; ++j) {
      if (!(psi_rows[l][j] > 0.0))
        schema_error(index_key(index_key("psi", l), j), psi_n[l][j], "must be positive");
      psi_flat.push_back(psi_rows[l][j]);
    }
  const std::size_t r = psi_rows.size();

  const YAML::Node model_n = require(root, "model", "");
  check_keys(model_n, "model", {"family", "params", "A", "M", "v_min", "v_max"});
  const YAML::Node fam_n = require(model_n, "family", "model");
  if (!fam_n.IsScalar()) schema_error("model.family", fam_n, "expected a family name");
  const std::string fam = fam_n.Scalar();
  const YAML::Node params = require(model_n, "params", "model");
  GrowthFamily family;
  if (fam == "chemostat") {
    check_keys(params, "model.params", {"d", "c", "alpha"});
    Chemostat ch;
    ch.d = read_list_of(require(params, "d", "model.params"), "model.params.d", n);
    ch.c = read_list_of(require(params, "c", "model.params"), "model.params.c", n);
    ch.alpha = read_list_of(require(params, "alpha", "model.params"), "model.params.alpha", r);
    family = ch;
  } else if (fam == "lotka_volterra") {
    check_keys(params, "model.params", {"r", "c"});
    if (r != n) schema_error("psi", psi_n, "lotka_volterra needs one resource per trait");
    LotkaVolterra lv;
    lv.r = read_list_of(require(params, "r", "model.params"), "model.params.r", n);
    lv.c = read_list_of(require(params, "c", "model.params"), "model.params.c", n);
    family = lv;
  } else if (fam == "table") {
    check_keys(params, "model.params", {"base", "slope"});
    AffineTable t;
    t.base = read_list_of(require(params, "base", "model.params"), "model.params.base", n);
    const YAML::Node slope_n = require(params, "slope", "model.params");
    const auto rows = read_matrix(slope_n, "model.params.slope", true);
    if (rows.size() != n || rows[0].size() != r)
      schema_error("model.params.slope", slope_n,
                   "expected a " + std::to_string(n) + "x" + std::to_string(r) + " matrix");
    for (const auto& row : rows) t.slope.insert(t.slope.end(), row.begin(), row.end());
    family = t;
  } else {
    schema_error("model.family", fam_n, "unknown family '" + fam + "' (chemostat, lotka_volterra, table)");
  }
  DeclaredBounds declared;
  declared.A = read_optional(model_n, "A", "model");
  declared.M = read_optional(model_n, "M", "model");
  declared.v_min = read_optional(model_n, "v_min", "model");
  declared.v_max = read_optional(model_n, "v_max", "model");

  const YAML::Node h_n = require(root, "h", "");
  auto h = read_list_of(h_n, "h", n);

  try {
    return Scenario(TraitSpace(labels), MutationCosts(n, cost_flat), ResourceWeights(r, n, psi_flat),
                    GrowthModel(family, declared), InitialExponent(h));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::DimensionMismatch)
      schema_error("model", model_n, e.what());
    throw;
  }
}

RunParams read_run(const YAML::Node& root, bool need_eps) {
  RunParams run;
  const YAML::Node n = root["run"];
  if (!n.IsDefined() || n.IsNull()) {
    if (need_eps) schema_error("run", root, "missing");
    return run;
  }
  check_keys(n, "run", {"eps_list", "t_max", "dt_out", "seed", "dt"});
  if (n["eps_list"].IsDefined()) {
    run.eps_list = read_list(n["eps_list"], "run.eps_list");
    for (std::size_t i = 0; i < run.eps_list.size(); ++i) {
      if (!(run.eps_list[i] > 0.0))
        schema_error(index_key("run.eps_list", i), n["eps_list"][i], "must be positive");
      if (i > 0 && !(run.eps_list[i] < run.eps_list[i - 1]))
        schema_error(index_key("run.eps_list", i), n["eps_list"][i], "eps_list must be strictly decreasing");
    }
  }
  if (need_eps && run.eps_list.empty()) schema_error("run.eps_list", n, "missing or empty");
  if (n["t_max"].IsDefined()) run.t_max = read_positive(n["t_max"], "run.t_max");
  if (n["dt_out"].IsDefined()) run.dt_out = read_positive(n["dt_out"], "run.dt_out");
  if (n["dt"].IsDefined()) run.dt = read_positive(n["dt"], "run.dt");
  if (n["seed"].IsDefined()) {
    const YAML::Node s = n["seed"];
    const std::string text = s.IsScalar() ? s.Scalar() : std::string();
    std::uint64_t seed = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
      schema_error("run.seed", s, "expected a non-negative integer");
    run.seed = seed;
  }
  return run;
}

Polynomial read_poly(const YAML::Node& n, const std::string& key) {
  Polynomial p;
  p.coef = read_list(n, key);
  return p;
}

PdeParams read_pde(const YAML::Node& n) {
  check_keys(n, "pde", {"base", "uptake", "psi", "h", "v_min", "v_max", "eps", "t_max", "L", "dx", "dt"});
  PdeParams p;
  p.model.base = read_poly(require(n, "base", "pde"), "pde.base");
  const YAML::Node up = require(n, "uptake", "pde");
  p.model.uptake = read_list(up, "pde.uptake");
  if (p.model.uptake.empty()) schema_error("pde.uptake", up, "expected at least one resource");
  for (std::size_t l = 0; l < p.model.uptake.size(); ++l)
    if (!(p.model.uptake[l] > 0.0)) schema_error(index_key("pde.uptake", l), up[l], "must be positive");
  const YAML::Node psi = require(n, "psi", "pde");
  if (!psi.IsSequence() || psi.size() != p.model.uptake.size())
    schema_error("pde.psi", psi, "expected one polynomial per resource");
  for (std::size_t l = 0; l < psi.size(); ++l) p.model.psi.push_back(read_poly(psi[l], index_key("pde.psi", l)));
  p.model.h = read_poly(require(n, "h", "pde"), "pde.h");
  p.model.v_min = read_optional(n, "v_min", "pde");
  p.model.v_max = read_optional(n, "v_max", "pde");
  if (n["eps"].IsDefined()) p.eps = read_positive(n["eps"], "pde.eps");
  if (n["t_max"].IsDefined()) p.t_max = read_positive(n["t_max"], "pde.t_max");
  if (n["L"].IsDefined()) p.L = read_positive(n["L"], "pde.L");
  if (n["dx"].IsDefined()) p.dx = read_positive(n["dx"], "pde.dx");
  if (n["dt"].IsDefined()) p.dt = read_positive(n["dt"], "pde.dt");
  try {
    (void)pde_bounds(p.model, p.L, p.dx);
  } catch (const Error& e) {
    schema_error("pde", n, e.what());
  }
  return p;
}

}  // namespace

Config parse_config_text(const std::string& text, const std::string& id) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    std::ostringstream os;
    os << "<root>: malformed YAML: " << e.msg << " (line " << e.mark.line + 1 << ")";
    throw Error(ErrorCode::Schema, os.str());
  }
  check_keys(root, "", {"id", "traits", "costs", "psi", "model", "h", "run", "pde"});
  Config c;
  c.id = id;
  if (root["id"].IsDefined()) {
    if (!root["id"].IsScalar()) schema_error("id", root["id"], "expected a string");
    c.id = root["id"].Scalar();
  }
  const bool has_pde = root["pde"].IsDefined() && !root["pde"].IsNull();
  const bool has_finite = root["traits"].IsDefined();
  if (!has_pde && !has_finite) schema_error("traits", root, "missing (and no pde section)");
  if (has_finite) c.scenario = read_scenario(root);
  c.run = read_run(root, has_finite);
  if (has_pde) c.pde = read_pde(root["pde"]);
  return c;
}

Config parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), std::filesystem::path(path).stem().string());
}

namespace {

void emit_list(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << csv::num(x);
  out << YAML::EndSeq;
}

}  // namespace

std::string serialize_config(const Config& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << YAML::DoubleQuoted << c.id;
  if (c.scenario) {
    const Scenario& s = *c.scenario;
    const std::size_t n = s.size();
    out << YAML::Key << "traits" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto& l : s.traits().labels()) out << YAML::DoubleQuoted << l;
    out << YAML::EndSeq;
    out << YAML::Key << "costs" << YAML::Value << YAML::BeginSeq;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = s.costs()(i, j);
      emit_list(out, row);
    }
    out << YAML::EndSeq;
    out << YAML::Key << "psi" << YAML::Value << YAML::BeginSeq;
    for (std::size_t l = 0; l < s.resources(); ++l) {
      std::vector<double> row(n);
      for (std::size_t j = 0; j < n; ++j) row[j] = s.weights()(l, j);
      emit_list(out, row);
    }
    out << YAML::EndSeq;
    out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "family" << YAML::Value << std::string(s.model().family_name());
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    const auto& fam = s.model().family();
    if (const auto* ch = std::get_if<Chemostat>(&fam)) {
      out << YAML::Key << "d" << YAML::Value;
      emit_list(out, ch->d);
      out << YAML::Key << "c" << YAML::Value;
      emit_list(out, ch->c);
      out << YAML::Key << "alpha" << YAML::Value;
      emit_list(out, ch->alpha);
    } else if (const auto* lv = std::get_if<LotkaVolterra>(&fam)) {
      out << YAML::Key << "r" << YAML::Value;
      emit_list(out, lv->r);
      out << YAML::Key << "c" << YAML::Value;
      emit_list(out, lv->c);
    } else {
      const auto& t = std::get<AffineTable>(fam);
      out << YAML::Key << "base" << YAML::Value;
      emit_list(out, t.base);
      out << YAML::Key << "slope" << YAML::Value << YAML::BeginSeq;
      const std::size_t r = s.resources();
      for (std::size_t i = 0; i < n; ++i)
        emit_list(out, std::vector<double>(t.slope.begin() + static_cast<std::ptrdiff_t>(i * r),
                                           t.slope.begin() + static_cast<std::ptrdiff_t>((i + 1) * r)));
      out << YAML::EndSeq;
    }
    out << YAML::EndMap;
    const auto& d = s.model().declared();
    if (d.A) out << YAML::Key << "A" << YAML::Value << csv::num(*d.A);
    if (d.M) out << YAML::Key << "M" << YAML::Value << csv::num(*d.M);
    if (d.v_min) out << YAML::Key << "v_min" << YAML::Value << csv::num(*d.v_min);
    if (d.v_max) out << YAML::Key << "v_max" << YAML::Value << csv::num(*d.v_max);
    out << YAML::EndMap;
    out << YAML::Key << "h" << YAML::Value;
    emit_list(out, s.h().values());
  }
  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps_list" << YAML::Value;
  emit_list(out, c.run.eps_list);
  out << YAML::Key << "t_max" << YAML::Value << csv::num(c.run.t_max);
  out << YAML::Key << "dt_out" << YAML::Value << csv::num(c.run.dt_out);
  out << YAML::Key << "seed" << YAML::Value << std::to_string(c.run.seed);
  out << YAML::Key << "dt" << YAML::Value << csv::num(c.run.dt);
  out << YAML::EndMap;
  if (c.pde) {
    const auto& p = *c.pde;
    out << YAML::Key << "pde" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "base" << YAML::Value;
    emit_list(out, p.model.base.coef);
    out << YAML::Key << "uptake" << YAML::Value;
    emit_list(out, p.model.uptake);
    out << YAML::Key << "psi" << YAML::Value << YAML::BeginSeq;
    for (const auto& q : p.model.psi) emit_list(out, q.coef);
    out << YAML::EndSeq;
    out << YAML::Key << "h" << YAML::Value;
    emit_list(out, p.model.h.coef);
    if (p.model.v_min) out << YAML::Key << "v_min" << YAML::Value << csv::num(*p.model.v_min);
    if (p.model.v_max) out << YAML::Key << "v_max" << YAML::Value << csv::num(*p.model.v_max);
    out << YAML::Key << "eps" << YAML::Value << csv::num(p.eps);
    out << YAML::Key << "t_max" << YAML::Value << csv::num(p.t_max);
    out << YAML::Key << "L" << YAML::Value << csv::num(p.L);
    out << YAML::Key << "dx" << YAML::Value << csv::num(p.dx);
    out << YAML::Key << "dt" << YAML::Value << csv::num(p.dt);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace wkb
