/*
 * Copyright 2026 The shapeopt authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "shapeopt/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace shapeopt {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

using KvMap = std::map<std::string, std::string>;

KvMap parse_ini(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    kv[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

void flatten_json(const nlohmann::json& j, const std::string& prefix, KvMap& kv) {
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_json(value, path, kv);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& item : value) {
        if (!joined.empty()) joined += " ";
        if (item.is_number())
          joined += nlohmann::json(item).dump();
        else
          throw ConfigError(path, "arrays may contain numbers only");
      }
      kv[path] = joined;
    } else if (value.is_string()) {
      kv[path] = value.get<std::string>();
    } else {
      kv[path] = value.dump();
    }
  }
}

class KvReader {
 public:
  explicit KvReader(KvMap kv) : kv_(std::move(kv)) {}

  bool has(const std::string& path) const { return kv_.count(path) > 0; }

  std::string take_string(const std::string& path, const std::string& fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    return it->second;
  }

  double take_double(const std::string& path, double fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    return to_double(path, it->second);
  }

  std::optional<double> take_optional_double(const std::string& path,
                                             std::optional<double> fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    const std::string v = trim(it->second);
    if (v == "none" || v == "baseline" || v == "auto") return std::nullopt;
    return to_double(path, v);
  }

  int take_int(const std::string& path, int fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    const double d = to_double(path, it->second);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw ConfigError(path, "expected an integer");
    return i;
  }

  uint64_t take_uint64(const std::string& path, uint64_t fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    try {
      return std::stoull(it->second);
    } catch (...) {
      throw ConfigError(path, "expected a non-negative integer");
    }
  }

  bool take_bool(const std::string& path, bool fallback) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return fallback;
    used_.insert(path);
    std::string v = trim(it->second);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(path, "expected a boolean");
  }

  std::vector<double> take_double_list(const std::string& path) {
    auto it = kv_.find(path);
    if (it == kv_.end()) return {};
    used_.insert(path);
    std::vector<double> out;
    std::istringstream ss(it->second);
    std::string tok;
    while (ss >> tok) {
      // allow comma separators too
      if (!tok.empty() && tok.back() == ',') tok.pop_back();
      if (tok.empty()) continue;
      out.push_back(to_double(path, tok));
    }
    return out;
  }

  void reject_unused() const {
    for (const auto& [key, value] : kv_)
      if (!used_.count(key)) throw ConfigError(key, "unknown configuration key");
  }

 private:
  static double to_double(const std::string& path, const std::string& value) {
    const std::string v = trim(value);
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
      size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (...) {
      throw ConfigError(path, "expected a number, got '" + v + "'");
    }
  }

  KvMap kv_;
  std::set<std::string> used_;
};

RunConfig config_from_kv(KvMap kv) {
  RunConfig cfg;
  {
    // Preset first: file keys override its values.
    auto it = kv.find("preset");
    if (it != kv.end()) {
      cfg = preset_config(it->second);
      kv.erase(it);
    }
  }

  KvReader r(std::move(kv));

  const std::string kind = r.take_string("problem.kind", "annulus");
  if (kind != "annulus") throw ConfigError("problem.kind", "unknown problem kind '" + kind + "'");
  cfg.problem.n_s = r.take_int("problem.n_s", cfg.problem.n_s);
  if (cfg.problem.n_s < 3) throw ConfigError("problem.n_s", "needs at least 3 surface nodes");
  cfg.problem.layers = r.take_int("problem.layers", cfg.problem.layers);
  if (cfg.problem.layers < 1) throw ConfigError("problem.layers", "needs at least one layer");
  cfg.problem.outer_radius = r.take_double("problem.outer_radius", cfg.problem.outer_radius);
  if (cfg.problem.outer_radius <= 1.0)
    throw ConfigError("problem.outer_radius", "must exceed the unit surface radius");
  cfg.problem.gamma = r.take_double("problem.gamma", cfg.problem.gamma);
  if (cfg.problem.gamma < 0.0) throw ConfigError("problem.gamma", "must be >= 0");
  cfg.problem.source[0] = r.take_double("problem.source_x", cfg.problem.source[0]);
  cfg.problem.source[1] = r.take_double("problem.source_y", cfg.problem.source[1]);
  cfg.problem.source_width = r.take_double("problem.source_width", cfg.problem.source_width);
  if (cfg.problem.source_width <= 0.0) throw ConfigError("problem.source_width", "must be > 0");
  cfg.problem.n_targets = r.take_int("problem.n_targets", cfg.problem.n_targets);
  if (cfg.problem.n_targets < 0) throw ConfigError("problem.n_targets", "must be >= 0");
  cfg.problem.target_scale = r.take_double("problem.target_scale", cfg.problem.target_scale);
  cfg.problem.target_offset = r.take_double("problem.target_offset", cfg.problem.target_offset);
  cfg.problem.area_target = r.take_optional_double("problem.area_target", cfg.problem.area_target);
  cfg.problem.min_radius = r.take_optional_double("problem.min_radius", cfg.problem.min_radius);
  if (cfg.problem.min_radius && *cfg.problem.min_radius <= 0.0)
    throw ConfigError("problem.min_radius", "must be > 0");
  cfg.problem.radius_stride = r.take_int("problem.radius_stride", cfg.problem.radius_stride);
  if (cfg.problem.radius_stride < 1) throw ConfigError("problem.radius_stride", "must be >= 1");
  cfg.problem.omega = r.take_optional_double("problem.omega", cfg.problem.omega);
  if (cfg.problem.omega && (*cfg.problem.omega <= 0.0 || *cfg.problem.omega >= 1.0))
    throw ConfigError("problem.omega", "must lie in (0, 1)");

  const std::string pkind =
      r.take_string("parameterization.kind",
                    cfg.parameterization.kind == ParamKind::hicks_henne       ? "hicks_henne"
                    : cfg.parameterization.kind == ParamKind::ffd             ? "ffd"
                                                                              : "nonlinear_radial");
  if (pkind == "hicks_henne")
    cfg.parameterization.kind = ParamKind::hicks_henne;
  else if (pkind == "ffd")
    cfg.parameterization.kind = ParamKind::ffd;
  else if (pkind == "nonlinear_radial")
    cfg.parameterization.kind = ParamKind::nonlinear_radial;
  else
    throw ConfigError("parameterization.kind", "unknown parameterization '" + pkind + "'");
  cfg.parameterization.n_bumps = r.take_int("parameterization.n_bumps", cfg.parameterization.n_bumps);
  if (cfg.parameterization.n_bumps < 2 || cfg.parameterization.n_bumps % 2 != 0)
    throw ConfigError("parameterization.n_bumps", "needs an even count >= 2");
  {
    auto peaks = r.take_double_list("parameterization.peaks");
    if (!peaks.empty()) {
      for (double pk : peaks)
        if (!(pk > 0.0 && pk < 1.0))
          throw ConfigError("parameterization.peaks", "peaks must lie strictly inside (0, 1)");
      cfg.parameterization.peaks = std::move(peaks);
    }
  }
  cfg.parameterization.exponent =
      r.take_double("parameterization.exponent", cfg.parameterization.exponent);
  if (cfg.parameterization.exponent < 1.0)
    throw ConfigError("parameterization.exponent", "must be >= 1");
  cfg.parameterization.ffd_nx = r.take_int("parameterization.ffd_nx", cfg.parameterization.ffd_nx);
  cfg.parameterization.ffd_ny = r.take_int("parameterization.ffd_ny", cfg.parameterization.ffd_ny);
  if (cfg.parameterization.ffd_nx < 2 || cfg.parameterization.ffd_ny < 2)
    throw ConfigError("parameterization.ffd_nx", "FFD lattice needs at least 2x2 control points");
  cfg.parameterization.ffd_margin =
      r.take_double("parameterization.ffd_margin", cfg.parameterization.ffd_margin);
  if (cfg.parameterization.ffd_margin <= 0.0)
    throw ConfigError("parameterization.ffd_margin", "must be > 0");
  {
    auto box = r.take_double_list("parameterization.ffd_box");
    if (!box.empty()) {
      if (box.size() != 4)
        throw ConfigError("parameterization.ffd_box", "expected x_min x_max y_min y_max");
      if (!(box[1] > box[0] && box[3] > box[2]))
        throw ConfigError("parameterization.ffd_box", "extents must be increasing");
      cfg.parameterization.ffd_box = std::move(box);
    }
  }
  const std::string axis =
      r.take_string("parameterization.ffd_axis", cfg.parameterization.ffd_axis == 0 ? "x" : "y");
  if (axis == "x")
    cfg.parameterization.ffd_axis = 0;
  else if (axis == "y")
    cfg.parameterization.ffd_axis = 1;
  else
    throw ConfigError("parameterization.ffd_axis", "must be 'x' or 'y'");
  cfg.parameterization.n_basis = r.take_int("parameterization.n_basis", cfg.parameterization.n_basis);
  if (cfg.parameterization.n_basis < 1)
    throw ConfigError("parameterization.n_basis", "needs at least one basis function");
  cfg.parameterization.alpha = r.take_double("parameterization.alpha", cfg.parameterization.alpha);
  if (cfg.parameterization.alpha < 0.0) throw ConfigError("parameterization.alpha", "must be >= 0");
  cfg.parameterization.first_harmonic =
      r.take_int("parameterization.first_harmonic", cfg.parameterization.first_harmonic);
  if (cfg.parameterization.first_harmonic < 1)
    throw ConfigError("parameterization.first_harmonic", "must be >= 1");

  cfg.smoothing.eps1 = r.take_double("smoothing.eps1", cfg.smoothing.eps1);
  cfg.smoothing.eps2 = r.take_double("smoothing.eps2", cfg.smoothing.eps2);
  cfg.smoothing.eps3 = r.take_double("smoothing.eps3", cfg.smoothing.eps3);
  if (cfg.smoothing.eps1 < 0.0) throw ConfigError("smoothing.eps1", "must be >= 0");
  if (cfg.smoothing.eps2 < 0.0) throw ConfigError("smoothing.eps2", "must be >= 0");
  if (cfg.smoothing.eps3 < 0.0) throw ConfigError("smoothing.eps3", "must be >= 0");
  if (cfg.smoothing.eps1 == 0.0 && cfg.smoothing.eps2 == 0.0 && cfg.smoothing.eps3 == 0.0)
    throw ConfigError("smoothing.eps1", "at least one smoothing weight must be positive");
  const std::string form = r.take_string(
      "smoothing.formulation",
      cfg.smoothing.formulation == SmoothingFormulation::surface ? "surface" : "volume");
  if (form == "surface")
    cfg.smoothing.formulation = SmoothingFormulation::surface;
  else if (form == "volume")
    cfg.smoothing.formulation = SmoothingFormulation::volume;
  else
    throw ConfigError("smoothing.formulation", "must be 'surface' or 'volume'");
  cfg.smoothing.identity_as_matrix =
      r.take_bool("smoothing.identity_as_matrix", cfg.smoothing.identity_as_matrix);

  const std::string alg = r.take_string("optimizer.algorithm", [&] {
    switch (cfg.optimizer.algorithm) {
      case Algorithm::sqp_eq: return "sqp_eq";
      case Algorithm::sqp_mixed: return "sqp_mixed";
      case Algorithm::grad_desc: return "grad_desc";
      case Algorithm::oneshot: return "oneshot";
      case Algorithm::oneshot_constrained: return "oneshot_constrained";
    }
    return "sqp_mixed";
  }());
  if (alg == "sqp_eq")
    cfg.optimizer.algorithm = Algorithm::sqp_eq;
  else if (alg == "sqp_mixed")
    cfg.optimizer.algorithm = Algorithm::sqp_mixed;
  else if (alg == "grad_desc")
    cfg.optimizer.algorithm = Algorithm::grad_desc;
  else if (alg == "oneshot")
    cfg.optimizer.algorithm = Algorithm::oneshot;
  else if (alg == "oneshot_constrained")
    cfg.optimizer.algorithm = Algorithm::oneshot_constrained;
  else
    throw ConfigError("optimizer.algorithm", "unknown algorithm '" + alg + "'");
  cfg.optimizer.tol = r.take_double("optimizer.tol", cfg.optimizer.tol);
  if (cfg.optimizer.tol <= 0.0) throw ConfigError("optimizer.tol", "must be > 0");
  cfg.optimizer.max_iter = r.take_int("optimizer.max_iter", cfg.optimizer.max_iter);
  if (cfg.optimizer.max_iter < 0) throw ConfigError("optimizer.max_iter", "must be >= 0");
  cfg.optimizer.solve_tol = r.take_double("optimizer.solve_tol", cfg.optimizer.solve_tol);
  if (cfg.optimizer.solve_tol <= 0.0) throw ConfigError("optimizer.solve_tol", "must be > 0");
  cfg.optimizer.solve_max_iter =
      r.take_int("optimizer.solve_max_iter", cfg.optimizer.solve_max_iter);
  cfg.optimizer.step = r.take_double("optimizer.step", cfg.optimizer.step);
  if (cfg.optimizer.step <= 0.0) throw ConfigError("optimizer.step", "must be > 0");
  cfg.optimizer.inner_steps = r.take_int("optimizer.J", cfg.optimizer.inner_steps);
  if (cfg.optimizer.inner_steps < 1) throw ConfigError("optimizer.J", "must be >= 1");
  cfg.optimizer.max_design_update =
      r.take_double("optimizer.max_design_update", cfg.optimizer.max_design_update);
  if (!(cfg.optimizer.max_design_update > 0.0))
    throw ConfigError("optimizer.max_design_update", "must be > 0");
  cfg.optimizer.adjoint_carryover =
      r.take_bool("optimizer.adjoint_carryover", cfg.optimizer.adjoint_carryover);
  cfg.optimizer.step_cap = r.take_double("optimizer.step_cap", cfg.optimizer.step_cap);
  if (!(cfg.optimizer.step_cap > 0.0)) throw ConfigError("optimizer.step_cap", "must be > 0");
  const std::string reg = r.take_string(
      "optimizer.reg_mode", cfg.optimizer.reg_mode == RegularizeMode::fixed ? "fixed" : "auto");
  if (reg == "fixed")
    cfg.optimizer.reg_mode = RegularizeMode::fixed;
  else if (reg == "auto")
    cfg.optimizer.reg_mode = RegularizeMode::automatic;
  else
    throw ConfigError("optimizer.reg_mode", "must be 'fixed' or 'auto'");
  cfg.optimizer.reg_c = r.take_double("optimizer.reg_c", cfg.optimizer.reg_c);
  if (cfg.optimizer.reg_c < 0.0) throw ConfigError("optimizer.reg_c", "must be >= 0");

  cfg.output.directory = r.take_string("output.directory", cfg.output.directory);
  cfg.output.dump_mesh = r.take_bool("output.dump_mesh", cfg.output.dump_mesh);
  cfg.output.dump_operators = r.take_bool("output.dump_operators", cfg.output.dump_operators);
  cfg.output.deterministic_time =
      r.take_bool("output.deterministic_time", cfg.output.deterministic_time);

  cfg.seed = r.take_uint64("seed", cfg.seed);
  {
    auto p0 = r.take_double_list("p0");
    if (!p0.empty()) cfg.p0 = std::move(p0);
  }

  r.reject_unused();

  if (const char* env = std::getenv("SHAPEOPT_OUTPUT_DIR"); env != nullptr && *env != '\0')
    cfg.output.directory = env;
  return cfg;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"naca-analogue-sobolev", "onera-analogue-sobolev"};
}

RunConfig preset_config(const std::string& name) {
  RunConfig cfg;
  if (name == "naca-analogue-sobolev") {
    // Bump-function airfoil analogue: 38 bumps with peaks 0.05 .. 0.95 and
    // surface smoothing weights (1.0, 0.0625).
    cfg.problem.n_s = 64;
    cfg.problem.layers = 4;
    cfg.problem.gamma = 1e-2;
    cfg.problem.n_targets = 8;
    cfg.problem.min_radius = 0.6;
    cfg.problem.radius_stride = 4;
    cfg.parameterization.kind = ParamKind::hicks_henne;
    cfg.parameterization.n_bumps = 38;
    cfg.smoothing.eps1 = 1.0;
    cfg.smoothing.eps2 = 0.0625;
    cfg.smoothing.eps3 = 0.0;
    cfg.smoothing.formulation = SmoothingFormulation::surface;
    cfg.optimizer.algorithm = Algorithm::sqp_mixed;
    cfg.optimizer.tol = 1e-6;
    cfg.optimizer.max_iter = 30;
  } else if (name == "onera-analogue-sobolev") {
    // Lattice-parameterized analogue with the surface smoothing weights
    // (56.9, 0.9, 0.1) and a One Shot driver with 10 inner steps.
    cfg.problem.n_s = 64;
    cfg.problem.layers = 4;
    cfg.problem.gamma = 1e-2;
    cfg.problem.n_targets = 8;
    cfg.problem.min_radius = 0.6;
    cfg.problem.radius_stride = 8;
    cfg.parameterization.kind = ParamKind::ffd;
    cfg.parameterization.ffd_nx = 5;
    cfg.parameterization.ffd_ny = 5;
    cfg.smoothing.eps1 = 56.9;
    cfg.smoothing.eps2 = 0.9;
    cfg.smoothing.eps3 = 0.1;
    cfg.smoothing.formulation = SmoothingFormulation::surface;
    cfg.optimizer.algorithm = Algorithm::oneshot_constrained;
    cfg.optimizer.inner_steps = 10;
    cfg.optimizer.max_design_update = 5e-3;
    cfg.optimizer.max_iter = 200;
    cfg.optimizer.tol = 1e-6;
  } else {
    throw ConfigError("preset", "unknown preset '" + name + "'");
  }
  cfg.preset = name;
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  KvMap kv;
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("<json>", e.what());
    }
    flatten_json(j, "", kv);
  } else {
    kv = parse_ini(text);
  }
  return config_from_kv(std::move(kv));
}

RunConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace shapeopt
