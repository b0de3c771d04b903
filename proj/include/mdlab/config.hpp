#pragma once

// TOML experiment files.
//
//   scenario = "radius_study"          # convergence | cond_sweep | minres_sweep | radius_study
//                                      # | mean_study | layered_study | p2p1_study
//   name = "disk"
//
//   [geometry]
//   domain = "disk"                    # disk | square
//   inclusion = "circle"               # circle | square_contour
//
//   [grids]
//   eps = [1e-1, 1e-2, 1e-3]
//   kappa = [1.0]
//   kappa_dot = [1e-8, 1.0, 1e8]
//
//   [mesh]
//   h = 0.25
//   level_min = 0
//   level_max = 3
//   degree = 1                         # domain elements; multipliers are always P1
//
//   [solver]
//   preconditioners = ["B1", "B0"]
//   method = "direct"                  # convergence: direct | minres
//   rhs = "manufactured"               # minres_sweep: manufactured | random
//   rtol = 1e-10
//   maxit = 400
//   stop_tol = 1e-3
//   dense_limit = 2000
//
//   [output]
//   dir = "out/radius"
//
// Every key is optional except `scenario`; defaults are those of ExperimentConfig.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "experiment.hpp"

namespace mdlab {

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<std::string> violations;
  std::string source;  // file contents, hashed into summaries
};

namespace detail {

class TomlReader {
 public:
  explicit TomlReader(std::vector<std::string>& out) : out_(out) {}

  void check_keys(const toml::table& t, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [k, v] : t) {
      if (!allowed.count(std::string(k.str()))) out_.push_back("unknown key '" + where + std::string(k.str()) + "'");
    }
  }

  void number(const toml::table& t, const char* key, double& dst) {
    if (const auto* n = t.get(key)) {
      if (auto x = n->value<double>(); x && (n->is_floating_point() || n->is_integer())) {
        dst = *x;
      } else {
        out_.push_back(std::string("'") + key + "' must be a number");
      }
    }
  }

  template <class Int>
  void integer(const toml::table& t, const char* key, Int& dst) {
    if (const auto* n = t.get(key)) {
      if (auto x = n->value<std::int64_t>(); x && n->is_integer()) {
        dst = static_cast<Int>(*x);
      } else {
        out_.push_back(std::string("'") + key + "' must be an integer");
      }
    }
  }

  void string(const toml::table& t, const char* key, std::string& dst) {
    if (const auto* n = t.get(key)) {
      if (auto x = n->value<std::string>(); x && n->is_string()) {
        dst = *x;
      } else {
        out_.push_back(std::string("'") + key + "' must be a string");
      }
    }
  }

  void numbers(const toml::table& t, const char* key, std::vector<double>& dst) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      out_.push_back(std::string("'") + key + "' must be an array of numbers");
      return;
    }
    dst.clear();
    for (const auto& e : *arr) {
      if (!(e.is_floating_point() || e.is_integer())) {
        out_.push_back(std::string("'") + key + "' must be an array of numbers");
        return;
      }
      dst.push_back(*e.value<double>());
    }
  }

  void strings(const toml::table& t, const char* key, std::vector<std::string>& dst) {
    const auto* n = t.get(key);
    if (!n) return;
    const auto* arr = n->as_array();
    if (!arr) {
      out_.push_back(std::string("'") + key + "' must be an array of strings");
      return;
    }
    dst.clear();
    for (const auto& e : *arr) {
      if (!e.is_string()) {
        out_.push_back(std::string("'") + key + "' must be an array of strings");
        return;
      }
      dst.push_back(*e.value<std::string>());
    }
  }

  const toml::table* section(const toml::table& root, const char* key) {
    const auto* n = root.get(key);
    if (!n) return nullptr;
    if (!n->is_table()) {
      out_.push_back(std::string("'") + key + "' must be a table");
      return nullptr;
    }
    return n->as_table();
  }

 private:
  std::vector<std::string>& out_;
};

}  // namespace detail

/// Reads a config from TOML text. Syntax errors throw Error(Io); schema
/// problems are collected in `violations` together with validate().
inline ParsedConfig parse_config(const std::string& text, const std::string& origin = "config") {
  ParsedConfig out;
  out.source = text;
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorCode::Io, std::string(e.description()) + " at line " + std::to_string(e.source().begin.line));
  }
  auto& c = out.config;
  auto& v = out.violations;
  detail::TomlReader rd(v);
  rd.check_keys(root, "", {"scenario", "name", "geometry", "grids", "mesh", "solver", "output"});

  std::string scenario;
  rd.string(root, "scenario", scenario);
  if (scenario.empty()) {
    v.emplace_back("scenario missing");
  } else {
    bool found = false;
    for (const auto& [k, name] : scenario_names()) {
      if (name == scenario) {
        c.scenario = k;
        found = true;
      }
    }
    if (!found) v.push_back("unknown scenario '" + scenario + "'");
  }
  rd.string(root, "name", c.name);

  if (const auto* g = rd.section(root, "geometry")) {
    rd.check_keys(*g, "geometry.", {"domain", "inclusion"});
    std::string domain, inclusion;
    rd.string(*g, "domain", domain);
    rd.string(*g, "inclusion", inclusion);
    if (domain == "disk") c.domain = DomainShape::Disk;
    else if (domain == "square") c.domain = DomainShape::Square;
    else if (!domain.empty()) v.push_back("unknown domain '" + domain + "'");
    if (inclusion == "circle") c.inclusion = InclusionShape::Circle;
    else if (inclusion == "square_contour") c.inclusion = InclusionShape::SquareContour;
    else if (!inclusion.empty()) v.push_back("unknown inclusion '" + inclusion + "'");
  }
  if (const auto* g = rd.section(root, "grids")) {
    rd.check_keys(*g, "grids.", {"eps", "kappa", "kappa_dot"});
    rd.numbers(*g, "eps", c.eps);
    rd.numbers(*g, "kappa", c.kappa);
    rd.numbers(*g, "kappa_dot", c.kappa_dot);
  }
  if (const auto* m = rd.section(root, "mesh")) {
    rd.check_keys(*m, "mesh.", {"h", "level_min", "level_max", "degree"});
    rd.number(*m, "h", c.h);
    rd.integer(*m, "level_min", c.level_min);
    rd.integer(*m, "level_max", c.level_max);
    rd.integer(*m, "degree", c.degree);
  }
  if (const auto* s = rd.section(root, "solver")) {
    rd.check_keys(*s, "solver.",
                  {"preconditioners", "method", "rhs", "rtol", "maxit", "stop_tol", "dense_limit"});
    std::vector<std::string> pres;
    rd.strings(*s, "preconditioners", pres);
    if (s->get("preconditioners")) {
      c.preconditioners.clear();
      for (const auto& p : pres) {
        if (p == "B1") c.preconditioners.push_back(PrecondVariant::B1);
        else if (p == "B0") c.preconditioners.push_back(PrecondVariant::B0);
        else v.push_back("unknown preconditioner '" + p + "'");
      }
    }
    rd.string(*s, "method", c.method);
    rd.string(*s, "rhs", c.rhs);
    rd.number(*s, "rtol", c.rtol);
    rd.integer(*s, "maxit", c.maxit);
    rd.number(*s, "stop_tol", c.stop_tol);
    rd.integer(*s, "dense_limit", c.dense_limit);
  }
  if (const auto* o = rd.section(root, "output")) {
    rd.check_keys(*o, "output.", {"dir"});
    rd.string(*o, "dir", c.out_dir);
  }
  for (auto& s : validate(c)) v.push_back(std::move(s));
  return out;
}

inline ParsedConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

/// The config as JSON, echoed into summaries.
inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = to_string(c.scenario);
  j["name"] = c.name;
  j["domain"] = c.domain == DomainShape::Disk ? "disk" : "square";
  j["inclusion"] = c.inclusion == InclusionShape::Circle ? "circle" : "square_contour";
  j["eps"] = c.eps;
  j["kappa"] = c.kappa;
  j["kappa_dot"] = c.kappa_dot;
  j["h"] = c.h;
  j["level_min"] = c.level_min;
  j["level_max"] = c.level_max;
  j["degree"] = c.degree;
  std::vector<std::string> pres;
  for (auto p : c.preconditioners) pres.push_back(to_string(p));
  j["preconditioners"] = pres;
  j["method"] = c.method;
  j["rhs"] = c.rhs;
  j["rtol"] = c.rtol;
  j["maxit"] = c.maxit;
  j["stop_tol"] = c.stop_tol;
  j["dense_limit"] = c.dense_limit;
  return j;
}

}  // namespace mdlab
