// mdlab: meshes, scenario runs, config validation and scaling fits.
//
// Exit codes: 0 success, 2 bad input (unreadable or invalid config, bad CSV),
// 3 solver non-convergence (tables are still written).

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mdlab/config.hpp"

namespace fs = std::filesystem;
using namespace mdlab;

namespace {

constexpr int kOk = 0;
constexpr int kBadInput = 2;
constexpr int kNotConverged = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Io:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InclusionTooClose:
    case ErrorCode::RadiiTooClose:
    case ErrorCode::InsufficientPoints:
    case ErrorCode::TagNotFound:
      return kBadInput;
    default:
      return kNotConverged;
  }
}

/// Loads a config and prints its violations; nullopt when unusable.
std::optional<ParsedConfig> load_valid(const std::string& path) {
  auto parsed = load_config(path);
  if (!parsed.violations.empty()) {
    for (const auto& v : parsed.violations) std::cerr << "violation: " << v << '\n';
    return std::nullopt;
  }
  return parsed;
}

int cmd_validate(const std::string& path) {
  const auto parsed = load_config(path);
  for (const auto& v : parsed.violations) std::cout << "violation: " << v << '\n';
  if (!parsed.violations.empty()) return kBadInput;
  std::cout << "ok: " << to_string(parsed.config.scenario) << '\n';
  return kOk;
}

int cmd_run(const std::string& path, const std::string& out, int threads, std::uint64_t seed) {
  const auto parsed = load_valid(path);
  if (!parsed) return kBadInput;
  const auto& cfg = parsed->config;
  const fs::path dir = out.empty() ? fs::path(cfg.out_dir) : fs::path(out);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_scenario(cfg, {threads, seed});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  nlohmann::ordered_json meta;
  meta["name"] = cfg.name;
  meta["scenario"] = to_string(cfg.scenario);
  meta["version"] = kVersion;
  meta["config_hash"] = fnv1a_hex(parsed->source);
  meta["config"] = to_json(cfg);
  meta["threads"] = threads;
  meta["seed"] = seed;
  meta["wall_time_s"] = wall;
  write_results(dir, res, meta);
  for (const auto& t : res.tables) {
    std::cout << (dir / (t.name + ".csv")).string() << " (" << t.rows.size() << " rows)\n";
  }
  if (!res.summary.empty()) std::cout << res.summary.dump(2) << '\n';
  if (!res.solver_converged) {
    std::cerr << "solver did not converge for some rows (converged=false)\n";
    return kNotConverged;
  }
  return kOk;
}

int cmd_mesh(const std::string& path, const std::string& out, int level) {
  const auto parsed = load_valid(path);
  if (!parsed) return kBadInput;
  const auto& cfg = parsed->config;
  const int l = level >= 0 ? level : cfg.level_min;
  const fs::path dir = out.empty() ? fs::path(cfg.out_dir) : fs::path(out);
  fs::create_directories(dir);
  auto emit = [&](const TriMesh& m, const std::string& stem) {
    const TriMesh r = refine_uniform(m, l);
    const auto file = dir / (stem + "_l" + std::to_string(l) + ".mdmesh");
    std::ofstream os(file, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + file.string());
    write_mesh(os, r);
    std::cout << file.string() << " (" << r.vertices.size() << " vertices, " << r.cells.size() << " cells)\n";
  };
  if (cfg.scenario == Scenario::LayeredStudy) {
    emit(build_layered_mesh(cfg.domain, cfg.eps, cfg.h), "layered");
  } else {
    for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
      emit(build_mesh(cfg.domain, {cfg.inclusion, cfg.eps[i]}, cfg.h), "mesh_eps" + std::to_string(i));
    }
  }
  return kOk;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

int cmd_fit(const std::string& path, const std::string& eps_col, const std::string& value_col) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::Io, "empty CSV " + path);
  const auto header = split_csv(line);
  auto index = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorCode::Io, "no column '" + name + "' in " + path);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ie = index(eps_col), iv = index(value_col);
  std::vector<std::pair<double, double>> pts;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw Error(ErrorCode::Io, "ragged row in " + path);
    pts.emplace_back(detail::parse_double(cells[ie]), detail::parse_double(cells[iv]));
  }
  const auto fit = fit_scaling(pts);
  nlohmann::ordered_json j;
  j["model"] = fit.model;
  j["column"] = value_col;
  j["C"] = fit.c;
  j["residual"] = fit.residual;
  j["radii"] = fit.radii;
  std::cout << j.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mdlab: mixed-dimensional saddle point experiments"};
  app.require_subcommand(1);

  std::string config, out, csv, eps_col = "eps", value_col = "lambdaB_min";
  int threads = 1, level = -1;
  std::uint64_t seed = 42;

  auto* run = app.add_subcommand("run", "Run the scenario of a config and write CSV tables and summary.json");
  run->add_option("--config", config, "TOML experiment file")->required();
  run->add_option("--out", out, "Output directory (default: [output].dir)");
  run->add_option("--threads", threads, "Worker threads for independent jobs")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "Seed for random probe vectors");

  auto* val = app.add_subcommand("validate", "List schema violations of a config");
  val->add_option("--config", config, "TOML experiment file")->required();

  auto* mesh = app.add_subcommand("mesh", "Write the meshes of a config in mdmesh format");
  mesh->add_option("--config", config, "TOML experiment file")->required();
  mesh->add_option("--out", out, "Output directory (default: [output].dir)");
  mesh->add_option("--level", level, "Refinement level (default: level_min)");

  auto* fit = app.add_subcommand("fit", "Fit C sqrt(eps |log eps|) to two columns of a CSV");
  fit->add_option("--csv", csv, "Input table")->required();
  fit->add_option("--eps-column", eps_col, "Radius column");
  fit->add_option("--value-column", value_col, "Value column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*val) return cmd_validate(config);
    if (*run) return cmd_run(config, out, threads, seed);
    if (*mesh) return cmd_mesh(config, out, level);
    if (*fit) return cmd_fit(csv, eps_col, value_col);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  }
  return kOk;
}
