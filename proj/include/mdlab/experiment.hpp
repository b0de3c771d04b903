#pragma once

// Scenario runner behind the command line tool and the acceptance checks.
//
// Every scenario splits into independent jobs keyed by its sweep parameters.
// Jobs run on a small thread pool and their rows are concatenated in job
// order, so tables do not depend on the thread count.

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "eigenstudies.hpp"

namespace mdlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Scenario { Convergence, CondSweep, MinresSweep, RadiusStudy, MeanStudy, LayeredStudy, P2P1Study };

inline const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string>> names{
      {Scenario::Convergence, "convergence"},   {Scenario::CondSweep, "cond_sweep"},
      {Scenario::MinresSweep, "minres_sweep"},  {Scenario::RadiusStudy, "radius_study"},
      {Scenario::MeanStudy, "mean_study"},      {Scenario::LayeredStudy, "layered_study"},
      {Scenario::P2P1Study, "p2p1_study"}};
  return names;
}

inline std::string to_string(Scenario s) {
  for (const auto& [k, v] : scenario_names()) {
    if (k == s) return v;
  }
  return "?";
}

struct ExperimentConfig {
  Scenario scenario = Scenario::RadiusStudy;
  std::string name = "experiment";
  DomainShape domain = DomainShape::Disk;
  InclusionShape inclusion = InclusionShape::Circle;
  std::vector<double> eps{0.1};
  std::vector<double> kappa{1.0};
  std::vector<double> kappa_dot{1.0};
  double h = 0.25;
  int level_min = 0;
  int level_max = 2;
  int degree = 1;
  std::vector<PrecondVariant> preconditioners{PrecondVariant::B1};
  std::string method = "direct";     // convergence: direct | minres
  std::string rhs = "manufactured";  // minres_sweep: manufactured | random
  double rtol = 1e-10;
  int maxit = 400;
  double stop_tol = 1e-3;  // relative change that ends a refinement sequence
  Eigen::Index dense_limit = 2000;
  std::string out_dir = "out";
};

/// Schema violations; empty when the config can be run.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> v;
  if (c.eps.empty() || c.kappa.empty() || c.kappa_dot.empty() || c.preconditioners.empty()) {
    v.emplace_back("grids nonempty");
  }
  if (c.level_min < 0 || c.level_max < c.level_min) v.emplace_back("levels >= 1");
  if (!(c.rtol > 0.0 && c.rtol < 1.0) || !(c.stop_tol > 0.0 && c.stop_tol < 1.0)) {
    v.emplace_back("tolerance in (0, 1)");
  }
  if (!(c.h > 0.0) || !std::isfinite(c.h)) v.emplace_back("mesh size positive");
  if (c.degree != 1 && c.degree != 2) v.emplace_back("degree in {1, 2}");
  if (c.maxit < 1) v.emplace_back("maxit positive");
  if (c.dense_limit < 0) v.emplace_back("dense_limit nonnegative");
  auto positive = [](const std::vector<double>& g) {
    return std::all_of(g.begin(), g.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
  };
  if (!positive(c.kappa) || !positive(c.kappa_dot)) v.emplace_back("coefficients positive");
  bool interior = true;
  for (double e : c.eps) {
    if (!(e > 0.0) || detail::boundary_gap(c.domain, {c.inclusion, e}) < 2.0 * c.h) interior = false;
  }
  if (!interior) v.emplace_back("inclusion strictly interior");
  if (c.scenario == Scenario::LayeredStudy) {
    if (c.inclusion != InclusionShape::Circle) v.emplace_back("layered meshes need circle inclusions");
    std::vector<double> r = c.eps;
    std::sort(r.begin(), r.end());
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      if (r[i + 1] < 2.0 * r[i]) {
        v.emplace_back("layered radii separated by a factor 2");
        break;
      }
    }
  }
  const bool manufactured =
      c.scenario == Scenario::Convergence || (c.scenario == Scenario::MinresSweep && c.rhs == "manufactured");
  if (manufactured) {
    if (c.inclusion != InclusionShape::Circle) v.emplace_back("manufactured data need a circle inclusion");
    if (std::any_of(c.kappa.begin(), c.kappa.end(), [](double k) { return k != 1.0; })) {
      v.emplace_back("manufactured data need kappa = 1");
    }
  }
  if (c.method != "direct" && c.method != "minres") v.emplace_back("method in {direct, minres}");
  if (c.rhs != "manufactured" && c.rhs != "random") v.emplace_back("rhs in {manufactured, random}");
  return v;
}

// ---------------------------------------------------------------------------
// Tables

using Cell = std::variant<std::monostate, bool, long long, double, std::string>;

inline std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(double x) const { return detail::format_double(x); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, c);
}

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw Error(ErrorCode::DimensionMismatch, "row width in table " + name);
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& col) const {
    const auto it = std::find(columns.begin(), columns.end(), col);
    if (it == columns.end()) throw Error(ErrorCode::InvalidArgument, "no column '" + col + "' in " + name);
    return static_cast<std::size_t>(it - columns.begin());
  }

  /// Numeric value of a cell; NaN for empty cells.
  double number(std::size_t row, const std::string& col) const {
    const Cell& c = rows.at(row)[column(col)];
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    if (const auto* b = std::get_if<bool>(&c)) return *b ? 1.0 : 0.0;
    return std::numeric_limits<double>::quiet_NaN();
  }

  std::string text(std::size_t row, const std::string& col) const { return format_cell(rows.at(row)[column(col)]); }

  void write_csv(std::ostream& os) const {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << format_cell(r[i]);
      os << '\n';
    }
  }
};

struct ScenarioResult {
  std::vector<ReportTable> tables;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool solver_converged = true;

  const ReportTable& table(const std::string& name) const {
    for (const auto& t : tables) {
      if (t.name == name) return t;
    }
    throw Error(ErrorCode::InvalidArgument, "no table " + name);
  }
};

struct RunOptions {
  int threads = 1;
  std::uint64_t seed = 42;
};

namespace detail {

inline long long as_ll(Eigen::Index i) { return static_cast<long long>(i); }

/// Runs fn(0..n-1) on up to `threads` workers; rethrows the first failure by index.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (t <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < t; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Runs one job per key and concatenates the rows each job produced.
template <class Key, class F>
std::vector<std::vector<Cell>> run_jobs(const std::vector<Key>& keys, int threads, F&& job) {
  std::vector<std::vector<std::vector<Cell>>> parts(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) { parts[i] = job(keys[i], i); });
  std::vector<std::vector<Cell>> rows;
  for (auto& p : parts) {
    for (auto& r : p) rows.push_back(std::move(r));
  }
  return rows;
}

inline IntersectionWeights multiplier_weights(PrecondVariant v, double kappa, double kappa_dot) {
  if (v == PrecondVariant::B0) return IntersectionWeights{{-0.5, 1.0 / kappa}};
  return IntersectionWeights{{-0.5, 1.0 / kappa}, {-1.0, 1.0 / kappa_dot}};
}

inline double nominal_h(const ExperimentConfig& c, int level) { return c.h / std::pow(2.0, level); }

/// Meshes of one radius at levels level_min..level_max.
inline std::vector<std::shared_ptr<const Discretization>> level_discs(const ExperimentConfig& c, double eps,
                                                                       int degree) {
  std::vector<std::shared_ptr<const Discretization>> out;
  TriMesh m = refine_uniform(build_mesh(c.domain, {c.inclusion, eps}, c.h), c.level_min);
  for (int l = c.level_min; l <= c.level_max; ++l) {
    if (l > c.level_min) m = refine_uniform(m);
    out.push_back(make_discretization(m, degree));
  }
  return out;
}

inline BlockSystem trace_system(std::shared_ptr<const Discretization> d) {
  return assemble_trace_lm(std::move(d), [](const Point&) { return 0.0; });
}

inline EigenOptions eigen_options(const ExperimentConfig& c, const RunOptions& r) {
  EigenOptions o;
  o.dense_limit = c.dense_limit;
  o.lanczos.seed = r.seed;
  return o;
}

inline double rate(double prev, double cur, double h_prev, double h_cur) {
  return std::log(prev / cur) / std::log(h_prev / h_cur);
}

struct SweepKey {
  PrecondVariant pre;
  double eps, kappa, kappa_dot;
};

inline std::vector<SweepKey> sweep_keys(const ExperimentConfig& c, bool with_preconditioners) {
  std::vector<SweepKey> keys;
  const std::vector<PrecondVariant> pres =
      with_preconditioners ? c.preconditioners : std::vector<PrecondVariant>{c.preconditioners.front()};
  for (auto p : pres) {
    for (double e : c.eps) {
      for (double k : c.kappa) {
        for (double kd : c.kappa_dot) keys.push_back({p, e, k, kd});
      }
    }
  }
  return keys;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenarios

/// Errors and observed rates against the manufactured solution.
inline ScenarioResult run_convergence(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"convergence",
                {"eps", "kappa", "kappa_dot", "level", "h", "dofs", "iterations", "converged", "e_u", "rate_u",
                 "e_udot", "rate_udot", "e_p", "rate_p"},
                {}};
  const auto keys = detail::sweep_keys(c, false);
  std::atomic<bool> all_ok{true};
  t.rows = detail::run_jobs(keys, ro.threads, [&](const detail::SweepKey& k, std::size_t) {
    std::vector<std::vector<Cell>> rows;
    const auto mc = manufactured_case(k.eps, k.kappa_dot);
    const auto norm = detail::multiplier_weights(PrecondVariant::B1, k.kappa, k.kappa_dot);
    std::array<double, 3> prev{};
    for (const auto& d : detail::level_discs(c, k.eps, c.degree)) {
      const int level = c.level_min + static_cast<int>(rows.size());
      const auto sys = assemble_2d1d(d, k.kappa_dot, {k.kappa, &mc});
      const auto basis = curve_basis(*d);
      Vector x;
      long long iterations = 0;
      bool ok = true;
      if (c.method == "direct") {
        x = SaddleSolver(sys).solve(sys.rhs());
      } else {
        const auto pre = build_preconditioner(sys, {k.pre, detail::multiplier_weights(k.pre, k.kappa, k.kappa_dot)},
                                              basis);
        SolveReport rep;
        x = minres(sys.as_operator(), pre.apply(), sys.rhs(), rep, {c.rtol, c.maxit});
        iterations = rep.iterations;
        ok = rep.converged;
      }
      if (!ok) all_ok = false;
      const auto e = error_norms(sys, x, mc, basis, norm);
      const std::array<double, 3> cur{e.e_u, e.e_udot, e.e_p};
      std::array<Cell, 3> rates{};
      if (!rows.empty()) {
        for (int i = 0; i < 3; ++i) {
          rates[i] = detail::rate(prev[i], cur[i], detail::nominal_h(c, level - 1), detail::nominal_h(c, level));
        }
      }
      rows.push_back({k.eps, k.kappa, k.kappa_dot, static_cast<long long>(level), detail::nominal_h(c, level),
                      detail::as_ll(sys.size()), iterations, ok, e.e_u, rates[0], e.e_udot, rates[1], e.e_p,
                      rates[2]});
      prev = cur;
    }
    return rows;
  });
  res.solver_converged = all_ok;
  res.tables.push_back(std::move(t));
  return res;
}

/// Signed extreme eigenvalues of the preconditioned 2d-1d system.
inline ScenarioResult run_cond_sweep(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"cond_sweep",
                {"precond", "eps", "kappa", "kappa_dot", "level", "h", "dofs", "method", "lambda_min",
                 "lambda_max", "abs_min", "abs_max", "cond", "lanczos_steps", "converged"},
                {}};
  const auto keys = detail::sweep_keys(c, true);
  std::atomic<bool> all_ok{true};
  const auto eo = detail::eigen_options(c, ro);
  t.rows = detail::run_jobs(keys, ro.threads, [&](const detail::SweepKey& k, std::size_t) {
    std::vector<std::vector<Cell>> rows;
    int level = c.level_min;
    for (const auto& d : detail::level_discs(c, k.eps, c.degree)) {
      const auto sys = assemble_2d1d(d, k.kappa_dot, {k.kappa, nullptr});
      const auto pre = build_preconditioner(sys, {k.pre, detail::multiplier_weights(k.pre, k.kappa, k.kappa_dot)},
                                            curve_basis(*d));
      const auto r = conditioning_eigs(sys, pre, eo);
      if (!r.converged) all_ok = false;
      rows.push_back({to_string(k.pre), k.eps, k.kappa, k.kappa_dot, static_cast<long long>(level),
                      detail::nominal_h(c, level), detail::as_ll(sys.size()), r.method, r.min, r.max, r.abs_min,
                      r.abs_max, std::abs(r.abs_max / r.abs_min), static_cast<long long>(r.lanczos_steps),
                      r.converged});
      ++level;
    }
    return rows;
  });
  res.solver_converged = all_ok;
  res.tables.push_back(std::move(t));
  return res;
}

/// Preconditioned MinRes iteration counts.
inline ScenarioResult run_minres_sweep(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"minres_sweep",
                {"precond", "eps", "kappa", "kappa_dot", "level", "h", "dofs", "iterations", "converged",
                 "relative_residual"},
                {}};
  const auto keys = detail::sweep_keys(c, true);
  std::atomic<bool> all_ok{true};
  t.rows = detail::run_jobs(keys, ro.threads, [&](const detail::SweepKey& k, std::size_t job) {
    std::vector<std::vector<Cell>> rows;
    const bool random = c.rhs == "random";
    std::optional<ManufacturedCase> mc;
    if (!random) mc = manufactured_case(k.eps, k.kappa_dot);
    int level = c.level_min;
    for (const auto& d : detail::level_discs(c, k.eps, c.degree)) {
      const auto sys = assemble_2d1d(d, k.kappa_dot, {k.kappa, mc ? &*mc : nullptr});
      const auto pre = build_preconditioner(sys, {k.pre, detail::multiplier_weights(k.pre, k.kappa, k.kappa_dot)},
                                            curve_basis(*d));
      Vector b = sys.rhs();
      if (random) {
        std::seed_seq seq{ro.seed, static_cast<std::uint64_t>(job), static_cast<std::uint64_t>(level)};
        std::mt19937_64 gen(seq);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(gen);
      }
      SolveReport rep;
      (void)minres(sys.as_operator(), pre.apply(), b, rep, {c.rtol, c.maxit});
      if (!rep.converged) all_ok = false;
      rows.push_back({to_string(k.pre), k.eps, k.kappa, k.kappa_dot, static_cast<long long>(level),
                      detail::nominal_h(c, level), detail::as_ll(sys.size()), static_cast<long long>(rep.iterations),
                      rep.converged, rep.history.back() / rep.history.front()});
      ++level;
    }
    return rows;
  });
  res.solver_converged = all_ok;
  res.tables.push_back(std::move(t));
  return res;
}

namespace detail {

/// Per-radius refinement sequence: `eval` fills one row per level and returns
/// the quantity whose relative change stops the sequence.
inline std::vector<std::vector<Cell>> refine_rows(const ExperimentConfig& c, double eps, int degree,
                                                  const std::function<double(const std::shared_ptr<const Discretization>&,
                                                                             std::vector<Cell>&)>& eval) {
  std::vector<std::vector<Cell>> rows;
  TriMesh m = refine_uniform(build_mesh(c.domain, {c.inclusion, eps}, c.h), c.level_min);
  const auto trace = refine_until_stable(
      [&](int level) {
        if (level > c.level_min) m = refine_uniform(m);
        std::vector<Cell> row;
        const double v = eval(make_discretization(m, degree), row);
        rows.push_back(std::move(row));
        return v;
      },
      c.level_min, c.level_max, c.stop_tol);
  for (auto& r : rows) r.push_back(trace.converged);
  return rows;
}

/// Last row of each radius; the table is grouped by eps in config order.
inline ReportTable final_rows(const ReportTable& levels, const std::string& name) {
  ReportTable out{name, levels.columns, {}};
  const std::size_t ce = levels.column("eps");
  for (std::size_t i = 0; i < levels.rows.size(); ++i) {
    const bool last = i + 1 == levels.rows.size() || levels.rows[i + 1][ce] != levels.rows[i][ce];
    if (last) out.rows.push_back(levels.rows[i]);
  }
  return out;
}

inline nlohmann::ordered_json fit_json(const ReportTable& t, const std::string& col) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.rows.size(); ++i) pts.emplace_back(t.number(i, "eps"), t.number(i, col));
  nlohmann::ordered_json j;
  try {
    const auto fit = fit_scaling(pts);
    j["model"] = fit.model;
    j["C"] = fit.c;
    j["residual"] = fit.residual;
    j["radii"] = fit.radii;
  } catch (const Error& e) {
    j["error"] = std::string(to_string(e.code()));
  }
  return j;
}

}  // namespace detail

/// Inf-sup (Schur) and trace (Steklov) constants against the radius.
inline ScenarioResult run_radius_study(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"radius_levels",
                {"eps", "level", "h", "dofs", "mult_dofs", "lambdaB_min", "lambdaB_max", "lambdaS_max", "rel_gap",
                 "stable"},
                {}};
  const auto eo = detail::eigen_options(c, ro);
  std::atomic<bool> all_ok{true};
  t.rows = detail::run_jobs(c.eps, ro.threads, [&](double eps, std::size_t) {
    int level = c.level_min;
    return detail::refine_rows(c, eps, c.degree, [&](const auto& d, std::vector<Cell>& row) {
      const auto sys = detail::trace_system(d);
      const auto b = schur_eigs(sys, curve_basis(*d), eo);
      const auto s = steklov_eigs(*d, eo);
      if (!b.converged || !s.converged) all_ok = false;
      row = {eps, static_cast<long long>(level), detail::nominal_h(c, level), detail::as_ll(sys.n_u()),
             detail::as_ll(sys.n_p()), b.min, b.max, s.max, std::abs(b.min - s.max) / b.min};
      ++level;
      return b.min;
    });
  });
  res.solver_converged = all_ok;
  auto fin = detail::final_rows(t, "radius_study");
  res.summary["fit_lambdaB_min"] = detail::fit_json(fin, "lambdaB_min");
  res.summary["fit_lambdaS_max"] = detail::fit_json(fin, "lambdaS_max");
  res.tables.push_back(std::move(fin));
  res.tables.push_back(std::move(t));
  return res;
}

/// 2d-0d mean-value coupling: closed-form Steklov value and the 1x1 Schur complement.
inline ScenarioResult run_mean_study(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"mean_levels", {"eps", "level", "h", "dofs", "lambdaB_mean", "lambdaS_mean", "stable"}, {}};
  t.rows = detail::run_jobs(c.eps, ro.threads, [&](double eps, std::size_t) {
    int level = c.level_min;
    return detail::refine_rows(c, eps, c.degree, [&](const auto& d, std::vector<Cell>& row) {
      const double s = mean_steklov(*d);
      const double b = mean_schur(assemble_2d0d(d));
      row = {eps, static_cast<long long>(level), detail::nominal_h(c, level), detail::as_ll(d->space.num_dofs), b, s};
      ++level;
      return b;
    });
  });
  auto fin = detail::final_rows(t, "mean_study");
  res.summary["fit_lambdaS_mean"] = detail::fit_json(fin, "lambdaS_mean");
  res.tables.push_back(std::move(fin));
  res.tables.push_back(std::move(t));
  return res;
}

/// One mesh conforming to all radii against one mesh per radius.
inline ScenarioResult run_layered_study(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"layered_study",
                {"eps", "level", "h", "layered_B_min", "layered_B_max", "layered_S_max", "single_B_min",
                 "single_B_max", "single_S_max", "rel_B_min", "rel_S_max"},
                {}};
  const auto eo = detail::eigen_options(c, ro);
  std::vector<std::shared_ptr<const TriMesh>> layered;
  {
    TriMesh m = refine_uniform(build_layered_mesh(c.domain, c.eps, c.h), c.level_min);
    for (int l = c.level_min; l <= c.level_max; ++l) {
      if (l > c.level_min) m = refine_uniform(m);
      layered.push_back(std::make_shared<const TriMesh>(m));
    }
  }
  std::vector<std::size_t> keys(c.eps.size());
  std::iota(keys.begin(), keys.end(), std::size_t{0});
  std::atomic<bool> all_ok{true};
  t.rows = detail::run_jobs(keys, ro.threads, [&](std::size_t tag, std::size_t) {
    std::vector<std::vector<Cell>> rows;
    const auto single = detail::level_discs(c, c.eps[tag], c.degree);
    for (std::size_t i = 0; i < single.size(); ++i) {
      const int level = c.level_min + static_cast<int>(i);
      const auto dl = make_discretization(layered[i], c.degree, static_cast<int>(tag));
      const auto bl = schur_eigs(detail::trace_system(dl), curve_basis(*dl), eo);
      const auto sl = steklov_eigs(*dl, eo);
      const auto bs = schur_eigs(detail::trace_system(single[i]), curve_basis(*single[i]), eo);
      const auto ss = steklov_eigs(*single[i], eo);
      if (!(bl.converged && sl.converged && bs.converged && ss.converged)) all_ok = false;
      rows.push_back({c.eps[tag], static_cast<long long>(level), detail::nominal_h(c, level), bl.min, bl.max, sl.max,
                      bs.min, bs.max, ss.max, std::abs(bl.min - bs.min) / bs.min, std::abs(sl.max - ss.max) / ss.max});
    }
    return rows;
  });
  res.solver_converged = all_ok;
  res.tables.push_back(std::move(t));
  return res;
}

/// Second-order against first-order domain elements, multiplier always P1.
inline ScenarioResult run_p2p1_study(const ExperimentConfig& c, const RunOptions& ro) {
  ScenarioResult res;
  ReportTable t{"p2p1_study",
                {"eps", "level", "h", "p1_B_min", "p1_B_max", "p1_S_max", "p2_B_min", "p2_B_max", "p2_S_max",
                 "rel_B_min", "rel_S_max"},
                {}};
  const auto eo = detail::eigen_options(c, ro);
  std::atomic<bool> all_ok{true};
  t.rows = detail::run_jobs(c.eps, ro.threads, [&](double eps, std::size_t) {
    std::vector<std::vector<Cell>> rows;
    const auto p1 = detail::level_discs(c, eps, 1);
    for (std::size_t i = 0; i < p1.size(); ++i) {
      const int level = c.level_min + static_cast<int>(i);
      const auto p2 = make_discretization(p1[i]->mesh, 2);
      const auto b1 = schur_eigs(detail::trace_system(p1[i]), curve_basis(*p1[i]), eo);
      const auto s1 = steklov_eigs(*p1[i], eo);
      const auto b2 = schur_eigs(detail::trace_system(p2), curve_basis(*p2), eo);
      const auto s2 = steklov_eigs(*p2, eo);
      if (!(b1.converged && s1.converged && b2.converged && s2.converged)) all_ok = false;
      rows.push_back({eps, static_cast<long long>(level), detail::nominal_h(c, level), b1.min, b1.max, s1.max, b2.min,
                      b2.max, s2.max, std::abs(b2.min - b1.min) / b1.min, std::abs(s2.max - s1.max) / s1.max});
    }
    return rows;
  });
  res.solver_converged = all_ok;
  res.tables.push_back(std::move(t));
  return res;
}

inline ScenarioResult run_scenario(const ExperimentConfig& c, const RunOptions& ro = {}) {
  if (const auto v = validate(c); !v.empty()) throw Error(ErrorCode::InvalidArgument, "invalid config: " + v.front());
  switch (c.scenario) {
    case Scenario::Convergence: return run_convergence(c, ro);
    case Scenario::CondSweep: return run_cond_sweep(c, ro);
    case Scenario::MinresSweep: return run_minres_sweep(c, ro);
    case Scenario::RadiusStudy: return run_radius_study(c, ro);
    case Scenario::MeanStudy: return run_mean_study(c, ro);
    case Scenario::LayeredStudy: return run_layered_study(c, ro);
    case Scenario::P2P1Study: return run_p2p1_study(c, ro);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario");
}

// ---------------------------------------------------------------------------
// Output

/// FNV-1a, stable across platforms; identifies the config text in summaries.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(h));
  return buf.data();
}

/// Writes <dir>/<table>.csv for every table and <dir>/summary.json.
inline void write_results(const std::filesystem::path& dir, const ScenarioResult& res,
                          nlohmann::ordered_json metadata) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const auto& t : res.tables) {
    const auto path = dir / (t.name + ".csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
    t.write_csv(os);
    tables.push_back({{"name", t.name}, {"file", path.filename().string()}, {"rows", t.rows.size()}});
  }
  metadata["tables"] = tables;
  metadata["solver_converged"] = res.solver_converged;
  metadata["results"] = res.summary;
  std::ofstream js(dir / "summary.json", std::ios::binary);
  if (!js) throw Error(ErrorCode::Io, "cannot write summary.json");
  js << metadata.dump(2) << '\n';
}

}  // namespace mdlab
