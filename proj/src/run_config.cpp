#include "habitat/run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "habitat/error.hpp"

namespace habitat {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& msg) {
  throw Error(ErrorCode::kInvalidConfig, msg);
}

void reject_unknown(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) invalid("unknown key '" + item.key() + "' in " + where);
  }
}

template <class T>
T get(const json& obj, const std::string& key, const T& fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    invalid("key '" + key + "' has the wrong type");
  }
}

double positive(const json& obj, const std::string& key, double fallback) {
  const double v = get<double>(obj, key, fallback);
  if (!(v > 0.0)) invalid("'" + key + "' must be positive");
  return v;
}

DomainConfig parse_domain(const json& d) {
  reject_unknown(d, "domain", {"type", "radius", "a", "b", "center", "fourier_cos", "fourier_sin"});
  DomainConfig dom;
  dom.type = get<std::string>(d, "type", d.contains("fourier_cos") ? "fourier" : "disk");
  const auto center = get<std::vector<double>>(d, "center", {0.0, 0.0});
  if (center.size() != 2) invalid("domain.center must have two entries");
  dom.center = Point(center[0], center[1]);
  if (dom.type == "disk") {
    dom.radius = positive(d, "radius", 1.0);
  } else if (dom.type == "ellipse") {
    dom.a = positive(d, "a", 1.0);
    dom.b = positive(d, "b", 1.0);
  } else if (dom.type == "fourier") {
    dom.fourier_cos = get<std::vector<double>>(d, "fourier_cos", {});
    dom.fourier_sin = get<std::vector<double>>(d, "fourier_sin", {});
    if (dom.fourier_cos.empty()) invalid("domain.fourier_cos needs at least the mean radius");
  } else {
    invalid("domain.type must be disk, ellipse or fourier");
  }
  return dom;
}

void parse_solver(const json& s, OptimizerConfig& opt) {
  reject_unknown(s, "solver",
                 {"nu_tol", "root_tol", "cg_tol", "max_outer", "max_inner", "linear_solver",
                  "mass_lumping", "rel_tol", "max_iters", "rearrangement"});
  SolverConfig& sc = opt.solver;
  sc.nu_tol = positive(s, "nu_tol", sc.nu_tol);
  sc.root_tol = positive(s, "root_tol", sc.root_tol);
  sc.cg_tol = positive(s, "cg_tol", sc.cg_tol);
  sc.max_outer = get<int>(s, "max_outer", sc.max_outer);
  sc.max_inner = get<int>(s, "max_inner", sc.max_inner);
  if (sc.max_outer < 1 || sc.max_inner < 1) invalid("iteration limits must be >= 1");
  const auto solver = get<std::string>(s, "linear_solver", "ldlt");
  if (solver == "ldlt") {
    sc.linear_solver = LinearSolver::kLdlt;
  } else if (solver == "cg") {
    sc.linear_solver = LinearSolver::kConjugateGradient;
  } else {
    invalid("solver.linear_solver must be ldlt or cg");
  }
  sc.mass_lumping = get<bool>(s, "mass_lumping", sc.mass_lumping);
  opt.rel_tol = positive(s, "rel_tol", opt.rel_tol);
  opt.max_iters = get<int>(s, "max_iters", opt.max_iters);
  if (opt.max_iters < 1) invalid("solver.max_iters must be >= 1");
  const auto rule = get<std::string>(s, "rearrangement", "exact");
  if (rule == "exact") {
    opt.rule = Rearrangement::kExactMeasure;
  } else if (rule == "closest") {
    opt.rule = Rearrangement::kClosestMeasure;
  } else {
    invalid("solver.rearrangement must be exact or closest");
  }
}

void check_admissible(double delta, double beta, const DomainSpec& spec) {
  const double bound = beta * spec.area() / (beta + 1.0);
  if (!(delta > 0.0) || !(delta < bound)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "delta " << delta << " violates 0 < delta < beta|Omega|/(beta+1) = " << bound;
    throw Error(ErrorCode::kNegativeAverageViolated, msg.str());
  }
}

}  // namespace

DomainSpec DomainConfig::build() const {
  if (type == "disk") return DomainSpec::disk(radius, center);
  if (type == "ellipse") return DomainSpec::ellipse(a, b, center);
  return DomainSpec(center, fourier_cos, fourier_sin);
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    invalid(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(doc, "config",
                 {"command", "domain", "beta", "dim", "delta", "delta_grid", "mesh",
                  "mesh_resolution", "solver", "n_starts", "seed", "output_dir"});
  RunConfig cfg;
  const auto command = get<std::string>(doc, "command", "");
  if (command == "limit") {
    cfg.command = Command::kLimit;
  } else if (command == "solve") {
    cfg.command = Command::kSolve;
  } else if (command == "sweep") {
    cfg.command = Command::kSweep;
  } else {
    invalid("command must be limit, solve or sweep");
  }
  cfg.beta = positive(doc, "beta", 1.0);
  cfg.dim = get<int>(doc, "dim", 2);
  if (cfg.command == Command::kLimit ? (cfg.dim < 1 || cfg.dim > 3) : cfg.dim != 2) {
    invalid("dim must be 1, 2 or 3 for limit and 2 otherwise");
  }
  if (doc.contains("domain")) cfg.domain = parse_domain(doc.at("domain"));
  if (doc.contains("solver")) parse_solver(doc.at("solver"), cfg.optimizer);
  if (doc.contains("mesh")) {
    const json& m = doc.at("mesh");
    reject_unknown(m, "mesh", {"cells_per_length", "layer_factor", "interior_h", "growth"});
    cfg.mesh.cells_per_length = positive(m, "cells_per_length", cfg.mesh.cells_per_length);
    cfg.mesh.layer_factor = get<double>(m, "layer_factor", cfg.mesh.layer_factor);
    cfg.mesh.interior_h = positive(m, "interior_h", cfg.mesh.interior_h);
    cfg.mesh.growth = get<double>(m, "growth", cfg.mesh.growth);
    if (cfg.mesh.layer_factor < 0.0 || !(cfg.mesh.growth >= 1.0)) {
      invalid("mesh.layer_factor must be >= 0 and mesh.growth >= 1");
    }
  }
  if (doc.contains("mesh_resolution")) cfg.mesh_resolution = positive(doc, "mesh_resolution", 1.0);
  cfg.n_starts = get<int>(doc, "n_starts", cfg.n_starts);
  if (cfg.n_starts < 1) invalid("n_starts must be >= 1");
  cfg.seed = get<std::uint64_t>(doc, "seed", 0);
  cfg.output_dir = get<std::string>(doc, "output_dir", cfg.output_dir);

  if (cfg.command == Command::kLimit) return cfg;
  DomainSpec spec = [&] {
    try {
      return cfg.domain.build();
    } catch (const Error& e) {
      invalid(std::string("domain: ") + e.what());
    }
  }();
  if (cfg.command == Command::kSolve) {
    if (!doc.contains("delta")) invalid("solve needs 'delta'");
    cfg.delta = get<double>(doc, "delta", 0.0);
    check_admissible(cfg.delta, cfg.beta, spec);
  } else {
    cfg.delta_grid = get<std::vector<double>>(doc, "delta_grid", {});
    if (cfg.delta_grid.size() < 3) invalid("sweep needs a delta_grid with at least 3 values");
    for (std::size_t i = 0; i < cfg.delta_grid.size(); ++i) {
      check_admissible(cfg.delta_grid[i], cfg.beta, spec);
      if (i > 0 && !(cfg.delta_grid[i] < cfg.delta_grid[i - 1])) {
        invalid("delta_grid must be strictly decreasing");
      }
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

namespace {

SweepConfig sweep_config(const RunConfig& cfg, int threads) {
  SweepConfig sc = cfg.mesh;
  sc.beta = cfg.beta;
  sc.delta_grid = cfg.delta_grid;
  sc.uniform_h = cfg.mesh_resolution.value_or(0.0);
  sc.n_starts = cfg.n_starts;
  sc.seed = cfg.seed;
  sc.optimizer = cfg.optimizer;
  sc.threads = threads;
  return sc;
}

std::vector<OutputFile> run_solve(const RunConfig& cfg) {
  const DomainSpec spec = cfg.domain.build();
  const SweepConfig sc = sweep_config(cfg, 1);
  const Mesh mesh = build_mesh(spec, sweep_mesh_sizing(sc, cfg.delta));
  const MultiStartResult ms =
      multi_start(mesh, spec, cfg.beta, cfg.delta, cfg.n_starts, cfg.seed, cfg.optimizer);
  const LimitSolution limit = solve_limit_eigenvalue({cfg.beta, 2});
  const SweepRow row = analyse_optimum(ms.best(), spec, mesh, cfg.delta, limit);

  JsonWriter sol;
  sol.begin_object()
      .field("delta", cfg.delta)
      .field("beta", cfg.beta)
      .field("seed", static_cast<unsigned long long>(cfg.seed))
      .field("mesh_vertices", mesh.num_vertices())
      .field("mesh_cells", mesh.num_cells())
      .field("lambda", row.Lambda)
      .field("scaled_lambda", row.scaled_Lambda)
      .field("winning_start", ms.starts[ms.best_index].label)
      .key("starts")
      .begin_array();
  for (const StartOutcome& s : ms.starts) {
    sol.begin_object().field("label", s.label).field("ok", s.ok);
    if (s.ok) {
      sol.field("lambda", s.record.final.lambda)
          .field("converged", s.record.converged)
          .field("iterations", s.record.iterations);
    } else {
      sol.field("error", s.error);
    }
    sol.end_object();
  }
  sol.end_array().key("result");
  write_record(sol, ms.best(), true);
  sol.end_object();

  JsonWriter st;
  st.begin_object().key("peak");
  write_peak(st, row.peak);
  st.key("near_sphere");
  if (row.star_shaped) {
    write_near_sphere(st, row.near_sphere);
  } else {
    st.null();
  }
  st.field("decay_rate", row.decay_rate)
      .field("decay_samples", row.decay_samples)
      .field("connected", row.connected)
      .field("annulus_ok", row.annulus_ok)
      .field("qp_scaled", row.qp_scaled)
      .key("blowup")
      .begin_object()
      .field("sup_error", row.blowup.sup_error)
      .field("samples", row.blowup.samples)
      .field("outside", row.blowup.outside)
      .field("partial_window", row.blowup.partial_window)
      .end_object()
      .end_object();

  std::ostringstream mesh_text;
  write_mesh_text(mesh, mesh_text);
  return {{"solution.json", sol.str()}, {"structure.json", st.str()}, {"mesh.txt", mesh_text.str()}};
}

}  // namespace

std::vector<OutputFile> run(const RunConfig& config, int threads) {
  switch (config.command) {
    case Command::kLimit:
      return {{"limit.json", limit_json(solve_limit_eigenvalue({config.beta, config.dim}))}};
    case Command::kSolve:
      return run_solve(config);
    case Command::kSweep: {
      const SweepReport report =
          sweep_and_fit(config.domain.build(), sweep_config(config, threads));
      return {{"sweep.csv", sweep_csv(report)},
              {"summary.json", sweep_summary_json(report)},
              {"rows.json", sweep_rows_json(report)}};
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown command");
}

}  // namespace habitat
