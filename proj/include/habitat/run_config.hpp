#pragma once

// Batch runs described by one JSON document:
//
//   {
//     "command": "limit" | "solve" | "sweep",
//     "domain": {"type": "disk", "radius": 1}
//             | {"type": "ellipse", "a": 2, "b": 1}
//             | {"center": [x, y], "fourier_cos": [...], "fourier_sin": [...]},
//     "beta": 1,
//     "dim": 2,                       // limit only
//     "delta": 0.01,                  // solve
//     "delta_grid": [0.04, 0.02],     // sweep, strictly decreasing
//     "mesh": {"cells_per_length": 14, "layer_factor": 1.5,
//              "interior_h": 0.08, "growth": 1.15},
//     "mesh_resolution": 0.02,        // optional uniform mesh instead
//     "solver": {"nu_tol": 1e-10, "root_tol": 1e-10, "max_outer": 100,
//                "max_inner": 200, "linear_solver": "ldlt" | "cg",
//                "mass_lumping": true, "rel_tol": 1e-8, "max_iters": 200,
//                "rearrangement": "exact" | "closest"},
//     "n_starts": 4,
//     "seed": 0,
//     "output_dir": "out"
//   }
//
// Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "habitat/asymptotics.hpp"
#include "habitat/report_io.hpp"

namespace habitat {

enum class Command { kLimit, kSolve, kSweep };

struct DomainConfig {
  std::string type = "disk";
  double radius = 1.0;
  double a = 1.0;
  double b = 1.0;
  Point center = Point::Zero();
  std::vector<double> fourier_cos;
  std::vector<double> fourier_sin;

  DomainSpec build() const;
};

struct RunConfig {
  Command command = Command::kLimit;
  DomainConfig domain;
  double beta = 1.0;
  int dim = 2;
  double delta = 0.0;
  std::vector<double> delta_grid;
  /// Graded per-δ mesh parameters (cells_per_length etc.).
  SweepConfig mesh;
  std::optional<double> mesh_resolution;
  OptimizerConfig optimizer;
  int n_starts = 4;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
};

/// Parses and validates, including admissibility of every δ against the
/// domain area (NegativeAverageViolated). Throws InvalidConfig otherwise.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Runs the command and returns the files to write, in a fixed order.
/// `threads` parallelises sweep rows (0 = hardware concurrency).
std::vector<OutputFile> run(const RunConfig& config, int threads = 1);

}  // namespace habitat
