#pragma once

// Minimisation of λ(D) over cell sets of prescribed measure δ by the
// superlevel-set (bathtub) fixed point: solve for u_k on D_k, then take D_{k+1}
// as the measure-δ superlevel set of u_k.

#include <cstdint>
#include <string>
#include <vector>

#include "habitat/eigensolver.hpp"

namespace habitat {

struct IndicatorSet {
  /// Sorted indices of the full member cells.
  std::vector<int> cells;
  /// Optional fractional member: this cell carries weight
  /// f - β(1 - f) with f = partial_fraction in (0, 1).
  int partial_cell = -1;
  double partial_fraction = 0.0;
  /// Full member measures plus the partial share.
  double measure = 0.0;
  /// Score of the last cell taken by a rearrangement.
  double threshold_level = 0.0;

  /// Full and partial members.
  std::vector<bool> mask(int num_cells) const;
  int size() const { return static_cast<int>(cells.size()) + (partial_cell >= 0 ? 1 : 0); }
  bool operator==(const IndicatorSet& other) const {
    return cells == other.cells && partial_cell == other.partial_cell;
  }
};

/// Upper admissible measure β|Ω|/(β+1).
double admissible_measure_bound(const Mesh& mesh, double beta);

IndicatorSet make_indicator_set(const Mesh& mesh, std::vector<int> cells);

/// m_D for a set, including the fractional cell.
WeightField weight_of(const Mesh& mesh, const IndicatorSet& set, double beta);

/// Measure of the symmetric difference of the full-member sets.
double symmetric_difference_measure(const Mesh& mesh, const IndicatorSet& a,
                                    const IndicatorSet& b);

enum class Rearrangement {
  /// Rank cells by the mean of u over their vertices and keep whole cells
  /// with the closest-measure rule; |D| is within half a cell of δ.
  kClosestMeasure,
  /// Rank cells by their density of the discrete ∫u² (the quadratic form of
  /// the weighted mass matrix) and make |D| = δ exactly with one fractional
  /// cell. For fixed u this maximises ∫m_D u² over all weights of measure δ,
  /// so every step decreases the Rayleigh quotient.
  kExactMeasure,
};

/// Measure-δ superlevel set of a per-cell score: cells ranked by value
/// descending (ties by index), accumulated until the measure first reaches δ;
/// the last cell is kept iff that leaves |measure - δ| no larger.
IndicatorSet quantile_superlevel_cells(const std::vector<double>& cell_values,
                                       const Mesh& mesh, double delta, double beta);

/// Same ranking, with whole cells while they fit in δ and the next cell taken
/// fractionally for the remainder.
IndicatorSet exact_superlevel_cells(const std::vector<double>& cell_values, const Mesh& mesh,
                                    double delta, double beta);

/// Closest-measure superlevel set ranking cells by the mean of the vertex
/// field u over their corners.
IndicatorSet quantile_superlevel(const std::vector<double>& u, const Mesh& mesh,
                                 double delta, double beta);

/// The rearrangement step used by the optimiser. `mass_lumping` selects the
/// quadratic form that kExactMeasure ranks by.
IndicatorSet rearrange(const std::vector<double>& u, const Mesh& mesh, double delta,
                       double beta, Rearrangement rule, bool mass_lumping = true);

/// Cells nearest to `point` (by centroid) with measure δ under `rule`. Any
/// point of Ω works; on ∂Ω this is a boundary cap.
IndicatorSet boundary_cap(const Mesh& mesh, const Point& point, double delta, double beta,
                          Rearrangement rule = Rearrangement::kClosestMeasure);

struct OptimizerConfig {
  double rel_tol = 1e-8;
  int max_iters = 200;
  Rearrangement rule = Rearrangement::kExactMeasure;
  SolverConfig solver;
};

struct OptimizationRecord {
  std::vector<double> lambda_trace;
  EigenResult final;
  IndicatorSet final_set;
  bool converged = false;
  /// A rearrangement returned to an earlier set other than the current one.
  bool cycled = false;
  int restarts_used = 0;
  int iterations = 0;
  /// |final_set| - δ.
  double measure_error = 0.0;
};

/// Throws MonotonicityViolation when a step raises λ by more than 1e-10
/// relative, except the first step from an init whose measure is not δ.
OptimizationRecord optimize(const Mesh& mesh, double beta, double delta,
                            const IndicatorSet& init, const OptimizerConfig& config = {});

struct StartOutcome {
  std::string label;
  bool ok = false;
  std::string error;
  OptimizationRecord record;
};

struct MultiStartResult {
  int best_index = -1;
  std::vector<StartOutcome> starts;

  const OptimizationRecord& best() const { return starts.at(best_index).record; }
};

/// Optimises from: the cap at the maximal-curvature point, caps at
/// n_starts - 2 further equally spaced boundary angles, and the measure-δ ball
/// about a seeded uniform random point of Ω. Keeps the smallest final λ (first
/// index on ties).
MultiStartResult multi_start(const Mesh& mesh, const DomainSpec& spec, double beta,
                             double delta, int n_starts, std::uint64_t seed,
                             const OptimizerConfig& config = {});

}  // namespace habitat
