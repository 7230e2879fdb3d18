#pragma once

// Small-δ diagnostics of optimal sets: peak location, nearly-spherical
// parametrisation about a boundary point, exponential decay, annulus
// inclusion, blow-up profiles, and the two-term fit of δ Λ(δ) in δ^{1/2}.
// Everything here is planar (N = 2).

#include <cstdint>
#include <string>
#include <vector>

#include "habitat/limit_problem.hpp"
#include "habitat/shape_optimizer.hpp"

namespace habitat {

/// Blow-up length δ^{1/N}.
double blowup_length(double delta);

struct PeakData {
  /// Boundary projection of the discrete argmax; for a boundary argmax, the
  /// vertex of the quadratic through it and its two boundary neighbours.
  BoundaryPoint P_delta;
  int argmax_vertex = -1;
  double max_value = 0.0;
  /// Distance from the argmax vertex to ∂Ω.
  double interior_offset = 0.0;
  /// (N - 1) times the curvature at P_delta.
  double alpha_delta = 0.0;
  /// A second local maximum above half the peak lies farther than 4δ^{1/N}.
  bool secondary_peak = false;
};

PeakData extract_peak(const std::vector<double>& u, const Mesh& mesh, const DomainSpec& spec,
                      double delta);

/// Boundary projection of the measure-weighted barycenter of the set.
BoundaryPoint boundary_center(const IndicatorSet& set, const Mesh& mesh, const DomainSpec& spec);

struct RadialSample {
  /// Direction angle relative to the inward normal at Q, in (-π/2, π/2).
  double angle = 0.0;
  double rho = 0.0;
};

struct NearSphereParam {
  BoundaryPoint Q_delta;
  std::vector<RadialSample> samples;
  /// L² over the sampled half-circle of directions.
  double l2_norm = 0.0;
  double sup_norm = 0.0;
  /// max |ρ''| by second differences of consecutive samples.
  double grad_lipschitz_estimate = 0.0;
  int rays = 0;
  int multi_crossing_rays = 0;
  /// Rays that leave Ω (or the mesh) before leaving the set.
  int exiting_rays = 0;
};

inline constexpr int kParametrizationRays = 256;

/// Exact measure of {u >= level} for the P1 interpolant of u.
double superlevel_measure(const std::vector<double>& u, double level, const Mesh& mesh);

/// Level whose P1 superlevel set has measure δ (bisection).
double measure_level(const std::vector<double>& u, const Mesh& mesh, double delta);

/// Radial deviation of the free boundary of a cell set from the half-ball
/// B(Q, δ^{1/N} r2), on 256 rays over the inward half-circle of directions.
/// Throws NotStarShaped when more than 5% of the rays cross ∂D more than once.
NearSphereParam polar_parametrization(const IndicatorSet& set, const BoundaryPoint& Q,
                                      double delta, const Mesh& mesh);

/// Same, with the free boundary taken as the level curve {u = level} of the
/// P1 field instead of the staircase of cell edges.
NearSphereParam polar_parametrization(const std::vector<double>& u, double level,
                                      const BoundaryPoint& Q, double delta, const Mesh& mesh);

struct DecayFit {
  /// Exponential rate in physical units; the fitted slope is -rate.
  double rate = 0.0;
  double intercept = 0.0;
  int samples = 0;
};

/// Least squares of log u + ((N-1)/2) log r against r = |x - P| over vertices
/// with δ^{1/N} < r < 4δ^{1/N} and u > 1e-12 max u. The log r term removes the
/// algebraic prefactor of the radial decaying solution, K0(q r) ~ e^{-q r}/√r.
DecayFit decay_fit(const std::vector<double>& u, const PeakData& peak, double delta,
                   const Mesh& mesh);

struct StructureCheck {
  bool connected = false;
  bool annulus_ok = false;
  double r_minus = 0.0;
  double r_plus = 0.0;
};

/// Edge-adjacency connectivity, and B_{r-}(P) ∩ Ω ⊂ D ⊂ B_{r+}(P) tested on
/// cell centroids with |B_{r±}| = 2δ(1 ± 0.2).
StructureCheck inclusion_and_connectivity(const IndicatorSet& set, const PeakData& peak,
                                          double delta, const Mesh& mesh);

struct BlowupComparison {
  double sup_error = 0.0;
  int samples = 0;
  int outside = 0;
  /// More than 10% of the window fell outside the mesh.
  bool partial_window = false;
};

/// Compares u(P + δ^{1/N} z)/max u with w(|z|) on a polar grid of |z| <= 3 r2
/// over the inward half-plane of directions at P.
BlowupComparison blowup_profile(const std::vector<double>& u, const PeakData& peak, double delta,
                                const LimitSolution& limit, const Mesh& mesh);

struct SweepConfig {
  double beta = 1.0;
  std::vector<double> delta_grid;
  /// Boundary mesh size is δ^{1/N} / cells_per_length.
  double cells_per_length = 14.0;
  /// Fine layer depth in units of δ^{1/N}.
  double layer_factor = 1.5;
  double interior_h = 0.08;
  double growth = 1.15;
  /// When positive, every δ uses a uniform mesh of this size instead.
  double uniform_h = 0.0;
  int n_starts = 4;
  std::uint64_t seed = 0;
  OptimizerConfig optimizer;
  /// Worker threads for independent rows; 0 = hardware concurrency.
  int threads = 1;
};

MeshSizing sweep_mesh_sizing(const SweepConfig& config, double delta);

struct SweepRow {
  double delta = 0.0;
  double Lambda = 0.0;
  double scaled_Lambda = 0.0;
  double P_theta = 0.0;
  double Q_theta = 0.0;
  double H_at_P = 0.0;
  double rho_l2 = 0.0;
  double rho_sup = 0.0;
  double decay_rate = 0.0;
  bool connected = false;
  bool annulus_ok = false;

  bool converged = false;
  std::string winning_start;
  double measure = 0.0;
  int mesh_vertices = 0;
  int mesh_cells = 0;
  int set_cells = 0;
  double boundary_h = 0.0;
  PeakData peak;
  NearSphereParam near_sphere;
  bool star_shaped = true;
  int decay_samples = 0;
  /// |Q - P| / δ^{1/N}.
  double qp_scaled = 0.0;
  BlowupComparison blowup;
  /// Every start: λ trace non-increasing within 1e-12 relative.
  bool traces_monotone = true;
  /// Every converged start is a fixed point of the rearrangement.
  bool fixed_points_ok = true;
  std::vector<StartOutcome> starts;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  double fitted_I = 0.0;
  double fitted_slope = 0.0;
  double predicted_slope = 0.0;
  double fit_residual = 0.0;
  double I = 0.0;
  double Gamma = 0.0;
  double H_hat = 0.0;
  std::uint64_t seed = 0;
};

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  /// Root-mean-square residual.
  double residual = 0.0;
};

LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y);

/// Optimises each δ (strictly decreasing grid) by multi-start on its own
/// graded mesh and fits scaled_Lambda = I + slope δ^{1/N} over converged rows.
/// Throws InsufficientData when fewer than 3 rows converged.
SweepReport sweep_and_fit(const DomainSpec& spec, const SweepConfig& config);

/// Diagnostics of one optimised set; fills every SweepRow field except the
/// start bookkeeping.
SweepRow analyse_optimum(const OptimizationRecord& record, const DomainSpec& spec,
                         const Mesh& mesh, double delta, const LimitSolution& limit);

}  // namespace habitat
