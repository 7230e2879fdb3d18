#pragma once

// Principal positive eigenvalue of the indefinite-weight Neumann problem
//
//   -Δu = λ m_D u in Ω,  ∂_n u = 0 on ∂Ω,  m_D = 1_D - β 1_{Ω\D},
//
// on P1 finite elements. λ is located as the positive root of
//
//   ν(t) = min spec(K - t W ; M),
//
// which is concave in t with ν(0) = 0 and ν'(0) = -∫m_D / |Ω| > 0.
// Each ν(t) is a symmetric-definite problem solved by shifted inverse
// iteration; the shift is certified below ν(t) through the sign of the LDLᵀ
// pivots (Sylvester inertia).

#include <Eigen/Sparse>
#include <optional>
#include <vector>

#include "habitat/mesh.hpp"

namespace habitat {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct WeightField {
  std::vector<bool> indicator;
  double beta = 1.0;
  std::vector<double> cell_values;
  double total_integral = 0.0;

  /// Builds m_D from per-cell membership.
  static WeightField from_indicator(const Mesh& mesh, std::vector<bool> indicator,
                                    double beta);
  bool admissible() const { return total_integral < 0.0; }
};

enum class LinearSolver { kLdlt, kConjugateGradient };

struct SolverConfig {
  double nu_tol = 1e-10;
  double root_tol = 1e-10;
  double cg_tol = 1e-12;
  int max_outer = 100;
  int max_inner = 200;
  LinearSolver linear_solver = LinearSolver::kLdlt;
  /// Row-sum lumping of the mass and weighted-mass matrices.
  bool mass_lumping = true;
};

struct Operators {
  SparseMatrix stiffness;
  SparseMatrix mass;
  SparseMatrix weighted_mass;
  double total_measure = 0.0;
  double weight_integral = 0.0;
  double beta = 1.0;
};

Operators assemble(const Mesh& mesh, const WeightField& weight,
                   bool mass_lumping = true);

struct NuResult {
  double nu = 0.0;
  /// M-normalised, positive mean.
  Vector vector;
  /// dν/dt = -vᵀ W v for the M-normalised eigenvector.
  double derivative = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Smallest eigenvalue of (K - tW) relative to M with its eigenvector.
NuResult principal_nu(double t, const Operators& ops,
                      const SolverConfig& config = {},
                      const Vector* warm_start = nullptr);

struct NuSample {
  double t = 0.0;
  double nu = 0.0;
};

struct EigenResult {
  double lambda = 0.0;
  /// Per-vertex, positive, ∫_Ω u² = 1.
  std::vector<double> eigenfunction;
  /// |∫|∇u|² - λ ∫ m_D u²| for the normalised u.
  double rayleigh_gap = 0.0;
  /// ∫ m_D u² for the normalised u (the constraint-form normalisation is
  /// u / sqrt(weighted_norm)).
  double weighted_norm = 0.0;
  /// ‖(K - λW)u‖_{M⁻¹} / ‖K u‖_{M⁻¹}.
  double relative_residual = 0.0;
  int iterations = 0;
  std::vector<NuSample> nu_samples;
};

struct WarmStart {
  double lambda = 0.0;
  std::vector<double> eigenfunction;
};

EigenResult principal_positive_eigenvalue(const Mesh& mesh, const WeightField& weight,
                                          const SolverConfig& config = {},
                                          const WarmStart* warm = nullptr);

/// Same, for pre-assembled operators.
EigenResult principal_positive_eigenvalue(const Operators& ops,
                                          const SolverConfig& config = {},
                                          const WarmStart* warm = nullptr);

}  // namespace habitat
