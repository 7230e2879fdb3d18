#include "habitat/eigensolver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "habitat/error.hpp"

namespace habitat {
namespace {

using Triplet = Eigen::Triplet<double>;

// Shifted inverse iteration for the bottom of spec(K - tW ; M).
class NuSolver {
 public:
  NuSolver(const Operators& ops, const SolverConfig& config)
      : ops_(ops), config_(config) {
    lumped_mass_ = Vector::Zero(ops.mass.rows());
    for (int k = 0; k < ops.mass.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(ops.mass, k); it; ++it) {
        lumped_mass_[it.row()] += it.value();
      }
    }
    // Upper bound on the spectrum of K relative to the lumped mass; its
    // roundoff sets the floor of every absolute tolerance below.
    for (int k = 0; k < ops.stiffness.outerSize(); ++k) {
      stiffness_scale_ = std::max(stiffness_scale_, ops.stiffness.coeff(k, k) / lumped_mass_[k]);
    }
    pattern_ = ops.stiffness + ops.weighted_mass + ops.mass;
    if (config.linear_solver == LinearSolver::kLdlt) {
      ldlt_.analyzePattern(pattern_);
    }
  }

  double mass_inverse_norm(const Vector& r) const {
    return std::sqrt((r.array().square() / lumped_mass_.array()).sum());
  }

  const Vector& lumped_mass() const { return lumped_mass_; }

  NuResult solve(double t, const Vector* warm_start) {
    const SparseMatrix a = ops_.stiffness - t * ops_.weighted_mass;
    NuResult out;
    if (t == 0.0) {
      // Neumann kernel: constants.
      out.vector = Vector::Ones(a.rows()) / std::sqrt(ops_.total_measure);
      out.nu = 0.0;
      out.derivative = -out.vector.dot(ops_.weighted_mass * out.vector);
      return out;
    }

    Vector x = warm_start != nullptr && warm_start->size() == a.rows()
                   ? *warm_start
                   : Vector::Ones(a.rows());
    x = x.cwiseAbs();
    x /= std::sqrt(x.dot(ops_.mass * x));
    double nu = x.dot(a * x);

    // Spectral scale of the problem; sets absolute tolerances.
    const double scale = std::abs(nu) + t * (1.0 + ops_.beta) + 1e-6 * stiffness_scale_;
    // Guaranteed lower bound: K - tW + (t + eps) M > 0 because W <= M.
    const double safe_shift = -t - 1e-3 * scale;

    double sigma = nu - 0.1 * std::abs(nu) - 1e-8 * scale;
    if (config_.linear_solver == LinearSolver::kLdlt) {
      sigma = factor_definite(a, sigma, safe_shift);
    } else {
      sigma = safe_shift;
      cg_ = std::make_unique<Cg>();
      cg_->setTolerance(config_.cg_tol);
      cg_->setMaxIterations(std::max(1000, static_cast<int>(4 * a.rows())));
      cg_matrix_ = a - sigma * ops_.mass;
      cg_->compute(cg_matrix_);
    }

    const double tol = config_.nu_tol * scale;
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= config_.max_inner; ++it) {
      Vector y = apply_inverse(ops_.mass * x);
      y /= std::sqrt(y.dot(ops_.mass * y));
      const Vector ay = a * y;
      const double nu_new = y.dot(ay);
      residual = mass_inverse_norm(ay - nu_new * (ops_.mass * y));
      const double change = std::abs(nu_new - nu);
      x = std::move(y);
      nu = nu_new;
      out.iterations = it;
      if (change <= tol && residual <= 1e-8 * scale) {
        if (x.dot(lumped_mass_) < 0.0) x = -x;
        out.nu = nu;
        out.vector = std::move(x);
        out.derivative = -out.vector.dot(ops_.weighted_mass * out.vector);
        out.residual = residual;
        return out;
      }
      // Stale shift: move it up under the current Rayleigh quotient.
      if (config_.linear_solver == LinearSolver::kLdlt && it % 3 == 0 &&
          nu - sigma > 0.25 * (std::abs(nu) + 1e-6 * scale)) {
        const double candidate = nu - 0.1 * std::abs(nu) - 1e-8 * scale;
        sigma = factor_definite(a, candidate, sigma);
      }
    }
    std::ostringstream msg;
    msg << "inverse iteration stagnated at t = " << t << " after "
        << config_.max_inner << " steps";
    throw ConvergenceFailure(msg.str(), residual);
  }

 private:
  using Ldlt = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;
  using Cg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                                      Eigen::DiagonalPreconditioner<double>>;

  // Factors A - σM for the largest σ in [fallback, sigma] (approached by
  // bisection) whose LDLᵀ pivots are all positive.
  double factor_definite(const SparseMatrix& a, double sigma, double fallback) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      ldlt_.factorize(SparseMatrix(a - sigma * ops_.mass));
      if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0.0).all()) {
        return sigma;
      }
      if (sigma <= fallback) break;
      sigma = 0.5 * (sigma + fallback);
      if (attempt > 8) sigma = fallback;
    }
    throw ConvergenceFailure("could not certify a definite shift", 0.0);
  }

  Vector apply_inverse(const Vector& rhs) {
    if (config_.linear_solver == LinearSolver::kLdlt) return ldlt_.solve(rhs);
    Vector y = cg_->solve(rhs);
    if (cg_->info() != Eigen::Success) {
      throw ConvergenceFailure("conjugate gradient did not converge", cg_->error());
    }
    return y;
  }

  const Operators& ops_;
  SolverConfig config_;
  Vector lumped_mass_;
  double stiffness_scale_ = 0.0;
  SparseMatrix pattern_;
  Ldlt ldlt_;
  // The iterative solver keeps a reference to its matrix.
  SparseMatrix cg_matrix_;
  std::unique_ptr<Cg> cg_;
};

}  // namespace

WeightField WeightField::from_indicator(const Mesh& mesh, std::vector<bool> indicator,
                                        double beta) {
  if (static_cast<int>(indicator.size()) != mesh.num_cells()) {
    throw Error(ErrorCode::kInvalidArgument, "indicator size does not match mesh");
  }
  if (!(beta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "beta must be positive");
  WeightField w;
  w.beta = beta;
  w.cell_values.resize(indicator.size());
  for (std::size_t c = 0; c < indicator.size(); ++c) {
    w.cell_values[c] = indicator[c] ? 1.0 : -beta;
    w.total_integral += w.cell_values[c] * mesh.cell_measure[c];
  }
  w.indicator = std::move(indicator);
  return w;
}

Operators assemble(const Mesh& mesh, const WeightField& weight, bool mass_lumping) {
  if (static_cast<int>(weight.cell_values.size()) != mesh.num_cells()) {
    throw Error(ErrorCode::kInvalidArgument, "weight field does not match mesh");
  }
  const int n = mesh.num_vertices();
  std::vector<Triplet> k_trip;
  std::vector<Triplet> m_trip;
  std::vector<Triplet> w_trip;
  k_trip.reserve(9 * mesh.triangles.size());
  m_trip.reserve(9 * mesh.triangles.size());
  w_trip.reserve(9 * mesh.triangles.size());
  Operators ops;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    const double area = mesh.cell_measure[c];
    const double m = weight.cell_values[c];
    double b[3];
    double g[3];
    for (int i = 0; i < 3; ++i) {
      const Point& pj = mesh.vertices[t[(i + 1) % 3]];
      const Point& pk = mesh.vertices[t[(i + 2) % 3]];
      b[i] = pj.y() - pk.y();
      g[i] = pk.x() - pj.x();
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        k_trip.emplace_back(t[i], t[j], (b[i] * b[j] + g[i] * g[j]) / (4.0 * area));
        if (mass_lumping) {
          if (i == j) {
            m_trip.emplace_back(t[i], t[i], area / 3.0);
            w_trip.emplace_back(t[i], t[i], m * area / 3.0);
          }
        } else {
          const double mij = area / 12.0 * (i == j ? 2.0 : 1.0);
          m_trip.emplace_back(t[i], t[j], mij);
          w_trip.emplace_back(t[i], t[j], m * mij);
        }
      }
    }
    ops.total_measure += area;
    ops.weight_integral += m * area;
  }
  ops.stiffness.resize(n, n);
  ops.mass.resize(n, n);
  ops.weighted_mass.resize(n, n);
  ops.stiffness.setFromTriplets(k_trip.begin(), k_trip.end());
  ops.mass.setFromTriplets(m_trip.begin(), m_trip.end());
  ops.weighted_mass.setFromTriplets(w_trip.begin(), w_trip.end());
  ops.beta = weight.beta;
  return ops;
}

NuResult principal_nu(double t, const Operators& ops, const SolverConfig& config,
                      const Vector* warm_start) {
  if (!(t >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "principal_nu needs t >= 0");
  NuSolver solver(ops, config);
  return solver.solve(t, warm_start);
}

EigenResult principal_positive_eigenvalue(const Mesh& mesh, const WeightField& weight,
                                          const SolverConfig& config,
                                          const WarmStart* warm) {
  if (!weight.admissible()) {
    std::ostringstream msg;
    msg << "weight integral " << weight.total_integral << " is not negative";
    throw Error(ErrorCode::kNegativeAverageViolated, msg.str());
  }
  return principal_positive_eigenvalue(assemble(mesh, weight, config.mass_lumping),
                                       config, warm);
}

EigenResult principal_positive_eigenvalue(const Operators& ops, const SolverConfig& config,
                                          const WarmStart* warm) {
  if (!(ops.weight_integral < 0.0)) {
    std::ostringstream msg;
    msg << "weight integral " << ops.weight_integral << " is not negative";
    throw Error(ErrorCode::kNegativeAverageViolated, msg.str());
  }
  if (ops.weighted_mass.nonZeros() == ops.weighted_mass.rows() &&
      ops.weighted_mass.coeffs().maxCoeff() <= 0.0) {
    // Lumped W <= 0 makes K - tW semidefinite for every t > 0: no positive root.
    throw Error(ErrorCode::kBracketingFailed,
                "lumped weight is nonpositive at every vertex; D is unresolved by the mesh");
  }
  NuSolver solver(ops, config);
  EigenResult result;

  Vector guess;
  const Vector* guess_ptr = nullptr;
  double t = 0.0;
  if (warm != nullptr && warm->lambda > 0.0) {
    t = warm->lambda;
    if (static_cast<Eigen::Index>(warm->eigenfunction.size()) == ops.mass.rows()) {
      guess = Eigen::Map<const Vector>(warm->eigenfunction.data(),
                                       static_cast<Eigen::Index>(warm->eigenfunction.size()));
      guess_ptr = &guess;
    }
  } else {
    // λ ~ 1/|D| up to an O(1) constant; |D| from the weight integral.
    const double measure_d =
        (ops.weight_integral + ops.beta * ops.total_measure) / (1.0 + ops.beta);
    t = 1.0 / std::max(measure_d, 1e-12 * ops.total_measure);
  }

  auto evaluate = [&](double at) {
    NuResult r = solver.solve(at, guess_ptr);
    result.iterations += r.iterations;
    result.nu_samples.push_back({at, r.nu});
    guess = r.vector;
    guess_ptr = &guess;
    return r;
  };

  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  NuResult current = evaluate(t);
  for (int expand = 0; current.nu > 0.0; ++expand) {
    // Left of the root: a concave ν with ν(0) = 0 decreases through λ.
    lo = t;
    if (current.derivative < 0.0) break;
    if (expand >= 200) {
      throw Error(ErrorCode::kBracketingFailed, "no sign change of nu while expanding t");
    }
    t *= 2.0;
    current = evaluate(t);
  }
  if (current.nu <= 0.0) hi = t;

  for (int outer = 0;; ++outer) {
    if (outer >= config.max_outer) {
      throw ConvergenceFailure("root search in t did not converge", current.residual);
    }
    double next = t - current.nu / current.derivative;
    const bool newton_ok = current.derivative < 0.0 && std::isfinite(next) && next > lo &&
                           (next < hi || !std::isfinite(hi));
    if (!newton_ok) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * t;
    }
    if (std::abs(next - t) <= config.root_tol * t) break;
    t = next;
    current = evaluate(t);
    if (current.nu > 0.0) lo = t; else hi = t;
    if (std::isfinite(hi) && hi - lo <= 0.25 * config.root_tol * hi && current.nu <= 0.0) break;
  }

  result.lambda = t;
  Vector u = current.vector;
  const double umax = u.maxCoeff();
  if (u.minCoeff() < -1e-10 * umax) {
    std::ostringstream msg;
    msg << "eigenvector changes sign (min " << u.minCoeff() << ", max " << umax << ")";
    throw Error(ErrorCode::kNonPrincipalBranch, msg.str());
  }
  // Round-off tails below 1e-10 relative are floored to stay strictly positive.
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    u[i] = std::max(u[i], std::numeric_limits<double>::min());
  }
  u /= std::sqrt(u.dot(ops.mass * u));

  const Vector ku = ops.stiffness * u;
  const Vector wu = ops.weighted_mass * u;
  result.weighted_norm = u.dot(wu);
  result.rayleigh_gap = std::abs(u.dot(ku) - result.lambda * result.weighted_norm);
  result.relative_residual =
      solver.mass_inverse_norm(ku - result.lambda * wu) / solver.mass_inverse_norm(ku);
  result.eigenfunction.assign(u.data(), u.data() + u.size());
  return result;
}

}  // namespace habitat
