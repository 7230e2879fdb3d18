#pragma once

// Whole-space / half-space limit eigenproblem
//
//   -Δw = I m w  in R^N,   m = 1 on B_{r2}, -β outside,
//
// where B_{r2} is the ball of measure 2. The principal solution is radial and
// piecewise Bessel: an oscillatory interior branch with wave number sqrt(I)
// glued at r2 to a decaying exterior branch with rate sqrt(I β). I is the
// smallest positive root of the logarithmic-derivative mismatch at r2.

#include <utility>

namespace habitat {

struct LimitParams {
  double beta = 1.0;
  int dim = 2;
};

struct LimitSolution {
  LimitParams params;
  double eigenvalue_I = 0.0;
  double radius_r2 = 0.0;
  /// w = interior_amplitude * f_int(sqrt(I) r) inside, so w(0) = 1.
  double interior_amplitude = 1.0;
  /// w = exterior_amplitude * f_ext(sqrt(I β) r) outside.
  double exterior_amplitude = 0.0;
  double gamma = 0.0;
  double gamma1 = 0.0;
  double Gamma = 0.0;
  double grad_sq_halfspace = 0.0;
  double mw2_halfspace = 0.0;
  /// Sum of quadrature error estimates and the analytic tail bound.
  double quadrature_error = 0.0;
  /// First positive zero of the interior radial solution (J0 or sinc).
  double interior_first_zero = 0.0;

  double interior_wavenumber() const;
  double exterior_rate() const;

  /// Same profile with the amplitude multiplied by `factor`; quadratic
  /// integrals scale by factor^2.
  LimitSolution scaled(double factor) const;
};

/// Radius of the N-ball of measure 2, N in {1, 2, 3}.
double ball_radius(int dim);

/// Volume of the unit N-ball, N in {1, 2, 3}.
double unit_ball_volume(int dim);

/// Exterior minus interior logarithmic radial derivative at r2 for the
/// candidate eigenvalue. Negative near 0, +inf at the upper bracket end.
double matching_residual(double candidate_I, const LimitParams& params);

/// Admissible open bracket (0, (x*/r2)^2) for candidate eigenvalues.
double limit_bracket_upper(const LimitParams& params);

LimitSolution solve_limit_eigenvalue(const LimitParams& params);

struct ProfileValue {
  double value = 0.0;
  double derivative = 0.0;
};

ProfileValue limit_profile(const LimitSolution& sol, double r);

/// Relative residual of (N-1)γ - Iγ1 = 2γ - 2I r2^{N+1} ω_{N-1}/(N(N+1)) ∫m w²,
/// normalised by the sum of the magnitudes of the four terms.
double identity_residual(const LimitSolution& sol);

}  // namespace habitat
