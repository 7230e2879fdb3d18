#include "habitat/limit_problem.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "habitat/error.hpp"
#include "habitat/quadrature.hpp"
#include "habitat/special_functions.hpp"

namespace habitat {
namespace {

constexpr double kPi = std::numbers::pi;

void validate(const LimitParams& p) {
  if (!(p.beta > 0.0) || !std::isfinite(p.beta)) {
    throw Error(ErrorCode::kInvalidArgument, "limit problem requires beta > 0");
  }
  if (p.dim != 2 && p.dim != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "limit problem supports dim 2 or 3, got " +
                    std::to_string(p.dim));
  }
}

// Interior radial solution f(x) and df/dx, regular at the origin, f(0) = 1.
std::pair<double, double> interior_branch(int dim, double x) {
  if (dim == 2) return {bessel_j(0, x), -bessel_j(1, x)};
  if (x < 1e-4) return {1.0 - x * x / 6.0, -x / 3.0 + x * x * x / 30.0};
  const double s = std::sin(x);
  const double c = std::cos(x);
  return {s / x, (x * c - s) / (x * x)};
}

// Exterior radial solution g(x) and dg/dx, decaying at infinity.
std::pair<double, double> exterior_branch(int dim, double x) {
  if (dim == 2) return {bessel_k(0, x), -bessel_k(1, x)};
  const double e = std::exp(-x);
  return {e / x, -e * (1.0 + x) / (x * x)};
}

double first_interior_zero(int dim) {
  return dim == 2 ? kFirstZeroJ0 : kPi;
}

double sphere_area(int dim) { return dim == 2 ? 2.0 * kPi : 4.0 * kPi; }

}  // namespace

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return kPi;
    case 3: return 4.0 * kPi / 3.0;
    default:
      throw Error(ErrorCode::kInvalidArgument, "unit_ball_volume: dim 1..3");
  }
}

double ball_radius(int dim) {
  return std::pow(2.0 / unit_ball_volume(dim), 1.0 / dim);
}

double LimitSolution::interior_wavenumber() const {
  return std::sqrt(eigenvalue_I);
}

double LimitSolution::exterior_rate() const {
  return std::sqrt(eigenvalue_I * params.beta);
}

LimitSolution LimitSolution::scaled(double factor) const {
  LimitSolution out = *this;
  const double f2 = factor * factor;
  out.interior_amplitude *= factor;
  out.exterior_amplitude *= factor;
  out.gamma *= f2;
  out.gamma1 *= f2;
  out.grad_sq_halfspace *= f2;
  out.mw2_halfspace *= f2;
  out.quadrature_error *= f2;
  return out;
}

double limit_bracket_upper(const LimitParams& params) {
  validate(params);
  const double r2 = ball_radius(params.dim);
  const double ratio = first_interior_zero(params.dim) / r2;
  return ratio * ratio;
}

double matching_residual(double candidate_I, const LimitParams& params) {
  const double upper = limit_bracket_upper(params);
  if (!(candidate_I > 0.0) || !(candidate_I < upper)) {
    throw Error(ErrorCode::kOutOfBracket,
                "candidate eigenvalue " + std::to_string(candidate_I) +
                    " outside (0, " + std::to_string(upper) + ")");
  }
  const int dim = params.dim;
  const double r2 = ball_radius(dim);
  const double k = std::sqrt(candidate_I);
  const double q = std::sqrt(candidate_I * params.beta);
  const auto [fi, dfi] = interior_branch(dim, k * r2);
  const auto [fe, dfe] = exterior_branch(dim, q * r2);
  const double interior_log_derivative = k * dfi / fi;
  const double exterior_log_derivative = q * dfe / fe;
  return exterior_log_derivative - interior_log_derivative;
}

ProfileValue limit_profile(const LimitSolution& sol, double r) {
  const int dim = sol.params.dim;
  if (r < sol.radius_r2) {
    const double k = sol.interior_wavenumber();
    const auto [f, df] = interior_branch(dim, k * r);
    return {sol.interior_amplitude * f, sol.interior_amplitude * k * df};
  }
  const double q = sol.exterior_rate();
  const auto [g, dg] = exterior_branch(dim, q * r);
  return {sol.exterior_amplitude * g, sol.exterior_amplitude * q * dg};
}

LimitSolution solve_limit_eigenvalue(const LimitParams& params) {
  validate(params);
  const int dim = params.dim;
  const double r2 = ball_radius(dim);
  const double upper = limit_bracket_upper(params);

  // Log-spaced scan for the first sign change, then bisection.
  constexpr int kScan = 200;
  const double lo_scan = 1e-6;
  const double hi_scan = 0.999 * upper;
  const double log_step = std::log(hi_scan / lo_scan) / (kScan - 1);
  double prev_x = lo_scan;
  double prev_r = matching_residual(prev_x, params);
  double lo = 0.0;
  double hi = 0.0;
  bool found = false;
  for (int i = 1; i < kScan && !found; ++i) {
    const double x = lo_scan * std::exp(log_step * i);
    const double r = matching_residual(x, params);
    if ((prev_r < 0.0) != (r < 0.0)) {
      lo = prev_x;
      hi = x;
      found = true;
    }
    prev_x = x;
    prev_r = r;
  }
  if (!found) {
    throw Error(ErrorCode::kBracketingFailed,
                "no sign change of the matching residual in the scan");
  }
  double r_lo = matching_residual(lo, params);
  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r_mid = matching_residual(mid, params);
    if ((r_mid < 0.0) == (r_lo < 0.0)) {
      lo = mid;
      r_lo = r_mid;
    } else {
      hi = mid;
    }
  }

  LimitSolution sol;
  sol.params = params;
  sol.eigenvalue_I = 0.5 * (lo + hi);
  sol.radius_r2 = r2;
  sol.interior_first_zero = first_interior_zero(dim);
  sol.interior_amplitude = 1.0;
  {
    const double k = std::sqrt(sol.eigenvalue_I);
    const double q = std::sqrt(sol.eigenvalue_I * params.beta);
    const double fi = interior_branch(dim, k * r2).first;
    const double fe = exterior_branch(dim, q * r2).first;
    sol.exterior_amplitude = fi / fe;
  }

  const double beta = params.beta;
  const double q = sol.exterior_rate();
  const double r_tail = std::max(2.0 * r2, std::log(1e16) / (2.0 * q));
  constexpr double kRelTol = 1e-10;

  auto weight = [&](double r) { return r < r2 ? 1.0 : -beta; };
  auto integrate_split = [&](auto&& radial, double* err) {
    const std::function<double(double)> f = radial;
    const QuadratureResult in = integrate_adaptive(f, 0.0, r2, kRelTol);
    const QuadratureResult out = integrate_adaptive(f, r2, r_tail, kRelTol);
    // Exterior integrands decay at least like exp(-2 q r) r^dim.
    const double tail_bound =
        std::abs(f(r_tail)) / std::max(2.0 * q - dim / r_tail, q);
    *err += in.error_estimate + out.error_estimate + tail_bound;
    return in.value + out.value;
  };

  const double half_sphere = 0.5 * sphere_area(dim);
  const double omega = unit_ball_volume(dim - 1);
  double err = 0.0;
  const double grad_r = integrate_split(
      [&](double r) {
        const double d = limit_profile(sol, r).derivative;
        return d * d * std::pow(r, dim - 1);
      },
      &err);
  const double grad_z = integrate_split(
      [&](double r) {
        const double d = limit_profile(sol, r).derivative;
        return d * d * std::pow(r, dim);
      },
      &err);
  const double mass_r = integrate_split(
      [&](double r) {
        const double w = limit_profile(sol, r).value;
        return weight(r) * w * w * std::pow(r, dim - 1);
      },
      &err);
  const double mass_z = integrate_split(
      [&](double r) {
        const double w = limit_profile(sol, r).value;
        return weight(r) * w * w * std::pow(r, dim);
      },
      &err);

  // Half-space integrals of radial functions: ∫ f = |S^{N-1}|/2 ∫ f r^{N-1}
  // and ∫ f z_N = ω_{N-1} ∫ f r^N.
  sol.grad_sq_halfspace = half_sphere * grad_r;
  sol.mw2_halfspace = half_sphere * mass_r;
  sol.gamma = omega / (dim + 1) * grad_z;
  sol.gamma1 = omega * mass_z;
  sol.Gamma = 2.0 * (dim - 1) * sol.gamma / sol.grad_sq_halfspace;
  sol.quadrature_error = err;
  return sol;
}

double identity_residual(const LimitSolution& sol) {
  const int dim = sol.params.dim;
  const double I = sol.eigenvalue_I;
  const double r2 = sol.radius_r2;
  const double omega = unit_ball_volume(dim - 1);
  const double t1 = (dim - 1) * sol.gamma;
  const double t2 = I * sol.gamma1;
  const double t3 = 2.0 * sol.gamma;
  const double t4 = 2.0 * I * std::pow(r2, dim + 1) * omega /
                    (dim * (dim + 1)) * sol.mw2_halfspace;
  const double scale = std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4);
  return (t1 - t2 - (t3 - t4)) / scale;
}

}  // namespace habitat
