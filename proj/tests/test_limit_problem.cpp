#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "habitat/error.hpp"
#include "habitat/limit_problem.hpp"
#include "habitat/special_functions.hpp"
#include "oracles.hpp"

using namespace habitat;

namespace {

const double kBetas[] = {0.5, 1.0, 2.0, 4.0};

double first_interior_zero(int dim) { return dim == 2 ? kFirstZeroJ0 : M_PI; }

}  // namespace

TEST_CASE("radius of the ball of measure 2") {
  CHECK(ball_radius(1) == 1.0);
  CHECK(ball_radius(2) == doctest::Approx(0.7978845608).epsilon(1e-10));
  CHECK(ball_radius(3) == doctest::Approx(std::cbrt(3.0 / (2.0 * M_PI))).epsilon(1e-14));
  for (int n : {1, 2, 3}) {
    CHECK(unit_ball_volume(n) * std::pow(ball_radius(n), n) == doctest::Approx(2.0));
  }
}

TEST_CASE("half-ball first moment") {
  // ∫ z_N over the upper half of B_{r2} in the plane, by polar midpoint sums.
  const double r2 = ball_radius(2);
  const int n = 2000;
  double moment = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * r2 / n;
    moment += r * r * (r2 / n) * 2.0;  // ∫_0^π sin = 2
  }
  CHECK(moment == doctest::Approx(unit_ball_volume(1) * std::pow(r2, 3) / 3.0).epsilon(1e-6));
}

TEST_CASE("matching residual bracket behaviour") {
  for (int dim : {2, 3}) {
    for (double beta : kBetas) {
      const LimitParams p{beta, dim};
      const double upper = limit_bracket_upper(p);
      CHECK(upper == doctest::Approx(std::pow(first_interior_zero(dim) / ball_radius(dim), 2)));
      // Exactly one sign change on the 200-point log scan.
      int changes = 0;
      double prev = matching_residual(1e-6, p);
      CHECK(prev < 0.0);
      for (int i = 1; i < 200; ++i) {
        const double c = 1e-6 * std::pow(0.999 * upper / 1e-6, i / 199.0);
        const double r = matching_residual(c, p);
        if ((r > 0) != (prev > 0)) ++changes;
        prev = r;
      }
      CHECK(changes == 1);
      CHECK(matching_residual(upper * (1 - 1e-9), p) > 1e6);
    }
  }
}

TEST_CASE("solution fields") {
  for (int dim : {2, 3}) {
    for (double beta : kBetas) {
      CAPTURE(dim);
      CAPTURE(beta);
      const LimitSolution s = solve_limit_eigenvalue({beta, dim});
      CHECK(std::abs(matching_residual(s.eigenvalue_I, {beta, dim})) < 1e-10);
      CHECK(s.eigenvalue_I < std::pow(s.interior_first_zero / s.radius_r2, 2));
      CHECK(s.Gamma > 0.0);
      CHECK(s.gamma > 0.0);
      CHECK(std::abs(identity_residual(s)) <= 1e-6);
    }
  }
}

TEST_CASE("I increases with beta") {
  for (int dim : {2, 3}) {
    double prev = 0.0;
    for (double beta : kBetas) {
      const double value = solve_limit_eigenvalue({beta, dim}).eigenvalue_I;
      CHECK(value > prev);
      prev = value;
    }
  }
}

TEST_CASE("reference constants for beta = 1, N = 2") {
  const LimitSolution s = solve_limit_eigenvalue({1.0, 2});
  CHECK(s.eigenvalue_I == doctest::Approx(4.095138566182804).epsilon(1e-10));
  CHECK(s.Gamma == doctest::Approx(0.3456433944).epsilon(1e-8));
}

TEST_CASE("identity is invariant under amplitude") {
  for (double beta : {1.0, 2.0}) {
    const LimitSolution s = solve_limit_eigenvalue({beta, 2});
    CHECK(std::abs(identity_residual(s)) <= 1e-6);
    CHECK(std::abs(identity_residual(s.scaled(2.0)) - identity_residual(s)) < 1e-12);
  }
}

TEST_CASE("profile normalisation, continuity and tail") {
  for (int dim : {2, 3}) {
    const LimitSolution s = solve_limit_eigenvalue({1.0, dim});
    const ProfileValue origin = limit_profile(s, 0.0);
    CHECK(origin.value == 1.0);
    CHECK(origin.derivative == 0.0);
    const double r2 = s.radius_r2;
    const ProfileValue left = limit_profile(s, r2 * (1 - 1e-14));
    const ProfileValue right = limit_profile(s, r2 * (1 + 1e-14));
    CHECK(std::abs(left.value - right.value) < 1e-10);
    CHECK(std::abs(left.derivative - right.derivative) < 1e-10);

    // log w + q r + ((N-1)/2) log r is nearly constant on [3 r2, 6 r2].
    const double q = std::sqrt(s.eigenvalue_I);
    double lo = INFINITY;
    double hi = -INFINITY;
    for (int i = 0; i <= 60; ++i) {
      const double r = r2 * (3.0 + 3.0 * i / 60.0);
      const double g = std::log(limit_profile(s, r).value) + q * r + 0.5 * (dim - 1) * std::log(r);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    CHECK(hi - lo <= 0.02 * std::max(1.0, std::abs(0.5 * (hi + lo))));
  }
}

TEST_CASE("profile satisfies the radial ODE") {
  std::mt19937_64 rng(11);
  for (int dim : {2, 3}) {
    const LimitSolution s = solve_limit_eigenvalue({1.0, dim});
    std::uniform_real_distribution<double> dist(0.05, 4.0 * s.radius_r2);
    int checked = 0;
    while (checked < 100) {
      const double r = dist(rng);
      if (std::abs(r - s.radius_r2) < 1e-3) continue;
      ++checked;
      const double h = 1e-5;
      const double w2 =
          (limit_profile(s, r + h).derivative - limit_profile(s, r - h).derivative) / (2 * h);
      const ProfileValue p = limit_profile(s, r);
      const double m = r < s.radius_r2 ? 1.0 : -1.0;
      CHECK(std::abs(w2 + (dim - 1) / r * p.derivative + s.eigenvalue_I * m * p.value) < 1e-8);
    }
  }
}

TEST_CASE("dimension outside 1..3 is rejected") {
  CHECK_THROWS_AS(solve_limit_eigenvalue({1.0, 4}), Error);
  CHECK_THROWS_AS(solve_limit_eigenvalue({0.0, 2}), Error);
}

TEST_CASE("finite-difference scaling law on a small grid") {
  const double r2 = ball_radius(2);
  const double base = oracle::fd_limit_eigenvalue(r2, 1.0, 12 * r2, 80, 1e-10);
  const double scaled = oracle::fd_limit_eigenvalue(2 * r2, 1.0, 24 * r2, 80, 1e-10);
  CHECK(scaled * 4.0 == doctest::Approx(base).epsilon(1e-8));
}
