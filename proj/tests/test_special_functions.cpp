#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "habitat/error.hpp"
#include "habitat/special_functions.hpp"
#include "oracles.hpp"

using namespace habitat;

TEST_CASE("J at the origin") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  CHECK(bessel_j(1, 0.0) == 0.0);
}

TEST_CASE("first zero of J0 against the series oracle") {
  double lo = 2.3;
  double hi = 2.5;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle::bessel_j_series(0, mid) > 0.0 ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - kFirstZeroJ0) < 1e-12);
  CHECK(std::abs(bessel_j(0, lo)) < 1e-10);
}

TEST_CASE("small-argument behaviour of K") {
  const double x = 1e-6;
  CHECK(std::abs(x * bessel_k(1, x) - 1.0) < 1e-4);
  const double euler_gamma = 0.57721566490153286;
  const double k0_approx = -std::log(5e-7) - euler_gamma;
  CHECK(std::abs(bessel_k(0, x) / k0_approx - 1.0) < 1e-4);
}

TEST_CASE("K0(1) against the integral representation") {
  CHECK(bessel_k(0, 1.0) == doctest::Approx(oracle::bessel_k_integral(0, 1.0)).epsilon(1e-12));
  CHECK(bessel_k(0, 1.0) == doctest::Approx(0.42102443824070834).epsilon(1e-13));
}

TEST_CASE("spherical pair") {
  CHECK(std::abs(spherical_profile_pair(1e-8).first - 1.0) < 1e-15);
  CHECK(std::abs(spherical_profile_pair(M_PI).first) < 1e-15);
  CHECK(spherical_profile_pair(1.0).second == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("oracle equivalence on log-spaced points") {
  for (int i = 0; i < 50; ++i) {
    const double x = 1e-3 * std::pow(2e4, i / 49.0);
    for (int order : {0, 1}) {
      CAPTURE(x);
      CAPTURE(order);
      const double j_ref = oracle::bessel_j_series(order, x);
      // Near a zero of J relative error is meaningless; bound by the scale of J.
      const double j_scale = std::max(std::abs(j_ref), std::sqrt(2.0 / (M_PI * x)) * 1e-3);
      CHECK(std::abs(bessel_j(order, x) - j_ref) <= 1e-9 * j_scale + 1e-300);
      const double k_ref = oracle::bessel_k_integral(order, x);
      CHECK(std::abs(bessel_k(order, x) - k_ref) <= 1e-9 * k_ref);
    }
  }
}

TEST_CASE("derivative identities by central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 50.0);
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double x = dist(rng);
    CAPTURE(x);
    const double dj0 = (bessel_j(0, x + h) - bessel_j(0, x - h)) / (2 * h);
    CHECK(std::abs(dj0 + bessel_j(1, x)) < 1e-6);
    const double dk0 = (bessel_k(0, x + h) - bessel_k(0, x - h)) / (2 * h);
    CHECK(std::abs(dk0 + bessel_k(1, x)) < 1e-6);
  }
}

TEST_CASE("K is strictly decreasing") {
  double prev0 = INFINITY;
  double prev1 = INFINITY;
  for (int i = 0; i <= 400; ++i) {
    const double x = 1e-4 * std::pow(1e6, i / 400.0);
    if (x > 600) break;
    const double k0 = bessel_k(0, x);
    const double k1 = bessel_k(1, x);
    CHECK(k0 < prev0);
    CHECK(k1 < prev1);
    prev0 = k0;
    prev1 = k1;
  }
}

TEST_CASE("argument cap and domain errors") {
  const BesselEval far = bessel_k_eval(0, 1000.0);
  CHECK(far.clamped);
  CHECK(far.value == 0.0);
  CHECK_FALSE(bessel_k_eval(0, 10.0).clamped);
  CHECK_THROWS_AS(bessel_j(2, 1.0), Error);
  CHECK_THROWS_AS(bessel_j(0, -1.0), Error);
  CHECK_THROWS_AS(bessel_k(0, 0.0), Error);
}
