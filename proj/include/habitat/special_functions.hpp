#pragma once

// Cylinder Bessel functions J0, J1, K0, K1 and the closed-form N = 3 radial
// pair. These are the radial building blocks of the half-space limit profile.

#include <utility>

namespace habitat {

/// Largest argument evaluated; K beyond it is reported as 0 with `clamped`.
inline constexpr double kBesselArgumentCap = 700.0;

struct BesselEval {
  int order = 0;
  double argument = 0.0;
  double value = 0.0;
  double abs_error_bound = 0.0;
  bool clamped = false;
};

/// J_order(x) for order in {0, 1}, x >= 0. Throws InvalidArgument otherwise.
double bessel_j(int order, double x);

/// K_order(x) for order in {0, 1}, x > 0. Returns 0 beyond kBesselArgumentCap.
double bessel_k(int order, double x);

BesselEval bessel_j_eval(int order, double x);
BesselEval bessel_k_eval(int order, double x);

/// (sin x / x, exp(-x) / x): interior and exterior radial solutions for N = 3.
std::pair<double, double> spherical_profile_pair(double x);

/// First positive zero of J0.
inline constexpr double kFirstZeroJ0 = 2.404825557695772768621631879;

}  // namespace habitat
