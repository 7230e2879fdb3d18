#pragma once

#include <functional>

namespace habitat {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol);

}  // namespace habitat
