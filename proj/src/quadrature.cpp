#include "habitat/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace habitat {

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double rel_tol) {
  QuadratureResult out;
  double l1 = 0.0;
  out.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 30, rel_tol, &out.error_estimate, &l1);
  return out;
}

}  // namespace habitat
