#pragma once

// Star-shaped planar domains with a Fourier polar radius
//
//   ∂Ω = { c + R(θ) (cos θ, sin θ) },  R(θ) = Σ a_k cos kθ + Σ b_k sin kθ,
//
// their boundary curvature, and nearest-point projection.

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <vector>

namespace habitat {

using Point = Eigen::Vector2d;

class DomainSpec {
 public:
  /// `fourier_cos[k]` multiplies cos(kθ) for k >= 0; `fourier_sin[j]`
  /// multiplies sin((j+1)θ). Throws InvalidArgument when R is not bounded
  /// away from zero on a 4096-point grid.
  DomainSpec(Point center, std::vector<double> fourier_cos,
             std::vector<double> fourier_sin);

  static DomainSpec disk(double radius, Point center = Point::Zero());
  /// Ellipse with semi-axes a (along x) and b, via a spectrally accurate
  /// Fourier fit of its polar radius.
  static DomainSpec ellipse(double a, double b, Point center = Point::Zero());

  const Point& center() const { return center_; }
  const std::vector<double>& fourier_cos() const { return cos_; }
  const std::vector<double>& fourier_sin() const { return sin_; }

  /// d-th derivative of R at θ, d in 0..3.
  double radius(double theta, int derivative = 0) const;
  double min_radius() const { return r_min_; }
  double max_radius() const { return r_max_; }

  Point position(double theta) const;
  /// dγ/dθ and d²γ/dθ² of the boundary parametrisation.
  Point tangent(double theta) const;
  Point second_derivative(double theta) const;

  /// Plane-curve curvature (R² + 2R'² - R R'') / (R² + R'²)^{3/2}.
  double curvature(double theta) const;
  double curvature_derivative(double theta) const;

  /// Exact enclosed area: (1/2) ∫ R² dθ.
  double area() const;

  /// Rigid rotation by `angle` about the origin followed by translation.
  DomainSpec transformed(double angle, const Point& shift) const;

  /// True when p lies inside the closed domain.
  bool contains(const Point& p) const;

  /// Polar angle of p about the center, in [0, 2π).
  double polar_angle(const Point& p) const;

 private:
  Point center_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  double r_min_ = 0.0;
  double r_max_ = 0.0;
};

struct BoundaryPoint {
  double theta = 0.0;
  Point position = Point::Zero();
  double curvature = 0.0;
  Point inward_normal = Point::Zero();
};

BoundaryPoint curvature_at(const DomainSpec& spec, double theta);

/// Global curvature maximiser: 8192-point scan, Newton refinement on κ',
/// ties (within 1e-12 relative) broken by smallest θ.
BoundaryPoint max_curvature(const DomainSpec& spec);

/// Closest boundary point to p: scan plus Newton. Equidistant candidates
/// resolve to the smallest θ.
BoundaryPoint project_to_boundary(const DomainSpec& spec, const Point& p);

/// Wrapped angular distance in [0, π].
double angular_distance(double a, double b);

}  // namespace habitat
