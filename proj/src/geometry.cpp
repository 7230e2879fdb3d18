#include "habitat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "habitat/error.hpp"

namespace habitat {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi - 1e-12) t = 0.0;
  return t;
}

Point perp(const Point& v) { return Point(-v.y(), v.x()); }

}  // namespace

double angular_distance(double a, double b) {
  const double d = wrap_angle(a - b);
  return std::min(d, kTwoPi - d);
}

DomainSpec::DomainSpec(Point center, std::vector<double> fourier_cos,
                       std::vector<double> fourier_sin)
    : center_(std::move(center)),
      cos_(std::move(fourier_cos)),
      sin_(std::move(fourier_sin)) {
  if (cos_.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "domain needs at least the constant Fourier coefficient");
  }
  constexpr int kGrid = 4096;
  r_min_ = std::numeric_limits<double>::infinity();
  r_max_ = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double r = radius(kTwoPi * i / kGrid);
    r_min_ = std::min(r_min_, r);
    r_max_ = std::max(r_max_, r);
  }
  if (!(r_min_ > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "polar radius must stay positive, min " +
                    std::to_string(r_min_));
  }
}

DomainSpec DomainSpec::disk(double radius, Point center) {
  return DomainSpec(std::move(center), {radius}, {});
}

DomainSpec DomainSpec::ellipse(double a, double b, Point center) {
  // Trapezoidal sampling is spectrally accurate for the analytic periodic
  // radius; coefficients decay like exp(-k asinh(...)).
  constexpr int kSamples = 1024;
  constexpr int kTerms = 200;
  std::vector<double> samples(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    const double t = kTwoPi * i / kSamples;
    const double c = std::cos(t);
    const double s = std::sin(t);
    samples[i] = a * b / std::sqrt(b * b * c * c + a * a * s * s);
  }
  std::vector<double> cs(kTerms + 1, 0.0);
  std::vector<double> sn(kTerms, 0.0);
  for (int k = 0; k <= kTerms; ++k) {
    double ac = 0.0;
    double as = 0.0;
    for (int i = 0; i < kSamples; ++i) {
      const double t = kTwoPi * i / kSamples;
      ac += samples[i] * std::cos(k * t);
      as += samples[i] * std::sin(k * t);
    }
    const double scale = (k == 0 ? 1.0 : 2.0) / kSamples;
    cs[k] = std::abs(ac * scale) < 1e-16 ? 0.0 : ac * scale;
    if (k > 0) sn[k - 1] = std::abs(as * scale) < 1e-16 ? 0.0 : as * scale;
  }
  while (cs.size() > 1 && cs.back() == 0.0) cs.pop_back();
  while (!sn.empty() && sn.back() == 0.0) sn.pop_back();
  return DomainSpec(std::move(center), std::move(cs), std::move(sn));
}

double DomainSpec::radius(double theta, int derivative) const {
  // d^n/dθ^n cos(kθ) = k^n cos(kθ + nπ/2), likewise for sin.
  const double shift = derivative * std::numbers::pi / 2.0;
  double r = derivative == 0 ? cos_[0] : 0.0;
  const std::size_t n = std::max(cos_.size(), sin_.size() + 1);
  for (std::size_t k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double scale = std::pow(kk, derivative);
    const double arg = kk * theta + shift;
    if (k < cos_.size()) r += cos_[k] * scale * std::cos(arg);
    if (k - 1 < sin_.size()) r += sin_[k - 1] * scale * std::sin(arg);
  }
  return r;
}

Point DomainSpec::position(double theta) const {
  return center_ + radius(theta) * Point(std::cos(theta), std::sin(theta));
}

Point DomainSpec::tangent(double theta) const {
  const Point e(std::cos(theta), std::sin(theta));
  return radius(theta, 1) * e + radius(theta) * perp(e);
}

Point DomainSpec::second_derivative(double theta) const {
  const Point e(std::cos(theta), std::sin(theta));
  return (radius(theta, 2) - radius(theta)) * e + 2.0 * radius(theta, 1) * perp(e);
}

double DomainSpec::curvature(double theta) const {
  const double r = radius(theta);
  const double r1 = radius(theta, 1);
  const double r2 = radius(theta, 2);
  const double d = r * r + r1 * r1;
  return (r * r + 2.0 * r1 * r1 - r * r2) / std::pow(d, 1.5);
}

double DomainSpec::curvature_derivative(double theta) const {
  const double r = radius(theta);
  const double r1 = radius(theta, 1);
  const double r2 = radius(theta, 2);
  const double r3 = radius(theta, 3);
  const double num = r * r + 2.0 * r1 * r1 - r * r2;
  const double den = r * r + r1 * r1;
  const double dnum = 2.0 * r * r1 + 3.0 * r1 * r2 - r * r3;
  const double dden = 2.0 * r * r1 + 2.0 * r1 * r2;
  return dnum / std::pow(den, 1.5) - 1.5 * num * dden / std::pow(den, 2.5);
}

double DomainSpec::area() const {
  // (1/2)∫R² = π a0² + (π/2) Σ (a_k² + b_k²).
  double s = std::numbers::pi * cos_[0] * cos_[0];
  for (std::size_t k = 1; k < cos_.size(); ++k) {
    s += 0.5 * std::numbers::pi * cos_[k] * cos_[k];
  }
  for (double b : sin_) s += 0.5 * std::numbers::pi * b * b;
  return s;
}

DomainSpec DomainSpec::transformed(double angle, const Point& shift) const {
  const Eigen::Rotation2Dd rot(angle);
  const std::size_t n = std::max(cos_.size(), sin_.size() + 1);
  std::vector<double> cs(n, 0.0);
  std::vector<double> sn(n - 1, 0.0);
  cs[0] = cos_[0];
  for (std::size_t k = 1; k < n; ++k) {
    const double a = k < cos_.size() ? cos_[k] : 0.0;
    const double b = k - 1 < sin_.size() ? sin_[k - 1] : 0.0;
    const double c = std::cos(k * angle);
    const double s = std::sin(k * angle);
    cs[k] = a * c - b * s;
    sn[k - 1] = a * s + b * c;
  }
  return DomainSpec(rot * center_ + shift, std::move(cs), std::move(sn));
}

double DomainSpec::polar_angle(const Point& p) const {
  const Point d = p - center_;
  return wrap_angle(std::atan2(d.y(), d.x()));
}

bool DomainSpec::contains(const Point& p) const {
  const double r = (p - center_).norm();
  return r <= radius(polar_angle(p)) * (1.0 + 1e-12);
}

BoundaryPoint curvature_at(const DomainSpec& spec, double theta) {
  BoundaryPoint bp;
  bp.theta = wrap_angle(theta);
  bp.position = spec.position(bp.theta);
  bp.curvature = spec.curvature(bp.theta);
  bp.inward_normal = perp(spec.tangent(bp.theta)).normalized();
  return bp;
}

BoundaryPoint max_curvature(const DomainSpec& spec) {
  constexpr int kScan = 8192;
  const double step = kTwoPi / kScan;
  std::vector<double> kappa(kScan);
  for (int i = 0; i < kScan; ++i) kappa[i] = spec.curvature(step * i);
  const double top = *std::max_element(kappa.begin(), kappa.end());
  const double tie = 1e-10 * std::max(std::abs(top), 1e-300);
  int best = 0;
  while (kappa[best] < top - tie) ++best;

  const double left = kappa[(best + kScan - 1) % kScan];
  const double right = kappa[(best + 1) % kScan];
  double theta = step * best;
  // Refine only strict local maxima; plateaus keep the tie-break angle.
  if (left < kappa[best] - tie || right < kappa[best] - tie) {
    double t = theta;
    for (int it = 0; it < 60; ++it) {
      const double g = spec.curvature_derivative(t);
      constexpr double h = 1e-6;
      const double gg = (spec.curvature_derivative(t + h) -
                         spec.curvature_derivative(t - h)) / (2.0 * h);
      if (!(gg < 0.0)) break;
      const double dt = std::clamp(-g / gg, -step, step);
      t += dt;
      if (std::abs(dt) < 1e-14) break;
    }
    if (std::abs(t - theta) <= 2.0 * step &&
        spec.curvature(t) >= kappa[best] - tie) {
      theta = t;
    }
  }
  return curvature_at(spec, theta);
}

BoundaryPoint project_to_boundary(const DomainSpec& spec, const Point& p) {
  constexpr int kScan = 4096;
  const double step = kTwoPi / kScan;
  std::vector<double> dist(kScan);
  for (int i = 0; i < kScan; ++i) {
    dist[i] = (spec.position(step * i) - p).squaredNorm();
  }
  const double best_d = *std::min_element(dist.begin(), dist.end());
  const double tie = 1e-12 * std::max(best_d, spec.min_radius() * spec.min_radius());
  int best = 0;
  while (dist[best] > best_d + tie) ++best;

  double t = step * best;
  for (int it = 0; it < 60; ++it) {
    const Point d = spec.position(t) - p;
    const Point g1 = spec.tangent(t);
    const double g = d.dot(g1);
    const double gp = g1.squaredNorm() + d.dot(spec.second_derivative(t));
    if (!(gp > 0.0)) break;
    const double dt = std::clamp(-g / gp, -2.0 * step, 2.0 * step);
    t += dt;
    if (std::abs(dt) < 1e-15) break;
  }
  if ((spec.position(t) - p).squaredNorm() > dist[best]) t = step * best;
  return curvature_at(spec, t);
}

}  // namespace habitat
