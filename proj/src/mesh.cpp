#include "habitat/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "habitat/error.hpp"

namespace habitat {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                (b.y() - a.y()) * (c.x() - a.x()));
}

// Normalised-arclength parametrisation of the boundary; every ring is a
// homothetic copy, so the same map applies to all rings.
class ArclengthMap {
 public:
  explicit ArclengthMap(const DomainSpec& spec) {
    constexpr int kSamples = 16384;
    theta_.resize(kSamples + 1);
    cum_.resize(kSamples + 1);
    std::vector<double> speed(kSamples + 1);
    for (int i = 0; i <= kSamples; ++i) {
      theta_[i] = kTwoPi * i / kSamples;
      speed[i] = spec.tangent(theta_[i]).norm();
    }
    cum_[0] = 0.0;
    for (int i = 1; i <= kSamples; ++i) {
      cum_[i] = cum_[i - 1] + 0.5 * (speed[i - 1] + speed[i]) * (theta_[i] - theta_[i - 1]);
    }
    length_ = cum_.back();
    for (double& c : cum_) c /= length_;
  }

  double length() const { return length_; }

  /// θ at normalised arclength τ in [0, 1).
  double theta(double tau) const {
    tau -= std::floor(tau);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), tau);
    const std::size_t i = std::clamp<std::size_t>(it - cum_.begin(), 1, cum_.size() - 1);
    const double f = (tau - cum_[i - 1]) / (cum_[i] - cum_[i - 1]);
    return theta_[i - 1] + f * (theta_[i] - theta_[i - 1]);
  }

 private:
  std::vector<double> theta_;
  std::vector<double> cum_;
  double length_ = 0.0;
};

struct Ring {
  double scale = 1.0;
  int count = 0;
  double phase = 0.0;
  int first_vertex = 0;
};

}  // namespace

double Mesh::total_measure() const {
  double s = 0.0;
  for (double a : cell_measure) s += a;
  return s;
}

double Mesh::min_cell_measure() const {
  return *std::min_element(cell_measure.begin(), cell_measure.end());
}

Point Mesh::centroid(int cell) const {
  const auto& t = triangles[cell];
  return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
}

void Mesh::update_measures() {
  cell_measure.resize(triangles.size());
  for (std::size_t c = 0; c < triangles.size(); ++c) {
    const auto& t = triangles[c];
    cell_measure[c] = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
  }
}

Mesh Mesh::transformed(double scale, double angle, const Point& shift) const {
  Mesh out = *this;
  const Eigen::Rotation2Dd rot(angle);
  for (Point& v : out.vertices) v = scale * (rot * v) + shift;
  out.resolution = resolution * scale;
  out.update_measures();
  return out;
}

Mesh Mesh::from_triangles(std::vector<Point> vertices,
                          std::vector<std::array<int, 3>> triangles) {
  Mesh m;
  m.vertices = std::move(vertices);
  m.triangles = std::move(triangles);
  m.update_measures();
  std::map<std::pair<int, int>, int> edge_use;
  double longest = 0.0;
  for (const auto& t : m.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      ++edge_use[{std::min(a, b), std::max(a, b)}];
      longest = std::max(longest, (m.vertices[a] - m.vertices[b]).norm());
    }
  }
  m.boundary_flags.assign(m.vertices.size(), false);
  for (const auto& [edge, uses] : edge_use) {
    if (uses == 1) {
      m.boundary_flags[edge.first] = true;
      m.boundary_flags[edge.second] = true;
    }
  }
  m.resolution = longest;
  return m;
}

double aspect_ratio(const Mesh& mesh, int cell) {
  const auto& t = mesh.triangles[cell];
  double longest = 0.0;
  for (int e = 0; e < 3; ++e) {
    longest = std::max(longest, (mesh.vertices[t[e]] - mesh.vertices[t[(e + 1) % 3]]).norm());
  }
  const double altitude = 2.0 * std::abs(mesh.cell_measure[cell]) / longest;
  return longest / altitude;
}

Mesh build_mesh(const DomainSpec& spec, double resolution) {
  if (!(resolution > 0.0) || !(resolution < spec.min_radius() / 4.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "mesh resolution must lie in (0, R_min/4)");
  }
  return build_mesh(spec, MeshSizing::uniform(resolution));
}

Mesh build_mesh(const DomainSpec& spec, const MeshSizing& sizing) {
  if (!(sizing.boundary_h > 0.0) || !(sizing.interior_h >= sizing.boundary_h) ||
      !(sizing.boundary_h < spec.min_radius() / 4.0) || !(sizing.growth >= 1.0) ||
      sizing.symmetry < 1) {
    throw Error(ErrorCode::kInvalidArgument, "invalid mesh sizing");
  }
  const ArclengthMap arclength(spec);
  const double r_min = spec.min_radius();
  const double r_max = spec.max_radius();

  // Ring scales from the boundary inwards.
  std::vector<Ring> rings;
  double s = 1.0;
  double h = sizing.boundary_h;
  for (int j = 0;; ++j) {
    Ring ring;
    ring.scale = s;
    ring.count = std::max(6, static_cast<int>(std::ceil(s * arclength.length() / h)));
    ring.count = (ring.count + sizing.symmetry - 1) / sizing.symmetry * sizing.symmetry;
    ring.phase = (j % 2 == 0) ? 0.0 : 0.5;
    rings.push_back(ring);

    const double depth = (1.0 - s) * r_min;
    double h_next = h;
    if (depth >= sizing.layer_depth) h_next = std::min(sizing.interior_h, h * sizing.growth);
    const double s_next = s - h / r_max;
    if (s_next * r_min < 0.5 * h_next) break;
    s = s_next;
    h = h_next;
  }

  Mesh mesh;
  for (Ring& ring : rings) {
    ring.first_vertex = static_cast<int>(mesh.vertices.size());
    for (int i = 0; i < ring.count; ++i) {
      const double theta = arclength.theta((i + ring.phase) / ring.count);
      const Point e(std::cos(theta), std::sin(theta));
      mesh.vertices.push_back(spec.center() + ring.scale * spec.radius(theta) * e);
    }
  }
  const int center_vertex = static_cast<int>(mesh.vertices.size());
  mesh.vertices.push_back(spec.center());

  for (std::size_t j = 0; j + 1 < rings.size(); ++j) {
    const Ring& outer = rings[j];
    const Ring& inner = rings[j + 1];
    auto outer_pos = [&](int k) { return (k + outer.phase) / outer.count; };
    // Inner unwrapped positions start at the node closest to outer_pos(0).
    const int b0 = static_cast<int>(std::lround(outer_pos(0) * inner.count - inner.phase));
    auto outer_id = [&](int k) { return outer.first_vertex + k % outer.count; };
    auto inner_id = [&](int k) {
      return inner.first_vertex + ((b0 + k) % inner.count + inner.count) % inner.count;
    };
    // outer_pos(a) < inner_pos(b) in exact integer arithmetic (phases are 0 or 1/2).
    const long long po2 = outer.phase > 0.0 ? 1 : 0;
    const long long pi2 = inner.phase > 0.0 ? 1 : 0;
    auto outer_first = [&](long long a, long long b) {
      return (2 * a + po2) * inner.count < (2 * (b0 + b) + pi2) * outer.count;
    };
    int ka = 0;
    int kb = 0;
    while (ka < outer.count || kb < inner.count) {
      const bool advance_outer =
          kb == inner.count || (ka < outer.count && outer_first(ka + 1, kb + 1));
      if (advance_outer) {
        mesh.triangles.push_back({outer_id(ka), outer_id(ka + 1), inner_id(kb)});
        ++ka;
      } else {
        mesh.triangles.push_back({outer_id(ka), inner_id(kb + 1), inner_id(kb)});
        ++kb;
      }
    }
  }
  const Ring& last = rings.back();
  for (int i = 0; i < last.count; ++i) {
    mesh.triangles.push_back({center_vertex, last.first_vertex + i,
                              last.first_vertex + (i + 1) % last.count});
  }

  mesh.boundary_flags.assign(mesh.vertices.size(), false);
  for (int i = 0; i < rings.front().count; ++i) mesh.boundary_flags[i] = true;
  mesh.resolution = sizing.boundary_h;
  mesh.update_measures();

  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!(mesh.cell_measure[c] > 0.0) || !(aspect_ratio(mesh, c) < 20.0)) {
      const auto& t = mesh.triangles[c];
      std::ostringstream msg;
      msg << "degenerate triangle " << c << " (" << t[0] << ", " << t[1]
          << ", " << t[2] << "), area " << mesh.cell_measure[c];
      throw Error(ErrorCode::kMeshFailure, msg.str());
    }
  }
  return mesh;
}

void write_mesh_text(const Mesh& mesh, std::ostream& out) {
  char buf[96];
  for (const Point& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v.x(), v.y());
    out << buf;
  }
  for (const auto& t : mesh.triangles) {
    out << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

std::vector<std::vector<int>> vertex_neighbors(const Mesh& mesh) {
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      adj[t[e]].push_back(t[(e + 1) % 3]);
      adj[t[e]].push_back(t[(e + 2) % 3]);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<std::vector<int>> cell_neighbors(const Mesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> by_edge;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    for (int e = 0; e < 3; ++e) {
      const int a = t[e];
      const int b = t[(e + 1) % 3];
      by_edge[{std::min(a, b), std::max(a, b)}].push_back(c);
    }
  }
  std::vector<std::vector<int>> adj(mesh.triangles.size());
  for (const auto& [edge, cells] : by_edge) {
    for (int a : cells) {
      for (int b : cells) {
        if (a != b) adj[a].push_back(b);
      }
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return adj;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  Point lo = mesh.vertices.front();
  Point hi = lo;
  for (const Point& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  const double extent = std::max(hi.x() - lo.x(), hi.y() - lo.y());
  cell_size_ = std::max(1.5 * std::sqrt(mesh.total_measure() / mesh.num_cells()),
                        extent / 2048.0);
  lo_ = lo - Point::Constant(1e-9 * extent);
  nx_ = static_cast<int>((hi.x() - lo_.x()) / cell_size_) + 1;
  ny_ = static_cast<int>((hi.y() - lo_.y()) / cell_size_) + 1;
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    Point tlo = mesh.vertices[t[0]];
    Point thi = tlo;
    for (int k = 1; k < 3; ++k) {
      tlo = tlo.cwiseMin(mesh.vertices[t[k]]);
      thi = thi.cwiseMax(mesh.vertices[t[k]]);
    }
    const int x0 = static_cast<int>((tlo.x() - lo_.x()) / cell_size_);
    const int x1 = std::min(nx_ - 1, static_cast<int>((thi.x() - lo_.x()) / cell_size_));
    const int y0 = static_cast<int>((tlo.y() - lo_.y()) / cell_size_);
    const int y1 = std::min(ny_ - 1, static_cast<int>((thi.y() - lo_.y()) / cell_size_));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) buckets_[static_cast<std::size_t>(y) * nx_ + x].push_back(c);
    }
  }
}

std::optional<PointLocator::Hit> PointLocator::locate(const Point& p) const {
  const double fx = (p.x() - lo_.x()) / cell_size_;
  const double fy = (p.y() - lo_.y()) / cell_size_;
  if (fx < 0.0 || fy < 0.0 || fx >= nx_ || fy >= ny_) return std::nullopt;
  const auto& bucket = buckets_[static_cast<std::size_t>(fy) * nx_ + static_cast<std::size_t>(fx)];
  for (int c : bucket) {
    const auto& t = mesh_->triangles[c];
    const Point& a = mesh_->vertices[t[0]];
    const Point& b = mesh_->vertices[t[1]];
    const Point& d = mesh_->vertices[t[2]];
    const double area = signed_area(a, b, d);
    const double l0 = signed_area(p, b, d) / area;
    const double l1 = signed_area(a, p, d) / area;
    const double l2 = 1.0 - l0 - l1;
    constexpr double kTol = -1e-12;
    if (l0 >= kTol && l1 >= kTol && l2 >= kTol) return Hit{c, {l0, l1, l2}};
  }
  return std::nullopt;
}

std::optional<double> PointLocator::interpolate(const std::vector<double>& field,
                                                const Point& p) const {
  const auto hit = locate(p);
  if (!hit) return std::nullopt;
  const auto& t = mesh_->triangles[hit->cell];
  return hit->barycentric[0] * field[t[0]] + hit->barycentric[1] * field[t[1]] +
         hit->barycentric[2] * field[t[2]];
}

}  // namespace habitat
