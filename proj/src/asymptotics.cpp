#include "habitat/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "habitat/error.hpp"

namespace habitat {
namespace {

constexpr int kDim = 2;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Unit direction at angle psi from the inward normal, turning towards +tangent.
Point ray_direction(const BoundaryPoint& base, double psi) {
  const Point n = base.inward_normal;
  const Point t(-n.y(), n.x());
  return std::cos(psi) * n + std::sin(psi) * t;
}

}  // namespace

double blowup_length(double delta) { return std::pow(delta, 1.0 / kDim); }

PeakData extract_peak(const std::vector<double>& u, const Mesh& mesh, const DomainSpec& spec,
                      double delta) {
  if (static_cast<int>(u.size()) != mesh.num_vertices() || u.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "field size does not match mesh vertices");
  }
  PeakData peak;
  peak.argmax_vertex =
      static_cast<int>(std::max_element(u.begin(), u.end()) - u.begin());
  peak.max_value = u[peak.argmax_vertex];
  const Point& x = mesh.vertices[peak.argmax_vertex];
  peak.P_delta = project_to_boundary(spec, x);
  peak.interior_offset = (x - peak.P_delta.position).norm();

  const auto neighbors = vertex_neighbors(mesh);
  if (mesh.boundary_flags[peak.argmax_vertex]) {
    // Sub-vertex location: vertex of the parabola through the argmax and its
    // two boundary neighbours, in the boundary angle.
    std::vector<int> side;
    for (int w : neighbors[peak.argmax_vertex]) {
      if (mesh.boundary_flags[w]) side.push_back(w);
    }
    if (side.size() == 2) {
      const double t0 = spec.polar_angle(x);
      auto offset = [&](int w) {
        return std::remainder(spec.polar_angle(mesh.vertices[w]) - t0, 2.0 * std::numbers::pi);
      };
      double a = offset(side[0]);
      double b = offset(side[1]);
      double fa = u[side[0]];
      double fb = u[side[1]];
      if (a > b) {
        std::swap(a, b);
        std::swap(fa, fb);
      }
      const double f0 = u[peak.argmax_vertex];
      // Divided differences of the interpolating quadratic.
      const double d1 = (f0 - fa) / -a;
      const double d2 = ((fb - f0) / b - d1) / (b - a);
      if (a < 0.0 && b > 0.0 && d2 < 0.0) {
        const double shift = std::clamp(0.5 * (a - d1 / d2), a, b);
        peak.P_delta = curvature_at(spec, t0 + shift);
      }
    }
  }
  peak.alpha_delta = (kDim - 1) * peak.P_delta.curvature;

  const double far = 4.0 * blowup_length(delta);
  for (int v = 0; v < mesh.num_vertices() && !peak.secondary_peak; ++v) {
    if (v == peak.argmax_vertex || u[v] <= 0.5 * peak.max_value) continue;
    if ((mesh.vertices[v] - x).norm() <= far) continue;
    const bool local_max = std::all_of(neighbors[v].begin(), neighbors[v].end(),
                                       [&](int w) { return u[w] <= u[v]; });
    peak.secondary_peak = local_max;
  }
  return peak;
}

BoundaryPoint boundary_center(const IndicatorSet& set, const Mesh& mesh, const DomainSpec& spec) {
  if (set.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty set");
  Point weighted = Point::Zero();
  double total = 0.0;
  for (int c : set.cells) {
    weighted += mesh.cell_measure[c] * mesh.centroid(c);
    total += mesh.cell_measure[c];
  }
  if (set.partial_cell >= 0) {
    const double share = set.partial_fraction * mesh.cell_measure[set.partial_cell];
    weighted += share * mesh.centroid(set.partial_cell);
    total += share;
  }
  return project_to_boundary(spec, weighted / total);
}

double superlevel_measure(const std::vector<double>& u, double level, const Mesh& mesh) {
  double total = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& t = mesh.triangles[c];
    std::array<double, 3> f{u[t[0]], u[t[1]], u[t[2]]};
    std::sort(f.begin(), f.end());
    const double area = mesh.cell_measure[c];
    if (level <= f[0]) {
      total += area;
    } else if (level <= f[1]) {
      total += area * (1.0 - (level - f[0]) * (level - f[0]) / ((f[1] - f[0]) * (f[2] - f[0])));
    } else if (level < f[2]) {
      total += area * (f[2] - level) * (f[2] - level) / ((f[2] - f[0]) * (f[2] - f[1]));
    }
  }
  return total;
}

double measure_level(const std::vector<double>& u, const Mesh& mesh, double delta) {
  const auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (!(delta > 0.0) || !(delta < mesh.total_measure()) || !(lo < hi)) {
    throw Error(ErrorCode::kInvalidArgument, "no superlevel set of that measure");
  }
  for (int k = 0; k < 200 && lo < hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (superlevel_measure(u, mid, mesh) >= delta ? lo : hi) = mid;
  }
  return lo;
}

namespace {

// `state(p)`: 1 inside D, 0 in Ω \ D, -1 off the mesh.
template <class State>
NearSphereParam parametrize(const State& state, const BoundaryPoint& Q, double delta) {
  const double ell = blowup_length(delta);
  const double r2 = ball_radius(kDim);
  const double reach = 3.0 * r2 * ell;
  const double step = ell / 400.0;
  const int steps = static_cast<int>(std::ceil(reach / step));

  NearSphereParam out;
  out.Q_delta = Q;
  out.rays = kParametrizationRays;
  const double dpsi = std::numbers::pi / kParametrizationRays;
  std::vector<double> rho(kParametrizationRays, kNaN);
  for (int i = 0; i < kParametrizationRays; ++i) {
    const double psi = -0.5 * std::numbers::pi + (i + 0.5) * dpsi;
    const Point dir = ray_direction(Q, psi);
    auto at = [&](double s) { return state(Point(Q.position + s * dir)); };
    int previous = at(step);
    if (previous < 0) {
      ++out.exiting_rays;
      continue;
    }
    const bool starts_inside = previous == 1;
    int changes = 0;
    double crossing = starts_inside ? kNaN : 0.0;
    bool exited_inside = false;
    for (int k = 2; k <= steps; ++k) {
      const int current = at(k * step);
      if (current < 0) {
        exited_inside = previous == 1;
        break;
      }
      if (current != previous && ++changes == 1) {
        double lo = (k - 1) * step;
        double hi = k * step;
        for (int b = 0; b < 40; ++b) {
          const double mid = 0.5 * (lo + hi);
          (at(mid) == previous ? lo : hi) = mid;
        }
        crossing = 0.5 * (lo + hi);
      }
      previous = current;
    }
    if (changes > (starts_inside ? 1 : 0)) {
      ++out.multi_crossing_rays;
    } else if (exited_inside || std::isnan(crossing)) {
      ++out.exiting_rays;
    } else {
      rho[i] = crossing / ell - r2;
    }
  }
  if (out.multi_crossing_rays > 0.05 * kParametrizationRays) {
    throw Error(ErrorCode::kNotStarShaped,
                std::to_string(out.multi_crossing_rays) + " of " +
                    std::to_string(kParametrizationRays) + " rays cross the free boundary twice");
  }

  double sum_sq = 0.0;
  for (int i = 0; i < kParametrizationRays; ++i) {
    if (std::isnan(rho[i])) continue;
    out.samples.push_back({-0.5 * std::numbers::pi + (i + 0.5) * dpsi, rho[i]});
    sum_sq += rho[i] * rho[i] * dpsi;
    out.sup_norm = std::max(out.sup_norm, std::abs(rho[i]));
    if (i >= 2 && !std::isnan(rho[i - 1]) && !std::isnan(rho[i - 2])) {
      out.grad_lipschitz_estimate =
          std::max(out.grad_lipschitz_estimate,
                   std::abs(rho[i] - 2.0 * rho[i - 1] + rho[i - 2]) / (dpsi * dpsi));
    }
  }
  out.l2_norm = std::sqrt(sum_sq);
  return out;
}

}  // namespace

NearSphereParam polar_parametrization(const IndicatorSet& set, const BoundaryPoint& Q,
                                      double delta, const Mesh& mesh) {
  const std::vector<bool> member = set.mask(mesh.num_cells());
  const PointLocator locator(mesh);
  return parametrize(
      [&](const Point& p) {
        const auto hit = locator.locate(p);
        if (!hit) return -1;
        return member[hit->cell] ? 1 : 0;
      },
      Q, delta);
}

NearSphereParam polar_parametrization(const std::vector<double>& u, double level,
                                      const BoundaryPoint& Q, double delta, const Mesh& mesh) {
  const PointLocator locator(mesh);
  return parametrize(
      [&](const Point& p) {
        const auto value = locator.interpolate(u, p);
        if (!value) return -1;
        return *value >= level ? 1 : 0;
      },
      Q, delta);
}

DecayFit decay_fit(const std::vector<double>& u, const PeakData& peak, double delta,
                   const Mesh& mesh) {
  const double ell = blowup_length(delta);
  const double floor = 1e-12 * peak.max_value;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double r = (mesh.vertices[v] - peak.P_delta.position).norm();
    if (r <= ell || r >= 4.0 * ell || !(u[v] > floor)) continue;
    xs.push_back(r);
    ys.push_back(std::log(u[v]) + 0.5 * (kDim - 1) * std::log(r));
  }
  if (xs.size() < 30) {
    throw Error(ErrorCode::kInsufficientSamples,
                std::to_string(xs.size()) + " usable vertices in the decay window");
  }
  const LinearFit fit = least_squares_line(xs, ys);
  return {-fit.slope, fit.intercept, static_cast<int>(xs.size())};
}

StructureCheck inclusion_and_connectivity(const IndicatorSet& set, const PeakData& peak,
                                          double delta, const Mesh& mesh) {
  if (set.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty set");
  StructureCheck out;
  const std::vector<bool> member = set.mask(mesh.num_cells());

  const auto adjacency = cell_neighbors(mesh);
  std::vector<bool> seen(mesh.num_cells(), false);
  const int first = set.cells.empty() ? set.partial_cell : set.cells.front();
  std::vector<int> stack{first};
  seen[first] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    ++reached;
    for (int nb : adjacency[c]) {
      if (member[nb] && !seen[nb]) {
        seen[nb] = true;
        stack.push_back(nb);
      }
    }
  }
  out.connected = static_cast<int>(reached) == set.size();

  out.r_minus = std::sqrt(2.0 * delta * 0.8 / std::numbers::pi);
  out.r_plus = std::sqrt(2.0 * delta * 1.2 / std::numbers::pi);
  out.annulus_ok = true;
  for (int c = 0; c < mesh.num_cells() && out.annulus_ok; ++c) {
    const double d = (mesh.centroid(c) - peak.P_delta.position).norm();
    if (member[c] ? d > out.r_plus : d < out.r_minus) out.annulus_ok = false;
  }
  return out;
}

BlowupComparison blowup_profile(const std::vector<double>& u, const PeakData& peak, double delta,
                                const LimitSolution& limit, const Mesh& mesh) {
  constexpr int kRadii = 30;
  constexpr int kAngles = 48;
  const double ell = blowup_length(delta);
  const double reach = 3.0 * limit.radius_r2;
  const PointLocator locator(mesh);

  // Value at the origin of the window, just inside Ω; the argmax value when
  // P itself is off the polygonal mesh.
  const Point origin = peak.P_delta.position;
  const double u0 = locator.interpolate(u, origin + 1e-9 * ell * peak.P_delta.inward_normal)
                        .value_or(peak.max_value);

  BlowupComparison out;
  for (int i = 1; i <= kRadii; ++i) {
    const double r = reach * i / kRadii;
    const double w = limit_profile(limit, r).value;
    for (int j = 0; j < kAngles; ++j) {
      const double psi = -0.5 * std::numbers::pi + (j + 0.5) * std::numbers::pi / kAngles;
      const auto value = locator.interpolate(u, origin + ell * r * ray_direction(peak.P_delta, psi));
      if (!value) {
        ++out.outside;
        continue;
      }
      ++out.samples;
      out.sup_error = std::max(out.sup_error, std::abs(*value / u0 - w));
    }
  }
  out.partial_window = out.outside > 0.1 * kRadii * kAngles;
  return out;
}

LinearFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::kInsufficientData, "need two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::kInsufficientData, "abscissae coincide");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - fit.intercept - fit.slope * x[i];
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

MeshSizing sweep_mesh_sizing(const SweepConfig& config, double delta) {
  if (config.uniform_h > 0.0) return MeshSizing::uniform(config.uniform_h);
  const double ell = blowup_length(delta);
  MeshSizing sizing;
  sizing.boundary_h = ell / config.cells_per_length;
  sizing.interior_h = std::max(config.interior_h, sizing.boundary_h);
  sizing.layer_depth = config.layer_factor * ell;
  sizing.growth = config.growth;
  return sizing;
}

SweepRow analyse_optimum(const OptimizationRecord& record, const DomainSpec& spec,
                         const Mesh& mesh, double delta,
                         const LimitSolution& limit) {
  const double ell = blowup_length(delta);
  const std::vector<double>& u = record.final.eigenfunction;
  SweepRow row;
  row.delta = delta;
  row.Lambda = record.final.lambda;
  row.scaled_Lambda = std::pow(delta, 2.0 / kDim) * row.Lambda;
  row.converged = record.converged;
  row.measure = record.final_set.measure;
  row.mesh_vertices = mesh.num_vertices();
  row.mesh_cells = mesh.num_cells();
  row.set_cells = record.final_set.size();
  row.boundary_h = mesh.resolution;

  row.peak = extract_peak(u, mesh, spec, delta);
  row.P_theta = row.peak.P_delta.theta;
  row.H_at_P = row.peak.P_delta.curvature;

  const BoundaryPoint Q = boundary_center(record.final_set, mesh, spec);
  row.Q_theta = Q.theta;
  row.qp_scaled = (Q.position - row.peak.P_delta.position).norm() / ell;
  try {
    // The exact measure-δ superlevel set of the P1 eigenfunction resolves the
    // free boundary below the cell size.
    row.near_sphere = polar_parametrization(u, measure_level(u, mesh, delta), Q, delta, mesh);
    row.rho_l2 = row.near_sphere.l2_norm;
    row.rho_sup = row.near_sphere.sup_norm;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotStarShaped) throw;
    row.star_shaped = false;
    row.near_sphere.Q_delta = Q;
    row.rho_l2 = kNaN;
    row.rho_sup = kNaN;
  }
  try {
    const DecayFit decay = decay_fit(u, row.peak, delta, mesh);
    row.decay_rate = decay.rate;
    row.decay_samples = decay.samples;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInsufficientSamples) throw;
    row.decay_rate = kNaN;
  }
  const StructureCheck structure =
      inclusion_and_connectivity(record.final_set, row.peak, delta, mesh);
  row.connected = structure.connected;
  row.annulus_ok = structure.annulus_ok;
  row.blowup = blowup_profile(u, row.peak, delta, limit, mesh);
  return row;
}

namespace {

SweepRow sweep_row(const DomainSpec& spec, const SweepConfig& config, double delta,
                   const LimitSolution& limit) {
  const Mesh mesh = build_mesh(spec, sweep_mesh_sizing(config, delta));
  MultiStartResult ms =
      multi_start(mesh, spec, config.beta, delta, config.n_starts, config.seed, config.optimizer);
  SweepRow row = analyse_optimum(ms.best(), spec, mesh, delta, limit);
  row.winning_start = ms.starts[ms.best_index].label;
  for (const StartOutcome& start : ms.starts) {
    if (!start.ok) continue;
    const auto& trace = start.record.lambda_trace;
    for (std::size_t k = 1; k < trace.size(); ++k) {
      if (trace[k] > trace[k - 1] * (1.0 + 1e-12)) row.traces_monotone = false;
    }
    if (start.record.converged) {
      const IndicatorSet again =
          rearrange(start.record.final.eigenfunction, mesh, delta, config.beta,
                    config.optimizer.rule, config.optimizer.solver.mass_lumping);
      if (!(again == start.record.final_set)) row.fixed_points_ok = false;
    }
  }
  for (StartOutcome& start : ms.starts) {
    // Eigenfunctions are not reported; keep the rows light.
    start.record.final.eigenfunction.clear();
    start.record.final.eigenfunction.shrink_to_fit();
  }
  row.starts = std::move(ms.starts);
  return row;
}

}  // namespace

SweepReport sweep_and_fit(const DomainSpec& spec, const SweepConfig& config) {
  const auto& grid = config.delta_grid;
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty delta grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !(grid[i] < config.beta * spec.area() / (config.beta + 1.0))) {
      throw Error(ErrorCode::kNegativeAverageViolated,
                  "delta " + std::to_string(grid[i]) + " is not admissible");
    }
    if (i > 0 && !(grid[i] < grid[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "delta grid must be strictly decreasing");
    }
  }

  SweepReport report;
  report.seed = config.seed;
  const LimitSolution limit = solve_limit_eigenvalue({config.beta, kDim});
  report.I = limit.eigenvalue_I;
  report.Gamma = limit.Gamma;
  report.H_hat = max_curvature(spec).curvature;
  report.predicted_slope = -report.I * report.Gamma * report.H_hat;

  report.rows.resize(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        report.rows[i] = sweep_row(spec, config, grid[i], limit);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(grid.size()));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> xs;
  std::vector<double> ys;
  for (const SweepRow& row : report.rows) {
    if (!row.converged) continue;
    xs.push_back(blowup_length(row.delta));
    ys.push_back(row.scaled_Lambda);
  }
  if (xs.size() < 3) {
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(xs.size()) + " converged rows; the fit needs 3");
  }
  const LinearFit fit = least_squares_line(xs, ys);
  report.fitted_I = fit.intercept;
  report.fitted_slope = fit.slope;
  report.fit_residual = fit.residual;
  return report;
}

}  // namespace habitat
