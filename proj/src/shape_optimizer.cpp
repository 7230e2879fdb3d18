#include "habitat/shape_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "habitat/error.hpp"

namespace habitat {

std::vector<bool> IndicatorSet::mask(int num_cells) const {
  std::vector<bool> m(num_cells, false);
  for (int c : cells) m[c] = true;
  if (partial_cell >= 0) m[partial_cell] = true;
  return m;
}

double admissible_measure_bound(const Mesh& mesh, double beta) {
  return beta * mesh.total_measure() / (beta + 1.0);
}

IndicatorSet make_indicator_set(const Mesh& mesh, std::vector<int> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  IndicatorSet s;
  for (int c : cells) s.measure += mesh.cell_measure[c];
  s.cells = std::move(cells);
  return s;
}

WeightField weight_of(const Mesh& mesh, const IndicatorSet& set, double beta) {
  std::vector<bool> full(mesh.num_cells(), false);
  for (int c : set.cells) full[c] = true;
  WeightField w = WeightField::from_indicator(mesh, std::move(full), beta);
  if (set.partial_cell >= 0) {
    const double f = set.partial_fraction;
    const double value = f - beta * (1.0 - f);
    w.total_integral += (value - w.cell_values[set.partial_cell]) *
                        mesh.cell_measure[set.partial_cell];
    w.cell_values[set.partial_cell] = value;
  }
  return w;
}

double symmetric_difference_measure(const Mesh& mesh, const IndicatorSet& a,
                                    const IndicatorSet& b) {
  std::vector<int> diff;
  std::set_symmetric_difference(a.cells.begin(), a.cells.end(), b.cells.begin(),
                                b.cells.end(), std::back_inserter(diff));
  double m = 0.0;
  for (int c : diff) m += mesh.cell_measure[c];
  return m;
}

namespace {

// Cell indices by score descending, ties by index, after validating δ and the
// score range.
std::vector<int> ranked_cells(const std::vector<double>& cell_values, const Mesh& mesh,
                              double delta, double beta) {
  if (static_cast<int>(cell_values.size()) != mesh.num_cells()) {
    throw Error(ErrorCode::kInvalidArgument, "score size does not match mesh cells");
  }
  if (!(delta > 0.0) || !(delta < admissible_measure_bound(mesh, beta))) {
    std::ostringstream msg;
    msg << "measure " << delta << " outside (0, " << admissible_measure_bound(mesh, beta) << ")";
    throw Error(ErrorCode::kInadmissibleMeasure, msg.str());
  }
  const auto [lo_it, hi_it] = std::minmax_element(cell_values.begin(), cell_values.end());
  if (*hi_it - *lo_it <= 1e-14 * std::max(std::abs(*hi_it), std::abs(*lo_it))) {
    throw Error(ErrorCode::kNotApplicable, "superlevel sets of a constant field are trivial");
  }
  std::vector<int> order(cell_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return cell_values[a] > cell_values[b]; });
  return order;
}

}  // namespace

IndicatorSet quantile_superlevel_cells(const std::vector<double>& cell_values,
                                       const Mesh& mesh, double delta, double beta) {
  const std::vector<int> order = ranked_cells(cell_values, mesh, delta, beta);
  double cumulative = 0.0;
  std::size_t count = 0;
  while (count < order.size()) {
    const double with = cumulative + mesh.cell_measure[order[count]];
    if (with >= delta) {
      // Closest-measure rule; an exact tie keeps the cell (measure >= δ).
      const bool keep =
          count == 0 || std::abs(with - delta) <= std::abs(cumulative - delta) + 1e-12 * delta;
      if (keep) ++count;
      break;
    }
    cumulative = with;
    ++count;
  }
  IndicatorSet s = make_indicator_set(
      mesh, std::vector<int>(order.begin(), order.begin() + static_cast<long>(count)));
  s.threshold_level = cell_values[order[count - 1]];
  return s;
}

IndicatorSet exact_superlevel_cells(const std::vector<double>& cell_values, const Mesh& mesh,
                                    double delta, double beta) {
  const std::vector<int> order = ranked_cells(cell_values, mesh, delta, beta);
  double cumulative = 0.0;
  std::size_t count = 0;
  while (count < order.size() && cumulative + mesh.cell_measure[order[count]] <= delta) {
    cumulative += mesh.cell_measure[order[count]];
    ++count;
  }
  IndicatorSet s = make_indicator_set(
      mesh, std::vector<int>(order.begin(), order.begin() + static_cast<long>(count)));
  const double remainder = delta - s.measure;
  if (count < order.size() && remainder > 1e-14 * delta) {
    s.partial_cell = order[count];
    s.partial_fraction = remainder / mesh.cell_measure[s.partial_cell];
    s.measure += s.partial_fraction * mesh.cell_measure[s.partial_cell];
    s.threshold_level = cell_values[s.partial_cell];
  } else {
    s.threshold_level = cell_values[order[count - 1]];
  }
  return s;
}

IndicatorSet quantile_superlevel(const std::vector<double>& u, const Mesh& mesh,
                                 double delta, double beta) {
  if (static_cast<int>(u.size()) != mesh.num_vertices()) {
    throw Error(ErrorCode::kInvalidArgument, "field size does not match mesh vertices");
  }
  std::vector<double> mean(mesh.triangles.size());
  for (std::size_t c = 0; c < mesh.triangles.size(); ++c) {
    const auto& t = mesh.triangles[c];
    mean[c] = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
  }
  return quantile_superlevel_cells(mean, mesh, delta, beta);
}

IndicatorSet rearrange(const std::vector<double>& u, const Mesh& mesh, double delta,
                       double beta, Rearrangement rule, bool mass_lumping) {
  if (rule == Rearrangement::kClosestMeasure) return quantile_superlevel(u, mesh, delta, beta);
  if (static_cast<int>(u.size()) != mesh.num_vertices()) {
    throw Error(ErrorCode::kInvalidArgument, "field size does not match mesh vertices");
  }
  // ∫_c u² / |c| under the mass matrix in use.
  std::vector<double> density(mesh.triangles.size());
  for (std::size_t c = 0; c < mesh.triangles.size(); ++c) {
    const auto& t = mesh.triangles[c];
    const double a = u[t[0]];
    const double b = u[t[1]];
    const double d = u[t[2]];
    const double squares = a * a + b * b + d * d;
    density[c] = mass_lumping ? squares / 3.0 : (squares + (a + b + d) * (a + b + d)) / 12.0;
  }
  return exact_superlevel_cells(density, mesh, delta, beta);
}

IndicatorSet boundary_cap(const Mesh& mesh, const Point& point, double delta, double beta,
                          Rearrangement rule) {
  std::vector<double> score(mesh.triangles.size());
  for (int c = 0; c < mesh.num_cells(); ++c) score[c] = -(mesh.centroid(c) - point).norm();
  return rule == Rearrangement::kExactMeasure ? exact_superlevel_cells(score, mesh, delta, beta)
                                              : quantile_superlevel_cells(score, mesh, delta, beta);
}

OptimizationRecord optimize(const Mesh& mesh, double beta, double delta,
                            const IndicatorSet& init, const OptimizerConfig& config) {
  const double bound = admissible_measure_bound(mesh, beta);
  if (init.size() == 0 || !(init.measure < bound)) {
    throw Error(ErrorCode::kInadmissibleMeasure, "initial set is empty or inadmissible");
  }
  OptimizationRecord rec;
  IndicatorSet current = init;
  EigenResult result =
      principal_positive_eigenvalue(mesh, weight_of(mesh, current, beta), config.solver);
  rec.lambda_trace.push_back(result.lambda);
  // Descent is guaranteed only between sets of equal measure.
  bool comparable = config.rule == Rearrangement::kExactMeasure &&
                    std::abs(init.measure - delta) <= 1e-12 * delta;

  std::set<std::pair<std::vector<int>, int>> visited{{current.cells, current.partial_cell}};
  for (int k = 1; k <= config.max_iters; ++k) {
    IndicatorSet next = rearrange(result.eigenfunction, mesh, delta, beta, config.rule,
                                  config.solver.mass_lumping);
    if (next == current) {
      current = std::move(next);
      rec.converged = true;
      break;
    }
    if (!visited.insert({next.cells, next.partial_cell}).second) {
      rec.cycled = true;
      break;
    }
    const WarmStart warm{result.lambda, result.eigenfunction};
    EigenResult candidate = principal_positive_eigenvalue(mesh, weight_of(mesh, next, beta),
                                                          config.solver, &warm);
    rec.iterations = k;
    if (comparable && candidate.lambda > result.lambda * (1.0 + 1e-10)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "rearrangement step " << k << " raised lambda from " << result.lambda
          << " to " << candidate.lambda;
      throw Error(ErrorCode::kMonotonicityViolation, msg.str());
    }
    comparable = config.rule == Rearrangement::kExactMeasure;
    rec.lambda_trace.push_back(candidate.lambda);
    result = std::move(candidate);
    current = std::move(next);
  }
  rec.final = std::move(result);
  rec.measure_error = current.measure - delta;
  rec.final_set = std::move(current);
  return rec;
}

MultiStartResult multi_start(const Mesh& mesh, const DomainSpec& spec, double beta,
                             double delta, int n_starts, std::uint64_t seed,
                             const OptimizerConfig& config) {
  if (n_starts < 1) throw Error(ErrorCode::kInvalidArgument, "n_starts must be >= 1");
  const BoundaryPoint top = max_curvature(spec);

  struct Start {
    std::string label;
    IndicatorSet set;
  };
  std::vector<Start> starts;
  starts.push_back(
      {"cap:max_curvature", boundary_cap(mesh, top.position, delta, beta, config.rule)});
  for (int j = 0; j < n_starts - 2; ++j) {
    const double theta = top.theta + 2.0 * std::numbers::pi * (j + 1) / (n_starts - 1);
    const BoundaryPoint bp = curvature_at(spec, theta);
    std::ostringstream label;
    label << "cap:theta=" << bp.theta;
    starts.push_back({label.str(), boundary_cap(mesh, bp.position, delta, beta, config.rule)});
  }
  if (n_starts >= 2) {
    // Ball around a seeded uniform point of Ω. A scattered random cell set is
    // not resolved by P1 elements (no positive eigenvalue exists on the mesh).
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return std::ldexp(static_cast<double>(rng() >> 11), -53); };
    const double r_max = spec.max_radius();
    Point p;
    do {
      p = spec.center() + r_max * Point(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0);
    } while (!spec.contains(p));
    std::ostringstream label;
    label.precision(17);
    label << "random:(" << p.x() << "," << p.y() << ")";
    starts.push_back({label.str(), boundary_cap(mesh, p, delta, beta, config.rule)});
  }

  MultiStartResult out;
  std::exception_ptr first_error;
  for (Start& s : starts) {
    StartOutcome outcome;
    outcome.label = s.label;
    try {
      outcome.record = optimize(mesh, beta, delta, s.set, config);
      outcome.ok = true;
    } catch (const Error& e) {
      outcome.error = std::string(error_code_name(e.code())) + ": " + e.what();
      if (!first_error) first_error = std::current_exception();
    }
    out.starts.push_back(std::move(outcome));
  }
  for (std::size_t i = 0; i < out.starts.size(); ++i) {
    if (!out.starts[i].ok) continue;
    if (out.best_index < 0 ||
        out.starts[i].record.final.lambda < out.best().final.lambda) {
      out.best_index = static_cast<int>(i);
    }
  }
  if (out.best_index < 0) std::rethrow_exception(first_error);
  return out;
}

}  // namespace habitat
