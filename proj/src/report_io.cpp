#include "habitat/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "habitat/error.hpp"

namespace habitat {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void JsonWriter::newline() {
  out_ += '\n';
  out_.append(2 * counts_.size(), ' ');
}

void JsonWriter::before_value() {
  if (after_key_) {
    after_key_ = false;
    return;
  }
  if (counts_.empty()) return;
  if (counts_.back() > 0) out_ += ',';
  ++counts_.back();
  newline();
}

JsonWriter& JsonWriter::begin_object() {
  before_value();
  out_ += '{';
  counts_.push_back(0);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  const int n = counts_.back();
  counts_.pop_back();
  if (n > 0) newline();
  out_ += '}';
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_value();
  out_ += '[';
  counts_.push_back(0);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  const int n = counts_.back();
  counts_.pop_back();
  if (n > 0) newline();
  out_ += ']';
  return *this;
}

JsonWriter& JsonWriter::key(const std::string& name) {
  before_value();
  append_string(name);
  out_ += ": ";
  after_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  before_value();
  out_ += std::isfinite(v) ? format_double(v) : "null";
  return *this;
}

JsonWriter& JsonWriter::value(int v) { return value(static_cast<long long>(v)); }

JsonWriter& JsonWriter::value(long long v) {
  before_value();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(unsigned long long v) {
  before_value();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_value();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
  before_value();
  append_string(v);
  return *this;
}

void JsonWriter::append_string(const std::string& v) {
  out_ += '"';
  for (const char ch : v) {
    switch (ch) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out_ += buf;
        } else {
          out_ += ch;
        }
    }
  }
  out_ += '"';
}

JsonWriter& JsonWriter::null() {
  before_value();
  out_ += "null";
  return *this;
}

JsonWriter& JsonWriter::array(const std::vector<double>& values) {
  before_value();
  out_ += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out_ += ", ";
    out_ += std::isfinite(values[i]) ? format_double(values[i]) : "null";
  }
  out_ += ']';
  return *this;
}

JsonWriter& JsonWriter::array(const std::vector<int>& values) {
  before_value();
  out_ += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out_ += ", ";
    out_ += std::to_string(values[i]);
  }
  out_ += ']';
  return *this;
}

std::string limit_json(const LimitSolution& sol) {
  JsonWriter json;
  json.begin_object()
      .field("beta", sol.params.beta)
      .field("dim", sol.params.dim)
      .field("I", sol.eigenvalue_I)
      .field("r2", sol.radius_r2)
      .field("interior_amplitude", sol.interior_amplitude)
      .field("exterior_amplitude", sol.exterior_amplitude)
      .field("interior_wavenumber", sol.interior_wavenumber())
      .field("exterior_rate", sol.exterior_rate())
      .field("interior_first_zero", sol.interior_first_zero)
      .field("gamma", sol.gamma)
      .field("gamma1", sol.gamma1)
      .field("Gamma", sol.Gamma)
      .field("grad_sq_halfspace", sol.grad_sq_halfspace)
      .field("mw2_halfspace", sol.mw2_halfspace)
      .field("identity_residual", identity_residual(sol))
      .field("quadrature_error", sol.quadrature_error)
      .end_object();
  return json.str();
}

namespace {

void write_point(JsonWriter& json, const std::string& name, const BoundaryPoint& p) {
  json.key(name)
      .begin_object()
      .field("theta", p.theta)
      .key("position")
      .array(std::vector<double>{p.position.x(), p.position.y()})
      .field("curvature", p.curvature)
      .end_object();
}

}  // namespace

void write_peak(JsonWriter& json, const PeakData& peak) {
  json.begin_object();
  write_point(json, "P_delta", peak.P_delta);
  json.field("argmax_vertex", peak.argmax_vertex)
      .field("max_value", peak.max_value)
      .field("interior_offset", peak.interior_offset)
      .field("alpha_delta", peak.alpha_delta)
      .field("secondary_peak", peak.secondary_peak)
      .end_object();
}

void write_near_sphere(JsonWriter& json, const NearSphereParam& param) {
  std::vector<double> angles;
  std::vector<double> rho;
  for (const RadialSample& s : param.samples) {
    angles.push_back(s.angle);
    rho.push_back(s.rho);
  }
  json.begin_object();
  write_point(json, "Q_delta", param.Q_delta);
  json.field("l2_norm", param.l2_norm)
      .field("sup_norm", param.sup_norm)
      .field("grad_lipschitz_estimate", param.grad_lipschitz_estimate)
      .field("rays", param.rays)
      .field("multi_crossing_rays", param.multi_crossing_rays)
      .field("exiting_rays", param.exiting_rays)
      .key("angles")
      .array(angles)
      .key("rho")
      .array(rho)
      .end_object();
}

void write_record(JsonWriter& json, const OptimizationRecord& record, bool with_eigenfunction) {
  json.begin_object()
      .field("lambda", record.final.lambda)
      .field("converged", record.converged)
      .field("cycled", record.cycled)
      .field("iterations", record.iterations)
      .key("lambda_trace")
      .array(record.lambda_trace)
      .field("measure", record.final_set.measure)
      .field("measure_error", record.measure_error)
      .field("rayleigh_gap", record.final.rayleigh_gap)
      .field("relative_residual", record.final.relative_residual)
      .field("weighted_norm", record.final.weighted_norm);
  if (with_eigenfunction) {
    json.key("set")
        .begin_object()
        .key("cells")
        .array(record.final_set.cells)
        .field("partial_cell", record.final_set.partial_cell)
        .field("partial_fraction", record.final_set.partial_fraction)
        .field("threshold_level", record.final_set.threshold_level)
        .end_object()
        .key("eigenfunction")
        .array(record.final.eigenfunction);
  }
  json.end_object();
}

std::string sweep_csv(const SweepReport& report) {
  std::string out =
      "delta,Lambda,scaled_Lambda,P_delta,Q_delta,H_at_P,rho_l2,rho_sup,decay_rate,connected,"
      "annulus_ok\n";
  for (const SweepRow& r : report.rows) {
    for (double v : {r.delta, r.Lambda, r.scaled_Lambda, r.P_theta, r.Q_theta, r.H_at_P,
                     r.rho_l2, r.rho_sup, r.decay_rate}) {
      out += format_double(v);
      out += ',';
    }
    out += r.connected ? "true," : "false,";
    out += r.annulus_ok ? "true\n" : "false\n";
  }
  return out;
}

std::string sweep_summary_json(const SweepReport& report) {
  JsonWriter json;
  json.begin_object()
      .field("fitted_I", report.fitted_I)
      .field("fitted_slope", report.fitted_slope)
      .field("predicted_slope", report.predicted_slope)
      .field("fit_residual", report.fit_residual)
      .field("I", report.I)
      .field("Gamma", report.Gamma)
      .field("H_hat", report.H_hat)
      .field("seed", static_cast<unsigned long long>(report.seed))
      .end_object();
  return json.str();
}

std::string sweep_rows_json(const SweepReport& report) {
  JsonWriter json;
  json.begin_array();
  for (const SweepRow& r : report.rows) {
    json.begin_object()
        .field("delta", r.delta)
        .field("converged", r.converged)
        .field("winning_start", r.winning_start)
        .field("measure", r.measure)
        .field("mesh_vertices", r.mesh_vertices)
        .field("mesh_cells", r.mesh_cells)
        .field("set_cells", r.set_cells)
        .field("boundary_h", r.boundary_h)
        .field("qp_scaled", r.qp_scaled)
        .field("star_shaped", r.star_shaped)
        .field("decay_samples", r.decay_samples)
        .field("traces_monotone", r.traces_monotone)
        .field("fixed_points_ok", r.fixed_points_ok)
        .key("blowup")
        .begin_object()
        .field("sup_error", r.blowup.sup_error)
        .field("samples", r.blowup.samples)
        .field("outside", r.blowup.outside)
        .field("partial_window", r.blowup.partial_window)
        .end_object()
        .key("peak");
    write_peak(json, r.peak);
    json.key("near_sphere");
    write_near_sphere(json, r.near_sphere);
    json.key("starts").begin_array();
    for (const StartOutcome& s : r.starts) {
      json.begin_object().field("label", s.label).field("ok", s.ok);
      if (s.ok) {
        json.key("record");
        write_record(json, s.record, false);
      } else {
        json.field("error", s.error);
      }
      json.end_object();
    }
    json.end_array().end_object();
  }
  json.end_array();
  return json.str();
}

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files,
                   bool overwrite) {
  namespace fs = std::filesystem;
  if (!overwrite) {
    for (const OutputFile& f : files) {
      if (fs::exists(dir / f.name)) {
        throw Error(ErrorCode::kOutputExists,
                    (dir / f.name).string() + " exists; pass --overwrite to replace it");
      }
    }
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  for (const OutputFile& f : files) {
    const fs::path target = dir / f.name;
    const fs::path tmp = dir / (f.name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
      if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
    fs::rename(tmp, target, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot rename to " + target.string());
  }
}

}  // namespace habitat
