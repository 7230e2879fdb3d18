#pragma once

// Deterministic text serialisation of results. Every double is written with
// 17 significant digits so files round-trip exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "habitat/asymptotics.hpp"
#include "habitat/limit_problem.hpp"

namespace habitat {

/// "%.17g"; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double value);

/// Minimal streaming JSON emitter with stable key order and two-space
/// indentation. Non-finite doubles are written as null.
class JsonWriter {
 public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(long long v);
  JsonWriter& value(unsigned long long v);
  JsonWriter& value(bool v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v) { return value(std::string(v)); }
  JsonWriter& null();

  template <class T>
  JsonWriter& field(const std::string& name, const T& v) {
    key(name);
    return value(v);
  }
  /// Single-line array of doubles.
  JsonWriter& array(const std::vector<double>& values);
  JsonWriter& array(const std::vector<int>& values);

  /// Document text with a trailing newline.
  std::string str() const { return out_ + "\n"; }

 private:
  void before_value();
  void newline();
  void append_string(const std::string& v);

  std::string out_;
  // Per open container: number of items written so far.
  std::vector<int> counts_;
  bool after_key_ = false;
};

std::string limit_json(const LimitSolution& sol);

void write_peak(JsonWriter& json, const PeakData& peak);
void write_near_sphere(JsonWriter& json, const NearSphereParam& param);
void write_record(JsonWriter& json, const OptimizationRecord& record, bool with_eigenfunction);

/// Header then one row per δ with the columns delta, Lambda, scaled_Lambda,
/// P_delta, Q_delta, H_at_P, rho_l2, rho_sup, decay_rate, connected,
/// annulus_ok. P and Q are written as boundary angles.
std::string sweep_csv(const SweepReport& report);
std::string sweep_summary_json(const SweepReport& report);
/// Per-row diagnostics beyond the CSV columns.
std::string sweep_rows_json(const SweepReport& report);

struct OutputFile {
  std::string name;
  std::string content;
};

/// Writes all files into `dir` (created if missing). Unless `overwrite`,
/// refuses with OutputExists before writing anything when any target exists.
/// Each file goes through a temporary and a rename.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files,
                   bool overwrite);

}  // namespace habitat
