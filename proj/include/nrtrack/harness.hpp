#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "nrtrack/platoon.hpp"
#include "nrtrack/scenario.hpp"

namespace nrtrack {

/// Output directory resolution: explicit override, then the
/// NRTRACK_OUTPUT_DIR environment variable, then the scenario's output_dir.
std::string resolve_output_dir(const Scenario& sc, const std::string& override_dir);

std::unique_ptr<PlantModel> make_plant(const Scenario& sc);
std::unique_ptr<ReferenceCurve> make_curve(const Scenario& sc, double speed_mps);
Vec initial_state(const Scenario& sc, const ReferenceCurve& curve, double speed_mps);

/// Lossless float formatting used in every emitted file (%.17g).
std::string format_g17(double v);

/// Trace CSV: columns exactly
///   t, <state names...>, <input names...>, control_error, tracking_error,
///   lateral_error, heading_error_deg, a_long
/// with a_long = first control component. Values are printed with 17
/// significant digits so files parse back bit-exactly.
std::string trace_csv_header(const PlantModel& plant);
void write_trace_csv(const std::string& path, const PlantModel& plant,
                     const SimTrace& trace);

/// Parsed numeric CSV: header names -> column values, plus the row count.
struct CsvTable {
  std::vector<std::string> columns;
  std::map<std::string, std::vector<double>> data;
  std::size_t rows = 0;
};
CsvTable read_csv(const std::string& path);

struct VehicleRunOutput {
  std::vector<RunResult> results;       // one per reference speed
  std::vector<std::string> csv_paths;
  std::string summary_path;
  std::string manifest_path;
  std::string summary_text;
};

/// Runs one closed loop per reference speed, writes per-speed trace CSVs, a
/// manifest, and a summary regenerated from the CSVs themselves (so `report`
/// reproduces it byte for byte).
VehicleRunOutput run_vehicle_scenario(const Scenario& sc,
                                      const std::string& out_override = "");

struct PlatoonRunOutput {
  PlatoonResult result;
  std::vector<std::string> robot_csv_paths;
  std::string spacing_csv_path;
  std::string summary_path;
  std::string manifest_path;
  std::string summary_text;
};

PlatoonRunOutput run_platoon_scenario(const Scenario& sc,
                                      const std::string& out_override = "");

struct SweepRunOutput {
  SweepResult sweep;
  std::string csv_path;
  std::string table_text; // printable classification table
};

/// Stability sweep over the grid at the scenario's first reference speed.
SweepRunOutput run_sweep_scenario(const Scenario& sc,
                                  const std::vector<double>& alphas,
                                  const std::vector<double>& horizons,
                                  const std::string& out_override = "");

/// Rebuilds `<scenario>_summary.txt` for every manifest found in `dir` from
/// the trace CSVs alone. Returns the summary paths written.
std::vector<std::string> regenerate_reports(const std::string& dir);

} // namespace nrtrack
