#pragma once

#include <string>
#include <vector>

#include "nrtrack/controller.hpp"
#include "nrtrack/plants.hpp"
#include "nrtrack/reference.hpp"

namespace nrtrack {

enum class ScenarioKind { Vehicle, Platoon };
enum class PlantKind { Bicycle, Integrator };
enum class CurveKind { LaneChange, ClosedSpline };
enum class StartMode { Origin, OnCurve };

/// Parsed scenario file. The format is plain text, one `key = value` pair per
/// line, `#` comments; units are spelled out in the key names. Unknown or
/// duplicate keys are rejected.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::Vehicle;

  PlantKind plant = PlantKind::Bicycle;
  BicycleParams bicycle;
  double v_min_mps = 0.1;
  JacobianMode jacobians = JacobianMode::Analytic;
  int integrator_dim = 2;

  CurveKind curve = CurveKind::LaneChange;
  double extent_x_m = 60.0;
  double extent_y_m = 40.0;
  int points_per_arc = 6;

  std::vector<double> speeds_mps; // vehicle reference speeds
  double curve_speed_mps = 0.0;   // platoon curve parameter speed
  bool piecewise_profile = false;
  SpeedProfile profile;

  double alpha = 30.0;
  double horizon_s = 0.5;
  double predictor_dt_s = 1e-3;
  StepMethod predictor_method = StepMethod::ForwardEuler;
  double sim_dt_s = 0.01;
  double duration_s = 25.0;
  double transient_cutoff_s = 5.0;
  StartMode start = StartMode::Origin;
  bool start_set = false; // when false, defaults per curve kind
  SingularPolicy singular_policy = SingularPolicy::Fail;
  std::string output_dir;

  int n_robots = 4;
  double spacing_m = 0.25;
  double point_offset_m = 0.08;
  double gamma = 0.0455;

  StartMode effective_start() const;
  void validate() const; // throws ConfigError naming the offending key
};

/// Parses scenario text; `source` names the origin for error messages.
Scenario parse_scenario(const std::string& text, const std::string& source);

/// Loads and validates a scenario file.
Scenario load_scenario(const std::string& path);

} // namespace nrtrack
