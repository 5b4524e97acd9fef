#include "nrtrack/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nrtrack/errors.hpp"
#include "nrtrack/platoon.hpp"

namespace nrtrack {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  }
  if (pos != value.size())
    throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::string copy = value;
  std::replace(copy.begin(), copy.end(), ',', ' ');
  std::istringstream ss(copy);
  std::vector<double> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_double(key, tok));
  if (out.empty())
    throw ConfigError("key '" + key + "': expected a list of numbers");
  return out;
}

} // namespace

StartMode Scenario::effective_start() const {
  if (start_set) return start;
  return curve == CurveKind::LaneChange ? StartMode::Origin : StartMode::OnCurve;
}

void Scenario::validate() const {
  if (name.empty()) throw ConfigError("missing required key 'name'");
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0))
      throw ConfigError(std::string("key '") + key + "' must be positive, got " +
                        std::to_string(v));
  };
  positive(alpha, "alpha");
  positive(horizon_s, "horizon_s");
  positive(sim_dt_s, "sim_dt_s");
  positive(duration_s, "duration_s");
  if (transient_cutoff_s < 0.0)
    throw ConfigError("key 'transient_cutoff_s' must be >= 0");
  if (curve == CurveKind::ClosedSpline) {
    if (!(extent_y_m > 0.0) || extent_x_m < extent_y_m)
      throw ConfigError("keys 'extent_x_m'/'extent_y_m' need extent_x_m >= extent_y_m > 0");
  }
  if (kind == ScenarioKind::Vehicle) {
    if (speeds_mps.empty())
      throw ConfigError("vehicle scenario needs 'speeds_mps' or 'speeds_kmh'");
    for (double v : speeds_mps) positive(v, "speeds_mps");
    positive(predictor_dt_s, "predictor_dt_s");
    if (predictor_dt_s > horizon_s * (1.0 + 1e-12))
      throw ConfigError("key 'predictor_dt_s' must not exceed horizon_s");
    if (plant == PlantKind::Bicycle) {
      bicycle.validate();
      positive(v_min_mps, "v_min_mps");
    } else if (integrator_dim != 2) {
      throw ConfigError("key 'integrator_dim' must be 2 for planar tracking");
    }
  } else {
    if (curve != CurveKind::ClosedSpline)
      throw ConfigError("platoon scenario needs 'curve = closed_spline'");
    positive(curve_speed_mps, "curve_speed_mps");
    PlatoonConfig pc;
    pc.n_robots = n_robots;
    pc.spacing_d = spacing_m;
    pc.point_offset_l = point_offset_m;
    pc.gamma = gamma;
    pc.alpha = alpha;
    pc.horizon = horizon_s;
    pc.dt = sim_dt_s;
    pc.validate();
    if (piecewise_profile &&
        (profile.times_s.size() < 2 ||
         profile.times_s.size() != profile.speeds_mps.size()))
      throw ConfigError("keys 'profile_times_s'/'profile_speeds_mps' must be lists of equal length >= 2");
  }
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  Scenario sc;
  std::set<std::string> seen;
  bool speeds_in_kmh = false;

  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const auto ctx = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos)
      throw ConfigError(ctx + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(ctx + ": empty key or value");
    if (!seen.insert(key).second)
      throw ConfigError(ctx + ": duplicate key '" + key + "'");

    auto is = [&](const char* k) { return key == k; };
    try {
      if (is("name")) sc.name = value;
      else if (is("kind")) {
        if (value == "vehicle") sc.kind = ScenarioKind::Vehicle;
        else if (value == "platoon") sc.kind = ScenarioKind::Platoon;
        else throw ConfigError("key 'kind': expected vehicle|platoon, got '" + value + "'");
      } else if (is("plant")) {
        if (value == "bicycle") sc.plant = PlantKind::Bicycle;
        else if (value == "integrator") sc.plant = PlantKind::Integrator;
        else throw ConfigError("key 'plant': expected bicycle|integrator, got '" + value + "'");
      } else if (is("curve")) {
        if (value == "lane_change") sc.curve = CurveKind::LaneChange;
        else if (value == "closed_spline") sc.curve = CurveKind::ClosedSpline;
        else throw ConfigError("key 'curve': expected lane_change|closed_spline, got '" + value + "'");
      } else if (is("speeds_mps")) {
        sc.speeds_mps = parse_list(key, value);
      } else if (is("speeds_kmh")) {
        sc.speeds_mps = parse_list(key, value);
        speeds_in_kmh = true;
      } else if (is("curve_speed_mps")) sc.curve_speed_mps = parse_double(key, value);
      else if (is("speed_profile")) {
        if (value == "constant") sc.piecewise_profile = false;
        else if (value == "piecewise") sc.piecewise_profile = true;
        else throw ConfigError("key 'speed_profile': expected constant|piecewise, got '" + value + "'");
      } else if (is("profile_times_s")) sc.profile.times_s = parse_list(key, value);
      else if (is("profile_speeds_mps")) sc.profile.speeds_mps = parse_list(key, value);
      else if (is("alpha")) sc.alpha = parse_double(key, value);
      else if (is("horizon_s")) sc.horizon_s = parse_double(key, value);
      else if (is("predictor_dt_s")) sc.predictor_dt_s = parse_double(key, value);
      else if (is("predictor_method")) {
        if (value == "euler") sc.predictor_method = StepMethod::ForwardEuler;
        else if (value == "rk4") sc.predictor_method = StepMethod::RK4;
        else throw ConfigError("key 'predictor_method': expected euler|rk4, got '" + value + "'");
      } else if (is("sim_dt_s")) sc.sim_dt_s = parse_double(key, value);
      else if (is("duration_s")) sc.duration_s = parse_double(key, value);
      else if (is("transient_cutoff_s")) sc.transient_cutoff_s = parse_double(key, value);
      else if (is("start")) {
        if (value == "origin") sc.start = StartMode::Origin;
        else if (value == "on_curve") sc.start = StartMode::OnCurve;
        else throw ConfigError("key 'start': expected origin|on_curve, got '" + value + "'");
        sc.start_set = true;
      } else if (is("singular_policy")) {
        if (value == "fail") sc.singular_policy = SingularPolicy::Fail;
        else if (value == "damped") sc.singular_policy = SingularPolicy::Damped;
        else throw ConfigError("key 'singular_policy': expected fail|damped, got '" + value + "'");
      } else if (is("output_dir")) sc.output_dir = value;
      else if (is("mass_kg")) sc.bicycle.mass_kg = parse_double(key, value);
      else if (is("yaw_inertia_kgm2")) sc.bicycle.yaw_inertia_kgm2 = parse_double(key, value);
      else if (is("lf_m")) sc.bicycle.lf_m = parse_double(key, value);
      else if (is("lr_m")) sc.bicycle.lr_m = parse_double(key, value);
      else if (is("caf_n_per_rad")) sc.bicycle.caf_n_per_rad = parse_double(key, value);
      else if (is("car_n_per_rad")) sc.bicycle.car_n_per_rad = parse_double(key, value);
      else if (is("v_min_mps")) sc.v_min_mps = parse_double(key, value);
      else if (is("jacobians")) {
        if (value == "analytic") sc.jacobians = JacobianMode::Analytic;
        else if (value == "fd") sc.jacobians = JacobianMode::FiniteDifference;
        else throw ConfigError("key 'jacobians': expected analytic|fd, got '" + value + "'");
      } else if (is("integrator_dim")) sc.integrator_dim = parse_int(key, value);
      else if (is("extent_x_m")) sc.extent_x_m = parse_double(key, value);
      else if (is("extent_y_m")) sc.extent_y_m = parse_double(key, value);
      else if (is("points_per_arc")) sc.points_per_arc = parse_int(key, value);
      else if (is("n_robots")) sc.n_robots = parse_int(key, value);
      else if (is("spacing_m")) sc.spacing_m = parse_double(key, value);
      else if (is("point_offset_m")) sc.point_offset_m = parse_double(key, value);
      else if (is("gamma")) sc.gamma = parse_double(key, value);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(ctx + ": " + e.what());
    }
  }

  if (speeds_in_kmh && seen.count("speeds_mps"))
    throw ConfigError(source + ": give 'speeds_mps' or 'speeds_kmh', not both");
  if (speeds_in_kmh)
    for (double& v : sc.speeds_mps) v /= 3.6;
  if (sc.output_dir.empty()) sc.output_dir = "out/" + sc.name;
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  Scenario sc = parse_scenario(ss.str(), path);
  sc.validate();
  return sc;
}

} // namespace nrtrack
