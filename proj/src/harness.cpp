#include "nrtrack/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

#include "nrtrack/controller.hpp"
#include "nrtrack/errors.hpp"

namespace fs = std::filesystem;

namespace nrtrack {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
const double kNan = std::numeric_limits<double>::quiet_NaN();

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "Completed";
    case RunStatus::Diverged: return "Diverged";
    case RunStatus::Aborted: return "Aborted";
  }
  return "Unknown";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(line.substr(start));
      break;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

/// Key/value lines of a manifest, order preserved; repeated keys allowed.
struct Manifest {
  std::vector<std::pair<std::string, std::string>> entries;

  std::string one(const std::string& key) const {
    std::string found;
    int n = 0;
    for (const auto& [k, v] : entries)
      if (k == key) { found = v; ++n; }
    if (n != 1)
      throw ConfigError("manifest needs exactly one '" + key + "' line, found " +
                        std::to_string(n));
    return found;
  }

  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
      if (k == key) out.push_back(v);
    return out;
  }
};

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open manifest: " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t pos = line.find(": ");
    if (pos == std::string::npos)
      throw ConfigError("malformed manifest line in " + path.string() + ": " +
                        line);
    m.entries.emplace_back(line.substr(0, pos), line.substr(pos + 2));
  }
  return m;
}

double parse_num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ConfigError("not a number: '" + s + "'");
  return v;
}

/// max |v[i]| over rows with t >= cutoff, skipping NaN; NaN when empty.
double abs_peak_from(const std::vector<double>& t, const std::vector<double>& v,
                     double cutoff) {
  double best = kNan;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cutoff || std::isnan(v[i])) continue;
    const double a = std::fabs(v[i]);
    if (std::isnan(best) || a > best) best = a;
  }
  return best;
}

double rms_from(const std::vector<double>& t, const std::vector<double>& v,
                double cutoff) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cutoff || std::isnan(v[i])) continue;
    sum += v[i] * v[i];
    ++n;
  }
  return n == 0 ? kNan : std::sqrt(sum / static_cast<double>(n));
}

double mean_from(const std::vector<double>& t, const std::vector<double>& v,
                 double cutoff) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cutoff || std::isnan(v[i])) continue;
    sum += v[i];
    ++n;
  }
  return n == 0 ? kNan : sum / static_cast<double>(n);
}

double min_from(const std::vector<double>& t, const std::vector<double>& v,
                double cutoff) {
  double best = kNan;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < cutoff || std::isnan(v[i])) continue;
    if (std::isnan(best) || v[i] < best) best = v[i];
  }
  return best;
}

const std::vector<double>& column(const CsvTable& table, const std::string& name,
                                  const std::string& path) {
  const auto it = table.data.find(name);
  if (it == table.data.end())
    throw ConfigError("column '" + name + "' missing in " + path);
  return it->second;
}

/// Summary regenerated purely from the manifest and the trace CSVs, so the
/// run and report paths emit identical bytes.
std::string vehicle_summary(const fs::path& dir, const Manifest& m) {
  const std::string name = m.one("scenario");
  const double cutoff = parse_num(m.one("transient_cutoff_s"));
  const auto speeds = m.all("speed_mps");
  const auto statuses = m.all("status");
  const auto traces = m.all("trace");
  if (speeds.size() != traces.size() || statuses.size() != traces.size())
    throw ConfigError("manifest for " + name +
                      " has mismatched speed/status/trace line counts");

  std::string out;
  out += "scenario: " + name + "\n";
  out += "kind: vehicle\n";
  out += "transient_cutoff_s: " + format_g17(cutoff) + "\n";
  // peak_* columns cover the post-cutoff window, full_* the whole run;
  // both are listed so the cutoff cannot hide a transient excursion.
  out += "columns: speed_mps status rows peak_lateral_m peak_heading_deg"
         " rms_control_error_m max_control_error_m peak_tracking_m"
         " peak_a_long full_peak_lateral_m full_peak_heading_deg"
         " full_max_control_error_m full_peak_tracking_m full_peak_a_long\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const fs::path csv = dir / traces[i];
    const CsvTable table = read_csv(csv.string());
    const auto& t = column(table, "t", csv.string());
    const auto& lat = column(table, "lateral_error", csv.string());
    const auto& head = column(table, "heading_error_deg", csv.string());
    const auto& ce = column(table, "control_error", csv.string());
    const auto& te = column(table, "tracking_error", csv.string());
    const auto& al = column(table, "a_long", csv.string());
    out += "row: " + speeds[i] + " " + statuses[i] + " " +
           std::to_string(table.rows) + " " +
           format_g17(abs_peak_from(t, lat, cutoff)) + " " +
           format_g17(abs_peak_from(t, head, cutoff)) + " " +
           format_g17(rms_from(t, ce, cutoff)) + " " +
           format_g17(abs_peak_from(t, ce, cutoff)) + " " +
           format_g17(abs_peak_from(t, te, cutoff)) + " " +
           format_g17(abs_peak_from(t, al, cutoff)) + " " +
           format_g17(abs_peak_from(t, lat, 0.0)) + " " +
           format_g17(abs_peak_from(t, head, 0.0)) + " " +
           format_g17(abs_peak_from(t, ce, 0.0)) + " " +
           format_g17(abs_peak_from(t, te, 0.0)) + " " +
           format_g17(abs_peak_from(t, al, 0.0)) + "\n";
  }
  return out;
}

std::string platoon_summary(const fs::path& dir, const Manifest& m) {
  const std::string name = m.one("scenario");
  const double cutoff = parse_num(m.one("transient_cutoff_s"));
  const auto traces = m.all("trace");

  std::string out;
  out += "scenario: " + name + "\n";
  out += "kind: platoon\n";
  out += "transient_cutoff_s: " + format_g17(cutoff) + "\n";
  out += "status: " + m.one("status") + "\n";
  out += "fallback_events: " + m.one("fallback_events") + "\n";
  out += "order_violations: " + m.one("order_violations") + "\n";
  out += "columns: robot rows avg_control_error_m peak_control_error_m"
         " full_peak_control_error_m\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const fs::path csv = dir / traces[i];
    const CsvTable table = read_csv(csv.string());
    const auto& t = column(table, "t", csv.string());
    const auto& ce = column(table, "control_error", csv.string());
    out += "row: " + std::to_string(i + 1) + " " + std::to_string(table.rows) +
           " " + format_g17(mean_from(t, ce, cutoff)) + " " +
           format_g17(abs_peak_from(t, ce, cutoff)) + " " +
           format_g17(abs_peak_from(t, ce, 0.0)) + "\n";
  }
  const fs::path spath = dir / m.one("spacing");
  const CsvTable spacing = read_csv(spath.string());
  const auto& st = column(spacing, "t", spath.string());
  out += "spacing_columns: gap min_m max_m final_m\n";
  for (const auto& col : spacing.columns) {
    if (col == "t") continue;
    const auto& v = spacing.data.at(col);
    const double final_v = v.empty() ? kNan : v.back();
    out += "spacing_row: " + col.substr(4) + " " +
           format_g17(min_from(st, v, cutoff)) + " " +
           format_g17(abs_peak_from(st, v, cutoff)) + " " +
           format_g17(final_v) + "\n";
  }
  return out;
}

std::string summary_from_manifest(const fs::path& dir, const Manifest& m) {
  const std::string kind = m.one("kind");
  if (kind == "vehicle") return vehicle_summary(dir, m);
  if (kind == "platoon") return platoon_summary(dir, m);
  throw ConfigError("manifest has unknown kind '" + kind + "'");
}

} // namespace

std::string resolve_output_dir(const Scenario& sc, const std::string& override_dir) {
  if (!override_dir.empty()) return override_dir;
  if (const char* env = std::getenv("NRTRACK_OUTPUT_DIR"); env && *env)
    return (fs::path(env) / sc.name).string();
  return sc.output_dir;
}

std::unique_ptr<PlantModel> make_plant(const Scenario& sc) {
  if (sc.plant == PlantKind::Bicycle)
    return std::make_unique<BicyclePlant>(sc.bicycle, sc.v_min_mps, sc.jacobians);
  return std::make_unique<IntegratorPlant>(sc.integrator_dim);
}

std::unique_ptr<ReferenceCurve> make_curve(const Scenario& sc, double speed_mps) {
  if (sc.curve == CurveKind::LaneChange) {
    // Cover r(t + T) lookups up to t = duration, with margin.
    const double t_end = sc.duration_s + sc.horizon_s + 1.0;
    return std::make_unique<LaneChangeCurve>(speed_mps, t_end);
  }
  const auto points =
      stadium_control_points(sc.extent_x_m, sc.extent_y_m, sc.points_per_arc);
  if (sc.piecewise_profile)
    return std::make_unique<ClosedSplineCurve>(points, sc.profile);
  return std::make_unique<ClosedSplineCurve>(points, speed_mps);
}

Vec initial_state(const Scenario& sc, const ReferenceCurve& curve,
                  double speed_mps) {
  const bool on_curve = sc.effective_start() == StartMode::OnCurve;
  const double t0 = curve.domain().t_begin;
  if (sc.plant == PlantKind::Integrator) {
    Vec x = Vec::Zero(sc.integrator_dim);
    if (on_curve) {
      const Vec2 r0 = curve.eval(t0);
      x[0] = r0[0];
      x[1] = r0[1];
    }
    return x;
  }
  Vec x = Vec::Zero(6);
  x[2] = speed_mps; // v_l
  if (on_curve) {
    const Vec2 r0 = curve.eval(t0);
    const Vec2 rd = curve.r_dot(t0);
    x[0] = r0[0];
    x[1] = r0[1];
    x[4] = std::atan2(rd[1], rd[0]); // psi aligned with the tangent
  }
  return x;
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv_header(const PlantModel& plant) {
  std::string h = "t";
  for (const auto& n : plant.state_names()) h += "," + n;
  for (const auto& n : plant.input_names()) h += "," + n;
  h += ",control_error,tracking_error,lateral_error,heading_error_deg,a_long";
  return h;
}

void write_trace_csv(const std::string& path, const PlantModel& plant,
                     const SimTrace& trace) {
  std::string out = trace_csv_header(plant) + "\n";
  for (const auto& row : trace.rows) {
    out += format_g17(row.t);
    for (Eigen::Index i = 0; i < row.x.size(); ++i)
      out += "," + format_g17(row.x[i]);
    for (Eigen::Index i = 0; i < row.u.size(); ++i)
      out += "," + format_g17(row.u[i]);
    out += "," + format_g17(row.control_error);
    out += "," + format_g17(row.tracking_error);
    out += "," + format_g17(row.lateral_error);
    out += "," + format_g17(row.heading_error * kRadToDeg);
    out += "," + format_g17(row.u.size() > 0 ? row.u[0] : kNan);
    out += "\n";
  }
  write_file(path, out);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CSV: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty CSV: " + path);
  table.columns = split(line, ',');
  for (const auto& c : table.columns) {
    if (c.empty()) throw ConfigError("empty column name in " + path);
    if (!table.data.emplace(c, std::vector<double>{}).second)
      throw ConfigError("duplicate column '" + c + "' in " + path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != table.columns.size())
      throw ConfigError("row with " + std::to_string(parts.size()) +
                        " fields, expected " +
                        std::to_string(table.columns.size()) + " in " + path);
    for (std::size_t i = 0; i < parts.size(); ++i)
      table.data[table.columns[i]].push_back(parse_num(parts[i]));
    ++table.rows;
  }
  return table;
}

VehicleRunOutput run_vehicle_scenario(const Scenario& sc,
                                      const std::string& out_override) {
  sc.validate();
  if (sc.kind != ScenarioKind::Vehicle)
    throw ConfigError("scenario '" + sc.name + "' is not a vehicle scenario");

  const fs::path dir = resolve_output_dir(sc, out_override);
  fs::create_directories(dir);
  const auto plant = make_plant(sc);

  VehicleRunOutput out;
  std::string manifest;
  manifest += "scenario: " + sc.name + "\n";
  manifest += "kind: vehicle\n";
  manifest += "transient_cutoff_s: " + format_g17(sc.transient_cutoff_s) + "\n";

  for (std::size_t i = 0; i < sc.speeds_mps.size(); ++i) {
    const double speed = sc.speeds_mps[i];
    const auto curve = make_curve(sc, speed);
    const Vec x0 = initial_state(sc, *curve, speed);

    ControllerConfig cfg;
    cfg.alpha = sc.alpha;
    cfg.predictor.horizon = sc.horizon_s;
    cfg.predictor.dt = sc.predictor_dt_s;
    cfg.predictor.method = sc.predictor_method;
    cfg.controller_dt = sc.sim_dt_s;
    cfg.singular_policy = sc.singular_policy;

    RunResult res =
        run_closed_loop(*plant, *curve, cfg, sc.sim_dt_s, sc.duration_s, x0);

    const std::string csv_name =
        sc.name + "_speed" + std::to_string(i + 1) + ".csv";
    const fs::path csv_path = dir / csv_name;
    write_trace_csv(csv_path.string(), *plant, res.trace);
    out.csv_paths.push_back(csv_path.string());

    manifest += "speed_mps: " + format_g17(speed) + "\n";
    manifest += "status: " + status_name(res.status) + "\n";
    manifest += "message: " + (res.message.empty() ? "-" : res.message) + "\n";
    manifest += "trace: " + csv_name + "\n";
    out.results.push_back(std::move(res));
  }

  const fs::path manifest_path = dir / (sc.name + "_manifest.txt");
  write_file(manifest_path, manifest);
  out.manifest_path = manifest_path.string();

  const Manifest m = read_manifest(manifest_path);
  out.summary_text = summary_from_manifest(dir, m);
  const fs::path summary_path = dir / (sc.name + "_summary.txt");
  write_file(summary_path, out.summary_text);
  out.summary_path = summary_path.string();
  return out;
}

PlatoonRunOutput run_platoon_scenario(const Scenario& sc,
                                      const std::string& out_override) {
  sc.validate();
  if (sc.kind != ScenarioKind::Platoon)
    throw ConfigError("scenario '" + sc.name + "' is not a platoon scenario");

  const fs::path dir = resolve_output_dir(sc, out_override);
  fs::create_directories(dir);
  const auto curve = make_curve(sc, sc.curve_speed_mps);

  PlatoonConfig cfg;
  cfg.n_robots = sc.n_robots;
  cfg.spacing_d = sc.spacing_m;
  cfg.point_offset_l = sc.point_offset_m;
  cfg.gamma = sc.gamma;
  cfg.alpha = sc.alpha;
  cfg.horizon = sc.horizon_s;
  cfg.dt = sc.sim_dt_s;

  PlatoonRunOutput out;
  out.result = run_platoon(*curve, cfg, sc.duration_s);
  const PlatoonResult& res = out.result;

  std::string manifest;
  manifest += "scenario: " + sc.name + "\n";
  manifest += "kind: platoon\n";
  manifest += "transient_cutoff_s: " + format_g17(sc.transient_cutoff_s) + "\n";
  manifest += "status: " + status_name(res.status) + "\n";
  manifest += "message: " + (res.message.empty() ? "-" : res.message) + "\n";
  manifest += "fallback_events: " + std::to_string(res.fallback_events) + "\n";
  manifest += "order_violations: " + std::to_string(res.order_violations) + "\n";

  for (std::size_t i = 0; i < res.robots.size(); ++i) {
    std::string csv = "t,z1,z2,psi,p1,p2,u1,u2,rho1,rho2,control_error\n";
    for (const auto& row : res.robots[i]) {
      csv += format_g17(row.t);
      csv += "," + format_g17(row.pose.z1);
      csv += "," + format_g17(row.pose.z2);
      csv += "," + format_g17(row.pose.psi);
      csv += "," + format_g17(row.p[0]);
      csv += "," + format_g17(row.p[1]);
      csv += "," + format_g17(row.u[0]);
      csv += "," + format_g17(row.u[1]);
      csv += "," + format_g17(row.rho[0]);
      csv += "," + format_g17(row.rho[1]);
      csv += "," + format_g17(row.control_error);
      csv += "\n";
    }
    const std::string csv_name =
        sc.name + "_robot" + std::to_string(i + 1) + ".csv";
    const fs::path csv_path = dir / csv_name;
    write_file(csv_path, csv);
    out.robot_csv_paths.push_back(csv_path.string());
    manifest += "trace: " + csv_name + "\n";
  }

  std::string spacing_csv = "t";
  for (int i = 1; i < cfg.n_robots; ++i)
    spacing_csv += ",gap_" + std::to_string(i) + "_" + std::to_string(i + 1);
  spacing_csv += "\n";
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    spacing_csv += format_g17(res.times[k]);
    for (const double gap : res.spacings[k])
      spacing_csv += "," + format_g17(gap);
    spacing_csv += "\n";
  }
  const std::string spacing_name = sc.name + "_spacing.csv";
  const fs::path spacing_path = dir / spacing_name;
  write_file(spacing_path, spacing_csv);
  out.spacing_csv_path = spacing_path.string();
  manifest += "spacing: " + spacing_name + "\n";

  const fs::path manifest_path = dir / (sc.name + "_manifest.txt");
  write_file(manifest_path, manifest);
  out.manifest_path = manifest_path.string();

  const Manifest m = read_manifest(manifest_path);
  out.summary_text = summary_from_manifest(dir, m);
  const fs::path summary_path = dir / (sc.name + "_summary.txt");
  write_file(summary_path, out.summary_text);
  out.summary_path = summary_path.string();
  return out;
}

SweepRunOutput run_sweep_scenario(const Scenario& sc,
                                  const std::vector<double>& alphas,
                                  const std::vector<double>& horizons,
                                  const std::string& out_override) {
  sc.validate();
  if (sc.kind != ScenarioKind::Vehicle)
    throw ConfigError("sweep needs a vehicle scenario, got '" + sc.name + "'");

  const fs::path dir = resolve_output_dir(sc, out_override);
  fs::create_directories(dir);

  const double speed = sc.speeds_mps.front();
  const auto plant = make_plant(sc);
  const auto curve = make_curve(sc, speed);
  const Vec x0 = initial_state(sc, *curve, speed);

  ControllerConfig base;
  base.alpha = sc.alpha;
  base.predictor.horizon = sc.horizon_s;
  base.predictor.dt = sc.predictor_dt_s;
  base.predictor.method = sc.predictor_method;
  base.controller_dt = sc.sim_dt_s;
  base.singular_policy = sc.singular_policy;

  SweepRunOutput out;
  out.sweep = stability_sweep(*plant, *curve, base, alphas, horizons,
                              sc.sim_dt_s, sc.duration_s, x0);

  std::string csv = "alpha,horizon_s,status,peak_tracking_error_m,t_blowup_s\n";
  std::string table;
  for (const auto& cell : out.sweep.cells) {
    const std::string status = cell.bounded ? "Bounded" : "Diverged";
    csv += format_g17(cell.alpha) + "," + format_g17(cell.horizon) + "," +
           status + "," +
           format_g17(cell.bounded ? cell.peak_tracking_error : kNan) + "," +
           format_g17(cell.bounded ? kNan : cell.t_blowup) + "\n";
    table += "alpha=" + format_g17(cell.alpha) +
             " horizon_s=" + format_g17(cell.horizon) + " " + status;
    if (cell.bounded)
      table += " peak_tracking_error_m=" + format_g17(cell.peak_tracking_error);
    else
      table += " t_blowup_s=" + format_g17(cell.t_blowup);
    table += "\n";
  }
  const fs::path csv_path = dir / (sc.name + "_sweep.csv");
  write_file(csv_path, csv);
  out.csv_path = csv_path.string();
  out.table_text = table;
  return out;
}

std::vector<std::string> regenerate_reports(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root))
    throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> manifests;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string fname = entry.path().filename().string();
    if (fname.size() > 13 &&
        fname.compare(fname.size() - 13, 13, "_manifest.txt") == 0)
      manifests.push_back(entry.path());
  }
  std::sort(manifests.begin(), manifests.end());
  std::vector<std::string> written;
  for (const auto& mpath : manifests) {
    const Manifest m = read_manifest(mpath);
    const std::string text = summary_from_manifest(root, m);
    const fs::path spath = root / (m.one("scenario") + "_summary.txt");
    write_file(spath, text);
    written.push_back(spath.string());
  }
  return written;
}

} // namespace nrtrack
