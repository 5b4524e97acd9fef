// Acceptance checks for the tracking controller: reruns the bundled
// scenarios, measures the published figures of merit, and prints one
// PASS/FAIL line per criterion with the measured values and pinned bounds.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nrtrack/harness.hpp"

using namespace nrtrack;
namespace fs = std::filesystem;

namespace {

constexpr double kRadToDeg = 57.295779513082323;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double peak(const SimTrace& trace, double cutoff,
            const std::function<double(const SimRow&)>& value) {
  double worst = 0.0;
  for (const auto& row : trace.rows)
    if (row.t >= cutoff) worst = std::max(worst, std::abs(value(row)));
  return worst;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss << std::setprecision(prec) << v;
  return ss.str();
}

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": "
            << detail << "\n";
  if (!pass) ++failures;
}

void fail_with_error(int id, const std::string& what) {
  report(id, false, "unexpected error: " + what);
}

// ---------------------------------------------------------------------------
// 1. Lane-change lateral/heading peaks at 10/15/19 m/s.

void criterion_1(const VehicleRunOutput& lane, double seconds) {
  const std::vector<double> targets = {0.07, 0.16, 0.25};
  std::vector<double> lat, head;
  bool ok = lane.results.size() == 3;
  for (const auto& res : lane.results) {
    ok = ok && res.status == RunStatus::Completed;
    lat.push_back(peak(res.trace, 0.0,
                       [](const SimRow& r) { return r.lateral_error; }));
    head.push_back(kRadToDeg * peak(res.trace, 0.0, [](const SimRow& r) {
                     return r.heading_error;
                   }));
  }
  std::string detail = "lane-change lateral peaks";
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double lo = 0.5 * targets[i], hi = 1.5 * targets[i];
    ok = ok && lat[i] >= lo && lat[i] <= hi;
    if (i > 0) ok = ok && lat[i] > lat[i - 1];
    detail += " " + fmt(lat[i]) + " (band " + fmt(lo) + "-" + fmt(hi) + ")";
  }
  double head_peak = 0.0;
  for (double h : head) head_peak = std::max(head_peak, h);
  ok = ok && head_peak <= 3.5;
  const double per_speed = seconds / 3.0;
  ok = ok && per_speed < 10.0;
  detail += " m increasing, heading peak " + fmt(head_peak) +
            " deg <= 3.5, " + fmt(per_speed, 3) + " s/speed < 10";
  report(1, ok, detail);
}

// ---------------------------------------------------------------------------
// 2. Lane-change control error and longitudinal acceleration bounds.

void criterion_2(const VehicleRunOutput& lane, double cutoff) {
  double ce = 0.0, accel_steady = 0.0, accel_any = 0.0;
  bool ok = !lane.results.empty();
  for (const auto& res : lane.results) {
    ok = ok && res.status == RunStatus::Completed;
    ce = std::max(ce, peak(res.trace, cutoff, [](const SimRow& r) {
           return r.control_error;
         }));
    accel_steady = std::max(
        accel_steady,
        peak(res.trace, cutoff, [](const SimRow& r) { return r.u[0]; }));
    accel_any = std::max(
        accel_any,
        peak(res.trace, 0.0, [](const SimRow& r) { return r.u[0]; }));
  }
  ok = ok && ce < 0.10 && accel_steady < 0.5 && accel_any < 3.0;
  report(2, ok,
         "lane-change post-transient control error " + fmt(ce) +
             " m < 0.1, post-transient a_long " + fmt(accel_steady) +
             " < 0.5, transient a_long peak " + fmt(accel_any) + " < 3");
}

// ---------------------------------------------------------------------------
// 3. Closed-curve runs stay bounded with small, speed-monotone lateral error.

void criterion_3(const VehicleRunOutput& curve, double cutoff) {
  bool ok = curve.results.size() == 3;
  std::vector<double> lat;
  double head_peak = 0.0;
  for (const auto& res : curve.results) {
    ok = ok && res.status == RunStatus::Completed;
    lat.push_back(peak(res.trace, cutoff,
                       [](const SimRow& r) { return r.lateral_error; }));
    head_peak = std::max(head_peak,
                         kRadToDeg * peak(res.trace, cutoff, [](const SimRow& r) {
                           return r.heading_error;
                         }));
  }
  std::string detail = "closed-curve bounded, post-transient lateral";
  for (std::size_t i = 0; i < lat.size(); ++i) {
    ok = ok && lat[i] < 0.5;
    if (i > 0) ok = ok && lat[i] > lat[i - 1];
    detail += " " + fmt(lat[i]);
  }
  ok = ok && head_peak < 10.0;
  detail += " m < 0.5 increasing with speed, heading " + fmt(head_peak) +
            " deg < 10";
  report(3, ok, detail);
}

// ---------------------------------------------------------------------------
// 4. Memoryless flow on the identity map: limsup error <= 1.05 / alpha.

void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto g = [](const Vec& u) { return u; };
  const auto dg = [](const Vec& u) { return Mat::Identity(u.size(), u.size()); };
  const double dt = 5e-4;
  bool ok = true;
  std::string detail = "identity-map limsup tracking error";
  for (double alpha : {5.0, 10.0, 50.0}) {
    Vec u = Vec::Zero(2);
    double worst = 0.0;
    const long steps = static_cast<long>(std::llround(100.0 / dt));
    for (long k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Vec r(Vec2(std::sin(t), std::cos(t)));
      if (t >= 50.0) worst = std::max(worst, (r - u).norm());
      u = memoryless_step(u, g, dg, r, alpha, dt);
    }
    const double bound = 1.05 / alpha;
    ok = ok && worst <= bound;
    detail += " alpha=" + fmt(alpha, 3) + ": " + fmt(worst) +
              " <= " + fmt(bound);
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 1.0;
  detail += ", " + fmt(elapsed, 3) + " s < 1";
  report(4, ok, detail);
}

// ---------------------------------------------------------------------------
// 5. Sensitivity-ODE Jacobian against central finite differences.

void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(7);
  auto uniform = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  BicyclePlant bicycle{BicycleParams{}};
  PredictorConfig cfg;
  cfg.horizon = 0.5;
  cfg.dt = 1e-3;
  double worst_bicycle = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec x(6), u(2);
    x << uniform(-50.0, 50.0), uniform(-50.0, 50.0), uniform(5.0, 30.0),
        uniform(-1.0, 1.0), uniform(-3.14, 3.14), uniform(-0.3, 0.3);
    u << uniform(-1.0, 1.0), uniform(-0.05, 0.05);
    const Mat sens = predict_with_jacobian(bicycle, x, u, cfg).jac;
    const Mat fd = fd_jacobian(bicycle, x, u, cfg);
    worst_bicycle = std::max(worst_bicycle, (sens - fd).norm() / fd.norm());
  }

  IntegratorPlant point(2);
  double worst_point = 0.0;
  for (int k = 0; k < 10; ++k) {
    Vec x(2), u(2);
    x << uniform(-5.0, 5.0), uniform(-5.0, 5.0);
    u << uniform(-2.0, 2.0), uniform(-2.0, 2.0);
    const Mat sens = predict_with_jacobian(point, x, u, cfg).jac;
    // central differences are truncation-free on a linear plant, so a
    // large step just suppresses the subtraction cancellation
    const Mat fd = fd_jacobian(point, x, u, cfg, 1e-2);
    worst_point = std::max(worst_point, (sens - fd).norm() / fd.norm());
  }

  const double elapsed = seconds_since(t0);
  const bool ok =
      worst_bicycle < 1e-3 && worst_point < 1e-9 && elapsed < 5.0;
  report(5, ok,
         "jacobian rel Frobenius error: bicycle " + fmt(worst_bicycle) +
             " < 1e-3 (100 states), integrator " + fmt(worst_point) +
             " < 1e-9, " + fmt(elapsed, 3) + " s < 5");
}

// ---------------------------------------------------------------------------
// 6. Platoon spacing convergence and steady control error.

void criterion_6(const PlatoonRunOutput& platoon, double seconds) {
  const PlatoonResult& res = platoon.result;
  bool ok = res.status == RunStatus::Completed;
  double gap_lo = 1e300, gap_hi = 0.0;
  for (std::size_t k = 0; k < res.times.size(); ++k) {
    if (res.times[k] <= 20.0) continue;
    for (double gap : res.spacings[k]) {
      gap_lo = std::min(gap_lo, gap);
      gap_hi = std::max(gap_hi, gap);
    }
  }
  ok = ok && gap_lo >= 0.23 && gap_hi <= 0.27;

  double worst_avg = 0.0;
  for (const auto& robot : res.robots) {
    double sum = 0.0;
    long n = 0;
    for (const auto& row : robot)
      if (row.t > 20.0) {
        sum += row.control_error;
        ++n;
      }
    if (n > 0) worst_avg = std::max(worst_avg, sum / static_cast<double>(n));
  }
  ok = ok && worst_avg <= 0.01 && seconds < 5.0;
  report(6, ok,
         "platoon spacings in [" + fmt(gap_lo, 5) + ", " + fmt(gap_hi, 5) +
             "] m vs 0.25 +/- 0.02 for t > 20 s, worst avg control error " +
             fmt(worst_avg) + " m <= 0.01, " + fmt(seconds, 3) + " s < 5");
}

// ---------------------------------------------------------------------------
// 7. Stable region of the alpha sweep is non-shrinking in alpha.

void criterion_7(const Scenario& lane, const fs::path& scratch) {
  const std::vector<double> alphas = {5.0, 15.0, 30.0};
  const SweepRunOutput out =
      run_sweep_scenario(lane, alphas, {0.5}, (scratch / "sweep").string());
  bool ok = out.sweep.cells.size() == 3;
  bool seen_bounded = false;
  std::string detail = "sweep at T=0.5:";
  for (const auto& cell : out.sweep.cells) {
    if (seen_bounded && !cell.bounded) ok = false; // stable region shrank
    seen_bounded = seen_bounded || cell.bounded;
    detail += " alpha=" + fmt(cell.alpha, 3) +
              (cell.bounded ? ":Bounded" : ":Diverged");
  }
  ok = ok && !out.sweep.cells.empty() && out.sweep.cells.back().bounded;
  detail += ", region non-shrinking and (30, 0.5) Bounded";
  report(7, ok, detail);
}

// ---------------------------------------------------------------------------
// 8. Scenario reruns are byte-identical.

void criterion_8(const fs::path& a, const fs::path& b) {
  long compared = 0;
  bool ok = true;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv")
      continue;
    const fs::path rel = fs::relative(entry.path(), a);
    const fs::path twin = b / rel;
    if (!fs::exists(twin) || read_bytes(entry.path()) != read_bytes(twin)) {
      ok = false;
      if (first_diff.empty()) first_diff = rel.string();
    }
    ++compared;
  }
  ok = ok && compared > 0;
  std::string detail = "rerun of every scenario: " + std::to_string(compared) +
                       " csv files byte-identical";
  if (!first_diff.empty()) detail += ", first mismatch " + first_diff;
  report(8, ok, detail);
}

} // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <scenario_dir> <scratch_dir>\n";
    return 2;
  }
  const fs::path scenarios = argv[1];
  const fs::path scratch = argv[2];
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  try {
    const std::vector<std::string> vehicle_names = {"lane_change",
                                                    "lane_change_10",
                                                    "closed_curve"};
    const std::vector<std::string> platoon_names = {"platoon",
                                                    "platoon_two_peak"};
    std::map<std::string, Scenario> scs;
    for (const auto& name : vehicle_names)
      scs.emplace(name, load_scenario((scenarios / (name + ".scn")).string()));
    for (const auto& name : platoon_names)
      scs.emplace(name, load_scenario((scenarios / (name + ".scn")).string()));

    std::map<std::string, VehicleRunOutput> vehicle_runs;
    std::map<std::string, double> vehicle_seconds;
    std::map<std::string, PlatoonRunOutput> platoon_runs;
    std::map<std::string, double> platoon_seconds;
    for (const auto& pass : {"a", "b"}) {
      for (const auto& name : vehicle_names) {
        const auto t0 = std::chrono::steady_clock::now();
        auto out = run_vehicle_scenario(scs.at(name),
                                        (scratch / pass / name).string());
        if (pass[0] == 'a') {
          vehicle_seconds[name] = seconds_since(t0);
          vehicle_runs.emplace(name, std::move(out));
        }
      }
      for (const auto& name : platoon_names) {
        const auto t0 = std::chrono::steady_clock::now();
        auto out = run_platoon_scenario(scs.at(name),
                                        (scratch / pass / name).string());
        if (pass[0] == 'a') {
          platoon_seconds[name] = seconds_since(t0);
          platoon_runs.emplace(name, std::move(out));
        }
      }
    }

    criterion_1(vehicle_runs.at("lane_change"),
                vehicle_seconds.at("lane_change"));
    criterion_2(vehicle_runs.at("lane_change"),
                scs.at("lane_change").transient_cutoff_s);
    criterion_3(vehicle_runs.at("closed_curve"),
                scs.at("closed_curve").transient_cutoff_s);
    criterion_4();
    criterion_5();
    criterion_6(platoon_runs.at("platoon"), platoon_seconds.at("platoon"));
    criterion_7(scs.at("lane_change"), scratch);
    criterion_8(scratch / "a", scratch / "b");
  } catch (const std::exception& e) {
    std::cerr << "acceptance aborted: " << e.what() << "\n";
    return 1;
  }

  std::cout << "acceptance: " << (8 - failures) << "/8 criteria passed\n";
  return failures == 0 ? 0 : 1;
}
