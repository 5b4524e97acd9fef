#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nrtrack/controller.hpp"
#include "nrtrack/errors.hpp"
#include "nrtrack/harness.hpp"
#include "nrtrack/odeint.hpp"
#include "nrtrack/plants.hpp"
#include "nrtrack/platoon.hpp"
#include "nrtrack/predictor.hpp"
#include "nrtrack/reference.hpp"
#include "nrtrack/scenario.hpp"

namespace py = pybind11;
using namespace nrtrack;

namespace {

/// Adapts a value-returning python derivative to the out-parameter field.
OdeField wrap_field(const std::function<Vec(const Vec&, double)>& fn) {
  return [fn](const Vec& x, double t, Vec& dxdt) { dxdt = fn(x, t); };
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Newton-flow output tracking: plants, reference curves, predictor, "
            "controller, platoon coordination, and scenario runners";

  // Exceptions; later registrations translate first, so derived follow base.
  auto exc_base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", exc_base);
  py::register_exception<IntegrationError>(m, "IntegrationError", exc_base);
  py::register_exception<LowSpeedError>(m, "LowSpeedError", exc_base);
  py::register_exception<CurveDomainError>(m, "CurveDomainError", exc_base);
  py::register_exception<ChordNotFoundError>(m, "ChordNotFoundError", exc_base);
  py::register_exception<SingularJacobianError>(m, "SingularJacobianError",
                                                exc_base);

  // odeint
  py::enum_<StepMethod>(m, "StepMethod")
      .value("ForwardEuler", StepMethod::ForwardEuler)
      .value("RK4", StepMethod::RK4);

  py::class_<StepConfig>(m, "StepConfig")
      .def(py::init<>())
      .def_readwrite("dt", &StepConfig::dt)
      .def_readwrite("method", &StepConfig::method);

  m.def(
      "integrate",
      [](const std::function<Vec(const Vec&, double)>& f, const Vec& x0,
         double t0, double t1, const StepConfig& cfg) {
        return integrate(wrap_field(f), x0, t0, t1, cfg);
      },
      py::arg("f"), py::arg("x0"), py::arg("t0"), py::arg("t1"), py::arg("cfg"),
      "Fixed-step integration of x' = f(x, t) over [t0, t1]");
  m.def("wrap_angle", &wrap_angle, py::arg("a"));

  // plants
  py::enum_<JacobianMode>(m, "JacobianMode")
      .value("Analytic", JacobianMode::Analytic)
      .value("FiniteDifference", JacobianMode::FiniteDifference);

  py::class_<PlantModel>(m, "PlantModel")
      .def("state_dim", &PlantModel::state_dim)
      .def("input_dim", &PlantModel::input_dim)
      .def("heading_index", &PlantModel::heading_index)
      .def("state_names", &PlantModel::state_names)
      .def("input_names", &PlantModel::input_names)
      .def(
          "f",
          [](const PlantModel& p, const Vec& x, const Vec& u) {
            return p.f(x, u);
          },
          py::arg("x"), py::arg("u"))
      .def("h", [](const PlantModel& p, const Vec& x) { return p.h(x); },
           py::arg("x"))
      .def(
          "df_dx",
          [](const PlantModel& p, const Vec& x, const Vec& u) {
            return p.df_dx(x, u);
          },
          py::arg("x"), py::arg("u"))
      .def(
          "df_du",
          [](const PlantModel& p, const Vec& x, const Vec& u) {
            return p.df_du(x, u);
          },
          py::arg("x"), py::arg("u"))
      .def("dh_dx",
           [](const PlantModel& p, const Vec& x) { return p.dh_dx(x); },
           py::arg("x"));

  py::class_<BicycleParams>(m, "BicycleParams")
      .def(py::init<>())
      .def_readwrite("mass_kg", &BicycleParams::mass_kg)
      .def_readwrite("yaw_inertia_kgm2", &BicycleParams::yaw_inertia_kgm2)
      .def_readwrite("lf_m", &BicycleParams::lf_m)
      .def_readwrite("lr_m", &BicycleParams::lr_m)
      .def_readwrite("caf_n_per_rad", &BicycleParams::caf_n_per_rad)
      .def_readwrite("car_n_per_rad", &BicycleParams::car_n_per_rad)
      .def("validate", &BicycleParams::validate);

  py::class_<BicyclePlant, PlantModel>(m, "BicyclePlant")
      .def(py::init<BicycleParams, double, JacobianMode>(), py::arg("params"),
           py::arg("v_min") = 0.1, py::arg("mode") = JacobianMode::Analytic)
      .def_property_readonly("params", &BicyclePlant::params)
      .def_property_readonly("v_min", &BicyclePlant::v_min);

  py::class_<IntegratorPlant, PlantModel>(m, "IntegratorPlant")
      .def(py::init<int>(), py::arg("dim") = 2);

  py::class_<LinearPlant, PlantModel>(m, "LinearPlant")
      .def(py::init<Mat, Mat, Mat>(), py::arg("A"), py::arg("B"), py::arg("C"));

  py::class_<UnicyclePlant, PlantModel>(m, "UnicyclePlant").def(py::init<>());

  m.def("fd_df_dx", &fd_df_dx, py::arg("plant"), py::arg("x"), py::arg("u"),
        py::arg("h_rel") = 1e-6);
  m.def("fd_df_du", &fd_df_du, py::arg("plant"), py::arg("x"), py::arg("u"),
        py::arg("h_rel") = 1e-6);
  m.def("fd_dh_dx", &fd_dh_dx, py::arg("plant"), py::arg("x"),
        py::arg("h_rel") = 1e-6);

  py::class_<UnicycleState>(m, "UnicycleState")
      .def(py::init<>())
      .def(py::init([](double z1, double z2, double psi) {
             return UnicycleState{z1, z2, psi};
           }),
           py::arg("z1"), py::arg("z2"), py::arg("psi"))
      .def_readwrite("z1", &UnicycleState::z1)
      .def_readwrite("z2", &UnicycleState::z2)
      .def_readwrite("psi", &UnicycleState::psi);

  m.def("kinematic_point_of", &kinematic_point_of, py::arg("state"),
        py::arg("l"));
  m.def("point_to_unicycle", &point_to_unicycle, py::arg("psi"), py::arg("l"),
        py::arg("p_dot"));

  // reference curves
  py::class_<CurveDomain>(m, "CurveDomain")
      .def(py::init<>())
      .def_readwrite("t_begin", &CurveDomain::t_begin)
      .def_readwrite("t_end", &CurveDomain::t_end)
      .def_readwrite("periodic", &CurveDomain::periodic)
      .def_readwrite("period", &CurveDomain::period);

  py::class_<ReferenceCurve>(m, "ReferenceCurve")
      .def("eval", &ReferenceCurve::eval, py::arg("t"))
      .def("r_dot", &ReferenceCurve::r_dot, py::arg("t"))
      .def("domain", &ReferenceCurve::domain)
      .def("eta_estimate", &ReferenceCurve::eta_estimate,
           py::arg("samples") = 20001);

  py::class_<NearestPointResult>(m, "NearestPointResult")
      .def_readonly("tau", &NearestPointResult::tau)
      .def_readonly("point", &NearestPointResult::point)
      .def_readonly("distance", &NearestPointResult::distance)
      .def_readonly("at_window_edge", &NearestPointResult::at_window_edge);

  m.def("nearest_point", &nearest_point, py::arg("curve"), py::arg("p"),
        py::arg("t_hint"), py::arg("window") = 5.0, py::arg("coarse_dt") = 1e-3,
        py::arg("tol") = 1e-6);
  m.def("advance_to_chord_distance", &advance_to_chord_distance,
        py::arg("curve"), py::arg("q"), py::arg("d"), py::arg("t_start"),
        py::arg("window") = 10.0, py::arg("coarse_dt") = 1e-3,
        py::arg("tol") = 1e-6);
  m.def("lane_change_z2", &lane_change_z2, py::arg("z1"));

  py::class_<LaneChangeCurve, ReferenceCurve>(m, "LaneChangeCurve")
      .def(py::init<double, double>(), py::arg("speed_mps"),
           py::arg("t_end_s"))
      .def_property_readonly("speed", &LaneChangeCurve::speed);

  py::class_<SpeedProfile>(m, "SpeedProfile")
      .def(py::init<>())
      .def(py::init([](std::vector<double> times, std::vector<double> speeds) {
             return SpeedProfile{std::move(times), std::move(speeds)};
           }),
           py::arg("times_s"), py::arg("speeds_mps"))
      .def_readwrite("times_s", &SpeedProfile::times_s)
      .def_readwrite("speeds_mps", &SpeedProfile::speeds_mps);

  py::class_<ClosedSplineCurve, ReferenceCurve>(m, "ClosedSplineCurve")
      .def(py::init<std::vector<Vec2>, double>(), py::arg("control_points"),
           py::arg("speed_mps"))
      .def(py::init<std::vector<Vec2>, SpeedProfile>(),
           py::arg("control_points"), py::arg("profile"))
      .def_property_readonly("total_length", &ClosedSplineCurve::total_length);

  m.def("stadium_control_points", &stadium_control_points, py::arg("extent_x"),
        py::arg("extent_y"), py::arg("points_per_arc") = 6);

  py::class_<AnalyticCurve, ReferenceCurve>(m, "AnalyticCurve")
      .def(py::init<std::function<Vec2(double)>, CurveDomain,
                    std::function<Vec2(double)>>(),
           py::arg("eval_fn"), py::arg("domain"),
           py::arg("r_dot_fn") = nullptr);

  // predictor
  py::class_<PredictorConfig>(m, "PredictorConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &PredictorConfig::horizon)
      .def_readwrite("dt", &PredictorConfig::dt)
      .def_readwrite("method", &PredictorConfig::method)
      .def("validate", &PredictorConfig::validate);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("y_pred", &Prediction::y_pred)
      .def_readonly("jac", &Prediction::jac)
      .def_readonly("x_end", &Prediction::x_end);

  m.def("predict", &predict, py::arg("plant"), py::arg("x"), py::arg("u"),
        py::arg("cfg"));
  m.def("predict_with_jacobian", &predict_with_jacobian, py::arg("plant"),
        py::arg("x"), py::arg("u"), py::arg("cfg"));
  m.def("fd_jacobian", &fd_jacobian, py::arg("plant"), py::arg("x"),
        py::arg("u"), py::arg("cfg"), py::arg("h_rel") = 1e-6);

  // controller
  py::enum_<SingularPolicy>(m, "SingularPolicy")
      .value("Fail", SingularPolicy::Fail)
      .value("Damped", SingularPolicy::Damped);

  py::class_<ControllerConfig>(m, "ControllerConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &ControllerConfig::alpha)
      .def_readwrite("predictor", &ControllerConfig::predictor)
      .def_readwrite("controller_dt", &ControllerConfig::controller_dt)
      .def_readwrite("u_init", &ControllerConfig::u_init)
      .def_readwrite("singular_policy", &ControllerConfig::singular_policy)
      .def_readwrite("damped_lambda", &ControllerConfig::damped_lambda)
      .def("validate", &ControllerConfig::validate);

  m.def(
      "control_step",
      [](const Vec& u, const Prediction& pred, const Vec& r_future,
         const ControllerConfig& cfg, double t) {
        return control_step(u, pred, r_future, cfg, t);
      },
      py::arg("u"), py::arg("pred"), py::arg("r_future"), py::arg("cfg"),
      py::arg("t") = 0.0);
  m.def("memoryless_step", &memoryless_step, py::arg("u"), py::arg("g"),
        py::arg("dg_du"), py::arg("r"), py::arg("alpha"), py::arg("dt"),
        py::arg("policy") = SingularPolicy::Fail,
        py::arg("damped_lambda") = -1.0);
  m.def("lyapunov_value", &lyapunov_value, py::arg("r"), py::arg("g_val"));

  py::enum_<RunStatus>(m, "RunStatus")
      .value("Completed", RunStatus::Completed)
      .value("Diverged", RunStatus::Diverged)
      .value("Aborted", RunStatus::Aborted);

  py::class_<SimRow>(m, "SimRow")
      .def_readonly("t", &SimRow::t)
      .def_readonly("x", &SimRow::x)
      .def_readonly("u", &SimRow::u)
      .def_readonly("y", &SimRow::y)
      .def_readonly("r_now", &SimRow::r_now)
      .def_readonly("r_future", &SimRow::r_future)
      .def_readonly("control_error", &SimRow::control_error)
      .def_readonly("tracking_error", &SimRow::tracking_error)
      .def_readonly("lateral_error", &SimRow::lateral_error)
      .def_readonly("heading_error", &SimRow::heading_error)
      .def_readonly("jac_det", &SimRow::jac_det)
      .def_readonly("nearest_tau", &SimRow::nearest_tau);

  py::class_<SimTrace>(m, "SimTrace")
      .def_readonly("rows", &SimTrace::rows);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("trace", &RunResult::trace)
      .def_readonly("status", &RunResult::status)
      .def_readonly("message", &RunResult::message)
      .def_readonly("t_end", &RunResult::t_end)
      .def_readonly("singular_events", &RunResult::singular_events)
      .def_readonly("window_escapes", &RunResult::window_escapes);

  m.def("metrics_row", &metrics_row, py::arg("plant"), py::arg("curve"),
        py::arg("t"), py::arg("x"), py::arg("u"), py::arg("pred"),
        py::arg("r_future"), py::arg("nearest_hint"),
        py::arg("nearest_window") = 5.0);
  m.def("run_closed_loop", &run_closed_loop, py::arg("plant"), py::arg("curve"),
        py::arg("cfg"), py::arg("sim_dt"), py::arg("duration"), py::arg("x0"),
        py::arg("divergence_threshold") = 1e6,
        py::call_guard<py::gil_scoped_release>());

  py::class_<SweepCell>(m, "SweepCell")
      .def_readonly("alpha", &SweepCell::alpha)
      .def_readonly("horizon", &SweepCell::horizon)
      .def_readonly("bounded", &SweepCell::bounded)
      .def_readonly("peak_tracking_error", &SweepCell::peak_tracking_error)
      .def_readonly("t_blowup", &SweepCell::t_blowup);

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("cells", &SweepResult::cells);

  m.def("stability_sweep", &stability_sweep, py::arg("plant"), py::arg("curve"),
        py::arg("base"), py::arg("alphas"), py::arg("horizons"),
        py::arg("sim_dt"), py::arg("duration"), py::arg("x0"),
        py::arg("divergence_threshold") = 1e6,
        py::call_guard<py::gil_scoped_release>());

  // platoon
  py::class_<PlatoonConfig>(m, "PlatoonConfig")
      .def(py::init<>())
      .def_readwrite("n_robots", &PlatoonConfig::n_robots)
      .def_readwrite("spacing_d", &PlatoonConfig::spacing_d)
      .def_readwrite("point_offset_l", &PlatoonConfig::point_offset_l)
      .def_readwrite("gamma", &PlatoonConfig::gamma)
      .def_readwrite("alpha", &PlatoonConfig::alpha)
      .def_readwrite("horizon", &PlatoonConfig::horizon)
      .def_readwrite("dt", &PlatoonConfig::dt)
      .def_readwrite("back_off_chords", &PlatoonConfig::back_off_chords)
      .def("validate", &PlatoonConfig::validate);

  m.def("leader_reference", &leader_reference, py::arg("curve"), py::arg("t"),
        py::arg("T"), py::arg("gamma"));
  m.def("predicted_point", &predicted_point, py::arg("p"), py::arg("u"),
        py::arg("T"));

  py::class_<FollowerRef>(m, "FollowerRef")
      .def_readonly("rho", &FollowerRef::rho)
      .def_readonly("tau", &FollowerRef::tau)
      .def_readonly("q_tau", &FollowerRef::q_tau)
      .def_readonly("q", &FollowerRef::q)
      .def_readonly("order_violation", &FollowerRef::order_violation);

  m.def("follower_reference", &follower_reference, py::arg("curve"),
        py::arg("p_tilde_prev"), py::arg("d"), py::arg("q_hint"),
        py::arg("back_off_chords") = 1.5);

  py::class_<PlatoonRobotRow>(m, "PlatoonRobotRow")
      .def_readonly("t", &PlatoonRobotRow::t)
      .def_readonly("pose", &PlatoonRobotRow::pose)
      .def_readonly("p", &PlatoonRobotRow::p)
      .def_readonly("u", &PlatoonRobotRow::u)
      .def_readonly("rho", &PlatoonRobotRow::rho)
      .def_readonly("control_error", &PlatoonRobotRow::control_error)
      .def_readonly("ref_tau", &PlatoonRobotRow::ref_tau)
      .def_readonly("q_tau", &PlatoonRobotRow::q_tau);

  py::class_<PlatoonResult>(m, "PlatoonResult")
      .def_readonly("robots", &PlatoonResult::robots)
      .def_readonly("times", &PlatoonResult::times)
      .def_readonly("spacings", &PlatoonResult::spacings)
      .def_readonly("fallback_events", &PlatoonResult::fallback_events)
      .def_readonly("order_violations", &PlatoonResult::order_violations)
      .def_readonly("status", &PlatoonResult::status)
      .def_readonly("message", &PlatoonResult::message)
      .def_readonly("t_end", &PlatoonResult::t_end);

  m.def("run_platoon", &run_platoon, py::arg("curve"), py::arg("cfg"),
        py::arg("duration"), py::call_guard<py::gil_scoped_release>());

  // scenarios and file outputs
  py::enum_<ScenarioKind>(m, "ScenarioKind")
      .value("Vehicle", ScenarioKind::Vehicle)
      .value("Platoon", ScenarioKind::Platoon);
  py::enum_<PlantKind>(m, "PlantKind")
      .value("Bicycle", PlantKind::Bicycle)
      .value("Integrator", PlantKind::Integrator);
  py::enum_<CurveKind>(m, "CurveKind")
      .value("LaneChange", CurveKind::LaneChange)
      .value("ClosedSpline", CurveKind::ClosedSpline);
  py::enum_<StartMode>(m, "StartMode")
      .value("Origin", StartMode::Origin)
      .value("OnCurve", StartMode::OnCurve);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("name", &Scenario::name)
      .def_readwrite("kind", &Scenario::kind)
      .def_readwrite("plant", &Scenario::plant)
      .def_readwrite("bicycle", &Scenario::bicycle)
      .def_readwrite("v_min_mps", &Scenario::v_min_mps)
      .def_readwrite("jacobians", &Scenario::jacobians)
      .def_readwrite("integrator_dim", &Scenario::integrator_dim)
      .def_readwrite("curve", &Scenario::curve)
      .def_readwrite("extent_x_m", &Scenario::extent_x_m)
      .def_readwrite("extent_y_m", &Scenario::extent_y_m)
      .def_readwrite("points_per_arc", &Scenario::points_per_arc)
      .def_readwrite("speeds_mps", &Scenario::speeds_mps)
      .def_readwrite("curve_speed_mps", &Scenario::curve_speed_mps)
      .def_readwrite("piecewise_profile", &Scenario::piecewise_profile)
      .def_readwrite("profile", &Scenario::profile)
      .def_readwrite("alpha", &Scenario::alpha)
      .def_readwrite("horizon_s", &Scenario::horizon_s)
      .def_readwrite("predictor_dt_s", &Scenario::predictor_dt_s)
      .def_readwrite("predictor_method", &Scenario::predictor_method)
      .def_readwrite("sim_dt_s", &Scenario::sim_dt_s)
      .def_readwrite("duration_s", &Scenario::duration_s)
      .def_readwrite("transient_cutoff_s", &Scenario::transient_cutoff_s)
      .def_readwrite("start", &Scenario::start)
      .def_readwrite("start_set", &Scenario::start_set)
      .def_readwrite("singular_policy", &Scenario::singular_policy)
      .def_readwrite("output_dir", &Scenario::output_dir)
      .def_readwrite("n_robots", &Scenario::n_robots)
      .def_readwrite("spacing_m", &Scenario::spacing_m)
      .def_readwrite("point_offset_m", &Scenario::point_offset_m)
      .def_readwrite("gamma", &Scenario::gamma)
      .def("effective_start", &Scenario::effective_start)
      .def("validate", &Scenario::validate);

  m.def("parse_scenario", &parse_scenario, py::arg("text"), py::arg("source"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("make_plant", &make_plant, py::arg("scenario"));
  m.def("make_curve", &make_curve, py::arg("scenario"), py::arg("speed_mps"));
  m.def("initial_state", &initial_state, py::arg("scenario"), py::arg("curve"),
        py::arg("speed_mps"));

  py::class_<VehicleRunOutput>(m, "VehicleRunOutput")
      .def_readonly("results", &VehicleRunOutput::results)
      .def_readonly("csv_paths", &VehicleRunOutput::csv_paths)
      .def_readonly("summary_path", &VehicleRunOutput::summary_path)
      .def_readonly("manifest_path", &VehicleRunOutput::manifest_path)
      .def_readonly("summary_text", &VehicleRunOutput::summary_text);

  py::class_<PlatoonRunOutput>(m, "PlatoonRunOutput")
      .def_readonly("result", &PlatoonRunOutput::result)
      .def_readonly("robot_csv_paths", &PlatoonRunOutput::robot_csv_paths)
      .def_readonly("spacing_csv_path", &PlatoonRunOutput::spacing_csv_path)
      .def_readonly("summary_path", &PlatoonRunOutput::summary_path)
      .def_readonly("manifest_path", &PlatoonRunOutput::manifest_path)
      .def_readonly("summary_text", &PlatoonRunOutput::summary_text);

  py::class_<SweepRunOutput>(m, "SweepRunOutput")
      .def_readonly("sweep", &SweepRunOutput::sweep)
      .def_readonly("csv_path", &SweepRunOutput::csv_path)
      .def_readonly("table_text", &SweepRunOutput::table_text);

  m.def("run_vehicle_scenario", &run_vehicle_scenario, py::arg("scenario"),
        py::arg("out_override") = std::string(),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_platoon_scenario", &run_platoon_scenario, py::arg("scenario"),
        py::arg("out_override") = std::string(),
        py::call_guard<py::gil_scoped_release>());
  m.def("run_sweep_scenario", &run_sweep_scenario, py::arg("scenario"),
        py::arg("alphas"), py::arg("horizons"),
        py::arg("out_override") = std::string(),
        py::call_guard<py::gil_scoped_release>());
  m.def("regenerate_reports", &regenerate_reports, py::arg("dir"));

  py::class_<CsvTable>(m, "CsvTable")
      .def_readonly("columns", &CsvTable::columns)
      .def_readonly("data", &CsvTable::data)
      .def_readonly("rows", &CsvTable::rows);
  m.def("read_csv", &read_csv, py::arg("path"));
  m.def("trace_csv_header", &trace_csv_header, py::arg("plant"));
}
