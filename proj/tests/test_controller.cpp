#include <cmath>

#include <doctest.h>

#include "nrtrack/controller.hpp"
#include "nrtrack/errors.hpp"
#include "nrtrack/plants.hpp"

using namespace nrtrack;

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

AnalyticCurve circle_curve(double omega = 1.0, double radius = 1.0) {
  CurveDomain dom;
  dom.periodic = true;
  dom.period = 2.0 * kPi / omega;
  return AnalyticCurve(
      [omega, radius](double t) {
        return Vec2(radius * std::sin(omega * t), radius * std::cos(omega * t));
      },
      dom);
}

ControllerConfig basic_cfg(double alpha, double horizon = 0.5,
                           double pred_dt = 1e-3) {
  ControllerConfig cfg;
  cfg.alpha = alpha;
  cfg.predictor.horizon = horizon;
  cfg.predictor.dt = pred_dt;
  return cfg;
}

} // namespace

TEST_SUITE("controller") {

TEST_CASE("control step is u + dt alpha J^{-1} e, by hand") {
  Prediction pred;
  pred.y_pred = vec2(0.0, 0.0);
  pred.jac = Mat::Zero(2, 2);
  pred.jac(0, 0) = 2.0;
  pred.jac(1, 1) = 4.0;
  const Vec r_future = vec2(4.0, 8.0); // error (4, 8), direction (2, 2)

  ControllerConfig cfg = basic_cfg(3.0);
  cfg.controller_dt = 0.1;
  const Vec u1 = control_step(vec2(1.0, 1.0), pred, r_future, cfg);
  CHECK(u1[0] == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(u1[1] == doctest::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("doubling alpha doubles the update") {
  Prediction pred;
  pred.y_pred = vec2(0.3, -0.4);
  pred.jac = Mat::Identity(2, 2) * 1.7;
  pred.jac(0, 1) = 0.3;
  const Vec r_future = vec2(1.0, 2.0);
  const Vec u0 = vec2(0.5, -0.5);

  ControllerConfig cfg = basic_cfg(7.0);
  cfg.controller_dt = 0.01;
  const Vec du1 = control_step(u0, pred, r_future, cfg) - u0;
  cfg.alpha = 14.0;
  const Vec du2 = control_step(u0, pred, r_future, cfg) - u0;
  // the flow update is linear in alpha; the subtraction of u0 leaves
  // a couple of ulps of rounding
  CHECK(du2[0] == doctest::Approx(2.0 * du1[0]).epsilon(1e-12));
  CHECK(du2[1] == doctest::Approx(2.0 * du1[1]).epsilon(1e-12));
}

TEST_CASE("singular jacobian: fail policy throws, damped policy proceeds") {
  Prediction pred;
  pred.y_pred = vec2(0.0, 0.0);
  pred.jac = Mat::Zero(2, 2); // rank 0
  const Vec r_future = vec2(1.0, 0.0);

  ControllerConfig cfg = basic_cfg(1.0);
  cfg.controller_dt = 0.1;
  CHECK_THROWS_AS(control_step(vec2(0, 0), pred, r_future, cfg, 2.5),
                  SingularJacobianError);
  try {
    control_step(vec2(0, 0), pred, r_future, cfg, 2.5);
  } catch (const SingularJacobianError& e) {
    CHECK(e.t == 2.5);
  }

  cfg.singular_policy = SingularPolicy::Damped;
  long events = 0;
  Vec u;
  CHECK_NOTHROW(u = control_step(vec2(0, 0), pred, r_future, cfg, 2.5, &events));
  CHECK(events == 1);
  CHECK(u.allFinite());

  // A nearly rank-1 jacobian also counts as singular.
  pred.jac << 1.0, 1.0, 1.0, 1.0 + 1e-15;
  cfg.singular_policy = SingularPolicy::Fail;
  CHECK_THROWS_AS(control_step(vec2(0, 0), pred, r_future, cfg),
                  SingularJacobianError);
}

TEST_CASE("memoryless flow finds the root of a cubic map") {
  // g(u) = u^3 + u is strictly increasing; g(1) = 2.
  const auto g = [](const Vec& u) {
    Vec y(1);
    y[0] = u[0] * u[0] * u[0] + u[0];
    return y;
  };
  const auto dg = [](const Vec& u) {
    Mat j(1, 1);
    j(0, 0) = 3.0 * u[0] * u[0] + 1.0;
    return j;
  };
  Vec r(1);
  r[0] = 2.0;
  Vec u = Vec::Zero(1);
  for (int k = 0; k < 2000; ++k) u = memoryless_step(u, g, dg, r, 5.0, 0.01);
  CHECK(u[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("memoryless loop settles at the eta over alpha bound") {
  // Identity map chasing r(t) = (sin t, cos t): eta = 1, so the tracked
  // steady error is about 1/alpha.
  const auto g = [](const Vec& u) { return u; };
  const auto dg = [](const Vec& u) { return Mat::Identity(u.size(), u.size()); };
  const double alpha = 10.0;
  const double dt = 1e-3;

  Vec u = Vec::Zero(2);
  double worst = 0.0;
  for (double t = 0.0; t < 60.0; t += dt) {
    const Vec r = vec2(std::sin(t), std::cos(t));
    u = memoryless_step(u, g, dg, r, alpha, dt);
    if (t > 30.0) worst = std::max(worst, (r - u).norm());
  }
  CHECK(worst <= 1.05 / alpha);
  CHECK(worst >= 0.8 / alpha); // the bound is tight, not vacuous
}

TEST_CASE("lyapunov value") {
  CHECK(lyapunov_value(vec2(3, 4), vec2(0, 0)) == doctest::Approx(12.5));
  CHECK(lyapunov_value(vec2(1, 1), vec2(1, 1)) == 0.0);
}

TEST_CASE("closed loop keeps a circle within eta over alpha") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig cfg = basic_cfg(10.0, 0.5, 1e-3);
  const RunResult res =
      run_closed_loop(plant, curve, cfg, 1e-3, 30.0, vec2(0.0, 1.0));
  REQUIRE(res.status == RunStatus::Completed);
  double worst = 0.0;
  for (const auto& row : res.trace.rows)
    if (row.t > 20.0) worst = std::max(worst, row.tracking_error);
  // eta/alpha = 0.1 here; the predictor does a bit better than the
  // memoryless bound, but the steady error stays the same order
  CHECK(worst <= 0.105);
  CHECK(worst >= 0.02);
}

TEST_CASE("closed loop on a constant reference converges to machine level") {
  IntegratorPlant plant(2);
  CurveDomain dom;
  dom.t_begin = 0.0;
  dom.t_end = 20.0;
  AnalyticCurve point([](double) { return Vec2(3.0, 4.0); }, dom);
  ControllerConfig cfg = basic_cfg(10.0, 0.5, 1e-2);
  const RunResult res =
      run_closed_loop(plant, point, cfg, 0.01, 10.0, vec2(0.0, 0.0));
  REQUIRE(res.status == RunStatus::Completed);
  CHECK(res.trace.rows.back().tracking_error < 1e-6);
  CHECK(res.trace.rows.back().control_error < 1e-6);
}

TEST_CASE("row timing: one row per step plus the start, tail lands exactly") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig cfg = basic_cfg(5.0, 0.2, 0.05);

  // 1.0 / 0.1 snaps to ten full steps: rows at k * 0.1, eleven in total.
  RunResult res = run_closed_loop(plant, curve, cfg, 0.1, 1.0, vec2(0, 1));
  CHECK(res.trace.rows.size() == 11);
  CHECK(res.trace.rows.front().t == 0.0);

  // 0.25 / 0.1 leaves a 0.05 tail: rows at 0, 0.1, 0.2, 0.25.
  res = run_closed_loop(plant, curve, cfg, 0.1, 0.25, vec2(0, 1));
  CHECK(res.trace.rows.size() == 4);
  CHECK(res.trace.rows.back().t == 0.25);
}

TEST_CASE("metrics row reports the documented error decomposition") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve(); // r(t) = (sin t, cos t)
  const Vec x = vec2(0.0, 1.0);      // on the circle at t = 0
  const Vec u = vec2(0.0, 0.0);

  Prediction pred;
  pred.y_pred = vec2(0.0, 1.0);
  pred.jac = 0.5 * Mat::Identity(2, 2);
  const Vec r_future = curve.eval(0.5);

  const SimRow row = metrics_row(plant, curve, 0.0, x, u, pred, r_future, 0.0);
  CHECK(row.tracking_error == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(row.control_error ==
        doctest::Approx((r_future - pred.y_pred).norm()).epsilon(1e-12));
  CHECK(row.lateral_error < 1e-6); // the point is on the curve
  CHECK(row.heading_error == 0.0); // integrator has no heading state
  CHECK(row.jac_det == doctest::Approx(0.25).epsilon(1e-12));

  // Off-curve point: lateral error is the distance to the circle.
  const SimRow off = metrics_row(plant, curve, 0.0, vec2(0.0, 2.0), u, pred,
                                 r_future, 0.0);
  CHECK(off.lateral_error == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(off.nearest_tau) < 1e-4);
}

TEST_CASE("sweep classifies bounded and diverged cells") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig base = basic_cfg(1.0, 0.5, 1e-2);

  // alpha dt = 30 makes the discrete input update violently unstable.
  const SweepResult sw = stability_sweep(plant, curve, base, {10.0, 3000.0},
                                         {0.5}, 0.01, 20.0, vec2(0, 1));
  REQUIRE(sw.cells.size() == 2);
  CHECK(sw.cells[0].alpha == 10.0);
  CHECK(sw.cells[0].bounded);
  CHECK(sw.cells[0].peak_tracking_error > 0.0);
  CHECK(sw.cells[0].peak_tracking_error < 1.0);
  CHECK_FALSE(sw.cells[1].bounded);
  CHECK(sw.cells[1].t_blowup > 0.0);
  CHECK(sw.cells[1].t_blowup < 20.0);

  CHECK_THROWS_AS(stability_sweep(plant, curve, base, {}, {0.5}, 0.01, 1.0,
                                  vec2(0, 1)),
                  ConfigError);
}

TEST_CASE("plant errors abort with a partial trace") {
  // A reference racing backwards forces hard braking; the bicycle hits its
  // low-speed validity floor and the run reports Aborted, keeping the rows
  // recorded so far.
  BicyclePlant plant{BicycleParams{}};
  CurveDomain dom;
  dom.t_begin = 0.0;
  dom.t_end = 60.0;
  AnalyticCurve retreating([](double t) { return Vec2(-5.0 * t, 0.0); }, dom);

  Vec x0(6);
  x0 << 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
  ControllerConfig cfg = basic_cfg(30.0, 0.5, 1e-3);
  const RunResult res = run_closed_loop(plant, retreating, cfg, 0.01, 30.0, x0);
  CHECK(res.status == RunStatus::Aborted);
  CHECK(!res.message.empty());
  CHECK(res.t_end < 30.0);
  CHECK(!res.trace.rows.empty());
}

TEST_CASE("u_init seeds the control trajectory") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig cfg = basic_cfg(1e-9, 0.5, 1e-2);
  cfg.u_init = vec2(0.7, -0.3);
  const RunResult res = run_closed_loop(plant, curve, cfg, 0.01, 0.1, vec2(0, 1));
  REQUIRE(res.status == RunStatus::Completed);
  CHECK((res.trace.rows.front().u - vec2(0.7, -0.3)).norm() < 1e-6);
}

TEST_CASE("closed loop rejects inconsistent shapes") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig cfg = basic_cfg(5.0, 0.5, 1e-2);
  CHECK_THROWS_AS(run_closed_loop(plant, curve, cfg, 0.01, 1.0, Vec::Zero(3)),
                  ConfigError);
  CHECK_THROWS_AS(run_closed_loop(plant, curve, cfg, -0.01, 1.0, Vec::Zero(2)),
                  ConfigError);
  CHECK_THROWS_AS(run_closed_loop(plant, curve, cfg, 0.01, 0.0, Vec::Zero(2)),
                  ConfigError);
  IntegratorPlant wide(3);
  CHECK_THROWS_AS(run_closed_loop(wide, curve, cfg, 0.01, 1.0, Vec::Zero(3)),
                  ConfigError);
  cfg.u_init = Vec::Zero(1);
  CHECK_THROWS_AS(run_closed_loop(plant, curve, cfg, 0.01, 1.0, Vec::Zero(2)),
                  ConfigError);
}

TEST_CASE("reruns are bitwise identical") {
  IntegratorPlant plant(2);
  const auto curve = circle_curve();
  ControllerConfig cfg = basic_cfg(10.0, 0.5, 1e-2);
  const RunResult a = run_closed_loop(plant, curve, cfg, 0.01, 5.0, vec2(0, 1));
  const RunResult b = run_closed_loop(plant, curve, cfg, 0.01, 5.0, vec2(0, 1));
  REQUIRE(a.trace.rows.size() == b.trace.rows.size());
  for (std::size_t i = 0; i < a.trace.rows.size(); ++i) {
    CHECK(a.trace.rows[i].t == b.trace.rows[i].t);
    CHECK((a.trace.rows[i].x - b.trace.rows[i].x).norm() == 0.0);
    CHECK((a.trace.rows[i].u - b.trace.rows[i].u).norm() == 0.0);
    CHECK(a.trace.rows[i].lateral_error == b.trace.rows[i].lateral_error);
  }
}

TEST_CASE("config validation") {
  ControllerConfig cfg = basic_cfg(1.0);
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = basic_cfg(1.0);
  cfg.controller_dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

} // TEST_SUITE
