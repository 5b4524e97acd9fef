#include "nrtrack/controller.hpp"

#include <cmath>
#include <string>

#include "nrtrack/errors.hpp"
#include "nrtrack/odeint.hpp"

namespace nrtrack {

void ControllerConfig::validate() const {
  if (!(alpha > 0.0))
    throw ConfigError("alpha must be positive, got " + std::to_string(alpha));
  if (!(controller_dt > 0.0))
    throw ConfigError("controller_dt must be positive, got " +
                      std::to_string(controller_dt));
  predictor.validate();
}

namespace {

// Newton direction J^{-1} e with the configured singular-Jacobian policy.
Vec newton_direction(const Mat& jac, const Vec& err, SingularPolicy policy,
                     double damped_lambda, double t, long* singular_events) {
  const auto m = jac.rows();
  const double scale =
      std::pow(std::max(jac.norm() / std::sqrt(static_cast<double>(m)), 1e-150),
               static_cast<double>(m));
  const double det = jac.determinant();
  if (std::abs(det) < 1e-9 * scale) {
    if (policy == SingularPolicy::Fail)
      throw SingularJacobianError(
          "prediction Jacobian numerically singular at t=" + std::to_string(t) +
              " (|det|=" + std::to_string(std::abs(det)) + ")",
          t, jac);
    const double lambda = damped_lambda >= 0.0
                              ? damped_lambda
                              : 1e-6 * jac.squaredNorm() / static_cast<double>(m);
    if (singular_events) ++(*singular_events);
    Mat jtj = jac.transpose() * jac;
    jtj.diagonal().array() += lambda;
    return jtj.ldlt().solve(jac.transpose() * err);
  }
  return jac.partialPivLu().solve(err);
}

} // namespace

Vec control_step(const Vec& u, const Prediction& pred, const Vec& r_future,
                 const ControllerConfig& cfg, double t, long* singular_events) {
  const Vec err = r_future - pred.y_pred;
  const Vec dir = newton_direction(pred.jac, err, cfg.singular_policy,
                                   cfg.damped_lambda, t, singular_events);
  return u + (cfg.controller_dt * cfg.alpha) * dir;
}

Vec memoryless_step(const Vec& u, const std::function<Vec(const Vec&)>& g,
                    const std::function<Mat(const Vec&)>& dg_du, const Vec& r,
                    double alpha, double dt, SingularPolicy policy,
                    double damped_lambda) {
  const Vec err = r - g(u);
  const Vec dir = newton_direction(dg_du(u), err, policy, damped_lambda, 0.0,
                                   nullptr);
  return u + (dt * alpha) * dir;
}

double lyapunov_value(const Vec& r, const Vec& g_val) {
  return 0.5 * (r - g_val).squaredNorm();
}

SimRow metrics_row(const PlantModel& plant, const ReferenceCurve& curve,
                   double t, const Vec& x, const Vec& u, const Prediction& pred,
                   const Vec& r_future, double nearest_hint,
                   double nearest_window) {
  SimRow row;
  row.t = t;
  row.x = x;
  row.u = u;
  row.y = plant.h(x);
  row.r_now = curve.eval(t);
  row.r_future = r_future;
  row.control_error = (r_future - pred.y_pred).norm();
  row.tracking_error = (row.r_now - row.y).norm();

  const auto np = nearest_point(curve, Vec2(row.y[0], row.y[1]), nearest_hint,
                                nearest_window);
  row.lateral_error = np.distance;
  row.nearest_tau = np.tau;
  row.nearest_at_window_edge = np.at_window_edge;

  const int hi = plant.heading_index();
  if (hi >= 0) {
    const Vec2 tangent = curve.r_dot(np.tau);
    if (tangent.norm() > 1e-12)
      row.heading_error =
          wrap_angle(x[hi] - std::atan2(tangent[1], tangent[0]));
  }
  row.jac_det = pred.jac.determinant();
  return row;
}

RunResult run_closed_loop(const PlantModel& plant, const ReferenceCurve& curve,
                          const ControllerConfig& cfg, double sim_dt,
                          double duration, const Vec& x0,
                          double divergence_threshold) {
  ControllerConfig loop_cfg = cfg;
  loop_cfg.controller_dt = sim_dt; // sampled-data loop: one u update per step
  loop_cfg.validate();
  if (!(sim_dt > 0.0))
    throw ConfigError("sim_dt must be positive, got " + std::to_string(sim_dt));
  if (!(duration > 0.0))
    throw ConfigError("duration must be positive, got " +
                      std::to_string(duration));
  const int m = plant.input_dim();
  if (m != 2)
    throw ConfigError("run_closed_loop needs a planar-output plant (m=2), got m=" +
                      std::to_string(m));
  if (x0.size() != plant.state_dim())
    throw ConfigError("x0 has size " + std::to_string(x0.size()) +
                      ", plant expects " + std::to_string(plant.state_dim()));

  Vec u = loop_cfg.u_init.size() == 0 ? Vec(Vec::Zero(m)) : loop_cfg.u_init;
  if (u.size() != m)
    throw ConfigError("u_init has size " + std::to_string(u.size()) +
                      ", plant expects " + std::to_string(m));

  // Step count with tail handling as in integrate(): snap near-integer
  // quotients, otherwise append a shortened final step to land on duration.
  const double q = duration / sim_dt;
  auto n_full = static_cast<long>(std::floor(q));
  if (std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::round(q)))
    n_full = static_cast<long>(std::round(q));
  const double tail = duration - static_cast<double>(n_full) * sim_dt;
  const bool has_tail = tail > 1e-12 * std::max(1.0, duration);

  const double T = loop_cfg.predictor.horizon;
  // After the first row the projection parameter moves by about sim_dt per
  // row, so a narrow hinted window is safe and much cheaper than the default.
  const double hinted_window = std::max(0.5, 50.0 * sim_dt);

  RunResult res;
  Stepper plant_stepper({sim_dt, StepMethod::ForwardEuler});
  OdeField plant_field = [&](const Vec& xs, double, Vec& out) {
    plant.f(xs, u, out);
  };

  Vec x = x0;
  double hint = 0.0;
  const long n_rows = n_full + (has_tail ? 1 : 0);
  res.trace.rows.reserve(static_cast<std::size_t>(n_rows) + 1);

  for (long k = 0;; ++k) {
    const double t = (has_tail && k == n_rows)
                         ? duration
                         : static_cast<double>(k) * sim_dt;
    SimRow row;
    try {
      const Prediction pred =
          predict_with_jacobian(plant, x, u, loop_cfg.predictor);
      const Vec r_future = curve.eval(t + T);
      row = metrics_row(plant, curve, t, x, u, pred, r_future,
                        k == 0 ? t : hint, k == 0 ? 5.0 : hinted_window);
      u = control_step(u, pred, r_future, loop_cfg, t, &res.singular_events);
    } catch (const Error& e) {
      res.status = RunStatus::Aborted;
      res.message = e.what();
      res.t_end = t;
      return res;
    }
    hint = row.nearest_tau;
    if (row.nearest_at_window_edge) ++res.window_escapes;
    if (!u.allFinite() || u.cwiseAbs().maxCoeff() > divergence_threshold) {
      res.status = RunStatus::Diverged;
      res.message = "control diverged at t=" + std::to_string(t);
      res.t_end = t;
      return res;
    }
    row.u = u; // record the applied control
    res.trace.rows.push_back(std::move(row));

    if (k == n_rows) break;
    const double dt_k = (has_tail && k == n_rows - 1) ? tail : sim_dt;
    const double t_next = (k == n_rows - 1) ? duration
                                            : static_cast<double>(k + 1) * sim_dt;
    try {
      plant_stepper.step_inplace(plant_field, x, t, dt_k);
    } catch (const Error& e) {
      res.status = RunStatus::Aborted;
      res.message = e.what();
      res.t_end = t_next;
      return res;
    }
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > divergence_threshold) {
      res.status = RunStatus::Diverged;
      res.message = "state diverged at t=" + std::to_string(t_next);
      res.t_end = t_next;
      return res;
    }
  }
  res.status = RunStatus::Completed;
  res.t_end = duration;
  return res;
}

SweepResult stability_sweep(const PlantModel& plant, const ReferenceCurve& curve,
                            const ControllerConfig& base,
                            const std::vector<double>& alphas,
                            const std::vector<double>& horizons, double sim_dt,
                            double duration, const Vec& x0,
                            double divergence_threshold) {
  if (alphas.empty() || horizons.empty())
    throw ConfigError("stability_sweep: empty alpha or horizon grid");
  SweepResult out;
  out.cells.reserve(alphas.size() * horizons.size());
  for (double alpha : alphas) {
    for (double T : horizons) {
      ControllerConfig cfg = base;
      cfg.alpha = alpha;
      cfg.predictor.horizon = T;
      SweepCell cell;
      cell.alpha = alpha;
      cell.horizon = T;
      const RunResult r = run_closed_loop(plant, curve, cfg, sim_dt, duration,
                                          x0, divergence_threshold);
      cell.bounded = r.status == RunStatus::Completed;
      if (cell.bounded) {
        double peak = 0.0;
        for (const auto& row : r.trace.rows)
          peak = std::max(peak, row.tracking_error);
        cell.peak_tracking_error = peak;
      } else {
        cell.t_blowup = r.t_end;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

} // namespace nrtrack
