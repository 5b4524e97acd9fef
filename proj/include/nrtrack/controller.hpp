#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nrtrack/predictor.hpp"
#include "nrtrack/reference.hpp"

namespace nrtrack {

enum class SingularPolicy { Fail, Damped };

struct ControllerConfig {
  double alpha = 1.0;        // flow speedup gain
  PredictorConfig predictor; // lookahead horizon and internal step
  double controller_dt = 0.01;
  Vec u_init;                // empty -> zeros
  SingularPolicy singular_policy = SingularPolicy::Fail;
  double damped_lambda = -1.0; // < 0: auto, 1e-6 * trace(J^T J)/m

  void validate() const;
};

/// One Euler step of the tracking flow
///   u <- u + controller_dt * alpha * J^{-1} (r_future - y_pred).
/// A numerically singular J either throws SingularJacobianError (Fail) or
/// switches to the damped normal equations (J^T J + lambda I) du = J^T e
/// (Damped); `singular_events`, when given, counts the damped solves.
Vec control_step(const Vec& u, const Prediction& pred, const Vec& r_future,
                 const ControllerConfig& cfg, double t = 0.0,
                 long* singular_events = nullptr);

/// Same flow for a memoryless map y = g(u): one Euler step of
/// u' = alpha * (dg/du)^{-1} (r - g(u)).
Vec memoryless_step(const Vec& u, const std::function<Vec(const Vec&)>& g,
                    const std::function<Mat(const Vec&)>& dg_du, const Vec& r,
                    double alpha, double dt,
                    SingularPolicy policy = SingularPolicy::Fail,
                    double damped_lambda = -1.0);

/// 0.5 * ||r - g||^2.
double lyapunov_value(const Vec& r, const Vec& g_val);

struct SimRow {
  double t = 0.0;
  Vec x;              // plant state at t
  Vec u;              // control applied on [t, t + sim_dt)
  Vec y;              // h(x)
  Vec r_now;          // r(t)
  Vec r_future;       // r(t + T)
  double control_error = 0.0;  // ||r(t+T) - y_pred|| before the u update
  double tracking_error = 0.0; // ||r(t) - y||
  double lateral_error = 0.0;  // distance to the nearest curve point
  double heading_error = 0.0;  // rad, signed, vs the tangent at that point
  double jac_det = 0.0;
  double nearest_tau = 0.0;
  bool nearest_at_window_edge = false;
};

struct SimTrace {
  std::vector<SimRow> rows;
};

enum class RunStatus { Completed, Diverged, Aborted };

struct RunResult {
  SimTrace trace;
  RunStatus status = RunStatus::Completed;
  std::string message;  // abort/divergence reason
  double t_end = 0.0;   // duration when Completed, else time of failure
  long singular_events = 0;
  long window_escapes = 0;
};

/// Error metrics for one instant. `nearest_hint`/`nearest_window` seed the
/// windowed projection search (callers pass the previous row's tau).
SimRow metrics_row(const PlantModel& plant, const ReferenceCurve& curve,
                   double t, const Vec& x, const Vec& u, const Prediction& pred,
                   const Vec& r_future, double nearest_hint,
                   double nearest_window = 5.0);

/// Sampled-data tracking loop. Per step: predict at (x, u), one control_step
/// toward r(t + T) with controller_dt = sim_dt, then integrate the plant over
/// sim_dt holding the updated u (forward Euler). Rows are recorded at every
/// t = k sim_dt with the state at t and the control applied on [t, t+dt).
/// Aborts with the partial trace on plant/controller errors; classifies as
/// Diverged when any state or control component exceeds divergence_threshold
/// or goes non-finite.
RunResult run_closed_loop(const PlantModel& plant, const ReferenceCurve& curve,
                          const ControllerConfig& cfg, double sim_dt,
                          double duration, const Vec& x0,
                          double divergence_threshold = 1e6);

struct SweepCell {
  double alpha = 0.0;
  double horizon = 0.0;
  bool bounded = false;
  double peak_tracking_error = 0.0; // over the full run, Bounded cells
  double t_blowup = 0.0;            // Diverged cells
};

struct SweepResult {
  std::vector<SweepCell> cells; // row-major over alphas x horizons
};

/// Runs the closed loop over the (alpha, horizon) grid and classifies each
/// cell as Bounded (run completed) or Diverged.
SweepResult stability_sweep(const PlantModel& plant, const ReferenceCurve& curve,
                            const ControllerConfig& base,
                            const std::vector<double>& alphas,
                            const std::vector<double>& horizons, double sim_dt,
                            double duration, const Vec& x0,
                            double divergence_threshold = 1e6);

} // namespace nrtrack
