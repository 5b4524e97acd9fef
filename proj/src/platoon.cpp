#include "nrtrack/platoon.hpp"

#include <cmath>
#include <string>

#include "nrtrack/errors.hpp"
#include "nrtrack/odeint.hpp"

namespace nrtrack {

void PlatoonConfig::validate() const {
  if (n_robots < 1)
    throw ConfigError("platoon needs n_robots >= 1, got " +
                      std::to_string(n_robots));
  if (!(spacing_d > 0.0))
    throw ConfigError("spacing_d must be positive, got " +
                      std::to_string(spacing_d));
  if (!(point_offset_l > 0.0) || point_offset_l >= 0.5 * spacing_d)
    throw ConfigError("point_offset_l must satisfy 0 < l < d/2, got l=" +
                      std::to_string(point_offset_l) + ", d=" +
                      std::to_string(spacing_d));
  if (!(gamma > 0.0))
    throw ConfigError("gamma must be positive, got " + std::to_string(gamma));
  if (!(alpha > 0.0))
    throw ConfigError("alpha must be positive, got " + std::to_string(alpha));
  if (!(horizon > 0.0))
    throw ConfigError("horizon must be positive, got " + std::to_string(horizon));
  if (!(dt > 0.0))
    throw ConfigError("dt must be positive, got " + std::to_string(dt));
  if (!(back_off_chords > 1.0))
    throw ConfigError("back_off_chords must exceed 1, got " +
                      std::to_string(back_off_chords));
}

Vec2 leader_reference(const ReferenceCurve& curve, double t, double T,
                      double gamma) {
  return curve.eval(gamma * (t + T));
}

Vec2 predicted_point(const Vec2& p, const Vec2& u, double T) {
  return p + T * u;
}

namespace {

// True when tau lies behind ref_tau in traversal order (within half a period
// for periodic curves).
bool is_behind(const CurveDomain& dom, double tau, double ref_tau) {
  if (!dom.periodic) return tau < ref_tau;
  double delta = ref_tau - tau;
  delta -= std::floor(delta / dom.period) * dom.period;
  return delta > 0.0 && delta < 0.5 * dom.period;
}

} // namespace

FollowerRef follower_reference(const ReferenceCurve& curve,
                               const Vec2& p_tilde_prev, double d,
                               double q_hint, double back_off_chords) {
  const auto np = nearest_point(curve, p_tilde_prev, q_hint);
  const double speed = curve.r_dot(np.tau).norm();
  if (!(speed > 1e-12))
    throw ConfigError("follower_reference: curve speed vanishes at tau=" +
                      std::to_string(np.tau));
  const double t_start = np.tau - back_off_chords * d / speed;
  FollowerRef ref;
  ref.q_tau = np.tau;
  ref.q = np.point;
  ref.tau = advance_to_chord_distance(curve, np.point, d, t_start);
  ref.rho = curve.eval(ref.tau);
  ref.order_violation = !is_behind(curve.domain(), ref.tau, np.tau);
  return ref;
}

PlatoonResult run_platoon(const ReferenceCurve& curve, const PlatoonConfig& cfg,
                          double duration) {
  cfg.validate();
  if (!(duration > 0.0))
    throw ConfigError("duration must be positive, got " +
                      std::to_string(duration));

  const int n = cfg.n_robots;
  const double T = cfg.horizon;
  const double d = cfg.spacing_d;
  const double l = cfg.point_offset_l;
  const CurveDomain dom = curve.domain();

  // Start on the curve: leader's kinematic point at parameter 0, each
  // follower about one chord length further back, headings tangent.
  std::vector<UnicycleState> pose(n);
  std::vector<Vec2> p(n), u(n, Vec2::Zero()), rho(n, Vec2::Zero());
  std::vector<double> ref_tau(n, 0.0), q_hint(n, 0.0);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!dom.periodic) s = std::max(s, dom.t_begin);
    const Vec2 pt = curve.eval(s);
    const Vec2 tang = curve.r_dot(s);
    const double psi = std::atan2(tang[1], tang[0]);
    p[i] = pt;
    pose[i] = {pt[0] - l * std::cos(psi), pt[1] - l * std::sin(psi), psi};
    ref_tau[i] = s;
    q_hint[i] = s; // next step's predecessor projection lands near here
    const double speed = std::max(tang.norm(), 1e-12);
    s -= d / speed;
  }
  for (int i = 1; i < n; ++i) q_hint[i] = ref_tau[i - 1];

  const double q_steps = duration / cfg.dt;
  auto n_full = static_cast<long>(std::floor(q_steps));
  if (std::abs(q_steps - std::round(q_steps)) <
      1e-9 * std::max(1.0, std::round(q_steps)))
    n_full = static_cast<long>(std::round(q_steps));
  const double tail = duration - static_cast<double>(n_full) * cfg.dt;
  const bool has_tail = tail > 1e-12 * std::max(1.0, duration);
  const long n_rows = n_full + (has_tail ? 1 : 0);

  PlatoonResult res;
  res.robots.assign(static_cast<std::size_t>(n), {});
  Stepper stepper({cfg.dt, StepMethod::ForwardEuler});

  for (long k = 0;; ++k) {
    const double t = (has_tail && k == n_rows)
                         ? duration
                         : static_cast<double>(k) * cfg.dt;
    // Targets and control updates, in robot order. Followers read the
    // predecessor's position at t and its control updated this same step.
    for (int i = 0; i < n; ++i) {
      PlatoonRobotRow row;
      row.t = t;
      row.pose = pose[i];
      row.p = p[i];
      try {
        if (i == 0) {
          rho[0] = leader_reference(curve, t, T, cfg.gamma);
          ref_tau[0] = cfg.gamma * (t + T);
          row.q_tau = ref_tau[0];
        } else {
          const Vec2 p_tilde = predicted_point(p[i - 1], u[i - 1], T);
          const FollowerRef fr =
              follower_reference(curve, p_tilde, d, q_hint[i], cfg.back_off_chords);
          rho[i] = fr.rho;
          ref_tau[i] = fr.tau;
          q_hint[i] = fr.q_tau;
          row.q_tau = fr.q_tau;
          if (fr.order_violation) ++res.order_violations;
        }
      } catch (const ChordNotFoundError&) {
        ++res.fallback_events; // hold the previous target
      } catch (const Error& e) {
        res.status = RunStatus::Aborted;
        res.message = e.what();
        res.t_end = t;
        return res;
      }
      const Vec2 resid = rho[i] - p[i] - T * u[i];
      row.control_error = resid.norm();
      u[i] += (cfg.dt * cfg.alpha / T) * resid;
      if (!u[i].allFinite()) {
        res.status = RunStatus::Diverged;
        res.message = "control diverged at t=" + std::to_string(t) +
                      " (robot " + std::to_string(i + 1) + ")";
        res.t_end = t;
        return res;
      }
      row.u = u[i];
      row.rho = rho[i];
      row.ref_tau = ref_tau[i];
      res.robots[static_cast<std::size_t>(i)].push_back(row);
    }
    res.times.push_back(t);
    std::vector<double> gaps(static_cast<std::size_t>(n > 1 ? n - 1 : 0));
    for (int i = 1; i < n; ++i) gaps[static_cast<std::size_t>(i - 1)] = (p[i] - p[i - 1]).norm();
    res.spacings.push_back(std::move(gaps));

    if (k == n_rows) break;
    const double dt_k = (has_tail && k == n_rows - 1) ? tail : cfg.dt;
    for (int i = 0; i < n; ++i) {
      const auto [v, omega] = point_to_unicycle(pose[i].psi, l, u[i]);
      Vec z(3);
      z << pose[i].z1, pose[i].z2, pose[i].psi;
      OdeField field = [&](const Vec& zs, double, Vec& out) {
        out[0] = v * std::cos(zs[2]);
        out[1] = v * std::sin(zs[2]);
        out[2] = omega;
      };
      stepper.step_inplace(field, z, t, dt_k);
      if (!z.allFinite()) {
        res.status = RunStatus::Diverged;
        res.message = "pose diverged at t=" + std::to_string(t + dt_k) +
                      " (robot " + std::to_string(i + 1) + ")";
        res.t_end = t + dt_k;
        return res;
      }
      pose[i] = {z[0], z[1], z[2]};
      p[i] = kinematic_point_of(pose[i], l);
    }
  }
  res.status = RunStatus::Completed;
  res.t_end = duration;
  return res;
}

} // namespace nrtrack
