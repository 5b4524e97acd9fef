#pragma once

#include <string>
#include <vector>

#include "nrtrack/controller.hpp"
#include "nrtrack/plants.hpp"
#include "nrtrack/reference.hpp"

namespace nrtrack {

struct PlatoonConfig {
  int n_robots = 4;
  double spacing_d = 0.25;     // chord distance between consecutive targets
  double point_offset_l = 0.08; // kinematic point offset ahead of the axle
  double gamma = 0.0455;        // time scaling of the leader's reference
  double alpha = 45.0;
  double horizon = 0.6;         // lookahead T
  double dt = 0.033;            // control update and integration step
  double back_off_chords = 1.5; // see follower_reference

  void validate() const;
};

/// Leader target: r(gamma (t + T)).
Vec2 leader_reference(const ReferenceCurve& curve, double t, double T,
                      double gamma);

/// Horizon-ahead position of a kinematic point moving at constant u.
Vec2 predicted_point(const Vec2& p, const Vec2& u, double T);

struct FollowerRef {
  Vec2 rho{0.0, 0.0}; // follower target on the curve
  double tau = 0.0;   // curve parameter of rho
  double q_tau = 0.0; // curve parameter of the predecessor's projection
  Vec2 q{0.0, 0.0};   // the projection point itself
  bool order_violation = false; // rho not behind q in arc order
};

/// Follower target from the predecessor's predicted point alone: project
/// p_tilde_prev onto the curve (q), then take the first crossing of
/// ||r(tau) - q|| = d marching forward from just behind q. The march starts
/// back_off_chords * d of path behind the projection so that the first
/// crossing is the trailing one; the returned order_violation flags the cases
/// where it is not (degenerate configurations). Throws ChordNotFoundError
/// when no crossing exists (e.g. d larger than the curve diameter).
FollowerRef follower_reference(const ReferenceCurve& curve,
                               const Vec2& p_tilde_prev, double d,
                               double q_hint, double back_off_chords = 1.5);

struct PlatoonRobotRow {
  double t = 0.0;
  UnicycleState pose;
  Vec2 p{0.0, 0.0};   // kinematic point at t
  Vec2 u{0.0, 0.0};   // point velocity command applied on [t, t+dt)
  Vec2 rho{0.0, 0.0}; // target for t + T
  double control_error = 0.0; // ||rho - (p + T u)|| before the u update
  double ref_tau = 0.0;       // curve parameter of rho
  double q_tau = 0.0;         // predecessor projection parameter (followers)
};

struct PlatoonResult {
  std::vector<std::vector<PlatoonRobotRow>> robots; // [robot][row]
  std::vector<double> times;
  std::vector<std::vector<double>> spacings; // [row][i] = ||p_{i+1} - p_i||
  long fallback_events = 0;                  // chord search failed, target held
  long order_violations = 0;
  RunStatus status = RunStatus::Completed;
  std::string message;
  double t_end = 0.0;
};

/// Sampled platoon loop at step dt. Per step, in robot order: targets rho_i
/// (leader from the time-scaled curve, followers from the predecessor's
/// same-step predicted point), then the closed-form point-tracking update
///   u_i <- u_i + dt (alpha/T) (rho_i - p_i - T u_i),
/// then all robots integrate one unicycle Euler step with (v, omega) from
/// point_to_unicycle and recompute p_i. Robots start on the curve, spaced
/// about d apart behind the leader with tangent headings and u = 0.
PlatoonResult run_platoon(const ReferenceCurve& curve, const PlatoonConfig& cfg,
                          double duration);

} // namespace nrtrack
