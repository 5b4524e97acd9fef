#pragma once

#include <functional>
#include <vector>

#include "nrtrack/types.hpp"

namespace nrtrack {

struct CurveDomain {
  double t_begin = 0.0;
  double t_end = 0.0;
  bool periodic = false;
  double period = 0.0;
};

/// Planar reference trajectory r(t).
class ReferenceCurve {
public:
  virtual ~ReferenceCurve() = default;

  /// Position at time t. Throws CurveDomainError outside the domain
  /// (periodic curves accept any t).
  virtual Vec2 eval(double t) const = 0;

  /// Velocity dr/dt. Default is a central difference with step fd_step();
  /// table-backed curves override with tangent * speed.
  virtual Vec2 r_dot(double t) const;

  virtual CurveDomain domain() const = 0;

  /// Upper envelope of ||r_dot|| from dense sampling (one period for periodic
  /// curves, the whole domain otherwise).
  double eta_estimate(int samples = 20001) const;

  double fd_step() const { return fd_step_; }
  void set_fd_step(double h) { fd_step_ = h; }

private:
  double fd_step_ = 1e-6;
};

struct NearestPointResult {
  double tau = 0.0;
  Vec2 point{0.0, 0.0};
  double distance = 0.0;
  bool at_window_edge = false; // argmin pinned to the search window boundary
};

/// Nearest curve point to p among tau in [t_hint - window, t_hint + window]
/// (clipped to the domain for non-periodic curves): coarse grid scan followed
/// by golden-section refinement down to `tol` seconds. Ties go to the
/// smallest tau.
NearestPointResult nearest_point(const ReferenceCurve& curve, const Vec2& p,
                                 double t_hint, double window = 5.0,
                                 double coarse_dt = 1e-3, double tol = 1e-6);

/// Smallest tau > t_start with ||r(tau) - q|| = d, found by marching forward
/// in coarse_dt steps until the signed distance-to-d changes sign, then
/// bisecting to `tol` seconds. Throws ChordNotFoundError when no crossing
/// occurs within `window` seconds of t_start.
double advance_to_chord_distance(const ReferenceCurve& curve, const Vec2& q,
                                 double d, double t_start, double window = 10.0,
                                 double coarse_dt = 1e-3, double tol = 1e-6);

/// Lane-change lateral profile
///   z2(z1) = 2.025 (1 + tanh(w1)) + 2.85 (1 + tanh(w2))
///   w1 = 2.4/25    (z1 - 27.19) - 1.2
///   w2 = 2.4/21.95 (z1 - 56.46) - 1.2
double lane_change_z2(double z1);

/// Double lane change traversed at constant path speed, starting at z1 = 0.
/// The time parameterization is arc length / speed, so ||r_dot|| == speed.
class LaneChangeCurve : public ReferenceCurve {
public:
  LaneChangeCurve(double speed_mps, double t_end_s);

  Vec2 eval(double t) const override;
  Vec2 r_dot(double t) const override;
  CurveDomain domain() const override;

  double speed() const { return speed_; }

private:
  double speed_;
  double t_end_;
  double total_arc_ = 0.0;
  double ds_ = 0.0;                 // uniform arc spacing of the tables
  std::vector<Vec2> points_;        // position at arc s = i * ds_
  std::vector<Vec2> tangents_;      // unit tangent at arc s = i * ds_
};

/// Piecewise-linear speed profile v(t) over one cycle [0, times.back()].
struct SpeedProfile {
  std::vector<double> times_s;
  std::vector<double> speeds_mps;
};

/// Closed C1 cubic spline (periodic Catmull-Rom) through the given control
/// points, traversed either at constant speed or following a periodic
/// piecewise-linear speed profile. With a profile the speeds are rescaled so
/// one profile cycle covers exactly one lap, which keeps r periodic with the
/// profile period.
class ClosedSplineCurve : public ReferenceCurve {
public:
  ClosedSplineCurve(std::vector<Vec2> control_points, double speed_mps);
  ClosedSplineCurve(std::vector<Vec2> control_points, SpeedProfile profile);

  Vec2 eval(double t) const override;
  Vec2 r_dot(double t) const override;
  CurveDomain domain() const override;

  double total_length() const { return total_arc_; }

private:
  void build_geometry(const std::vector<Vec2>& control_points);
  double arc_at(double t) const;   // cumulative arc, not yet wrapped to a lap
  double speed_at(double t) const;
  Vec2 point_at_arc(double s) const;
  Vec2 tangent_at_arc(double s) const;

  double period_ = 0.0;
  double constant_speed_ = 0.0;    // > 0 when no profile
  SpeedProfile profile_;           // cycle-normalized when present
  std::vector<double> profile_arc_; // cumulative arc at profile breakpoints
  double total_arc_ = 0.0;
  double ds_ = 0.0;
  std::vector<Vec2> points_;
  std::vector<Vec2> tangents_;
};

/// Control points of a stadium outline (two straights joined by semicircles),
/// counterclockwise, starting at the bottom middle heading +x. extent_x and
/// extent_y are the overall width and height, extent_x >= extent_y.
std::vector<Vec2> stadium_control_points(double extent_x, double extent_y,
                                         int points_per_arc = 6);

/// Function-backed curve for tests and synthetic references.
class AnalyticCurve : public ReferenceCurve {
public:
  AnalyticCurve(std::function<Vec2(double)> eval_fn, CurveDomain dom,
                std::function<Vec2(double)> r_dot_fn = nullptr);

  Vec2 eval(double t) const override;
  Vec2 r_dot(double t) const override;
  CurveDomain domain() const override;

private:
  std::function<Vec2(double)> eval_fn_;
  std::function<Vec2(double)> r_dot_fn_;
  CurveDomain domain_;
};

} // namespace nrtrack
