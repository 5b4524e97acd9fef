#include "nrtrack/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nrtrack/errors.hpp"

namespace nrtrack {

namespace {

// Resamples a polyline (last point == first point for closed paths) at
// uniform arc spacing, keeping positions and unit tangents.
struct UniformArcPath {
  double ds = 0.0;
  double total = 0.0;
  std::vector<Vec2> pts;
  std::vector<Vec2> tans;
};

UniformArcPath resample_uniform(const std::vector<Vec2>& poly, double target_ds,
                                std::size_t min_n, std::size_t max_n) {
  std::vector<double> cum(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i)
    cum[i] = cum[i - 1] + (poly[i] - poly[i - 1]).norm();
  const double total = cum.back();
  if (!(total > 0.0)) throw ConfigError("curve polyline has zero length");

  auto n = static_cast<std::size_t>(std::ceil(total / target_ds));
  n = std::clamp(n, min_n, max_n);
  UniformArcPath out;
  out.total = total;
  out.ds = total / static_cast<double>(n);
  out.pts.resize(n + 1);
  out.tans.resize(n + 1);

  std::size_t j = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = std::min(static_cast<double>(i) * out.ds, total);
    while (j + 2 < poly.size() && cum[j + 1] < s) ++j;
    const double seg = cum[j + 1] - cum[j];
    const double a = seg > 0.0 ? (s - cum[j]) / seg : 0.0;
    out.pts[i] = poly[j] + a * (poly[j + 1] - poly[j]);
    Vec2 dir = poly[j + 1] - poly[j];
    const double len = dir.norm();
    out.tans[i] = len > 0.0 ? Vec2(dir / len) : Vec2(1.0, 0.0);
  }
  return out;
}

Vec2 lerp_point(const std::vector<Vec2>& pts, double ds, double s) {
  const double idx = s / ds;
  auto i0 = static_cast<std::size_t>(idx);
  if (i0 + 1 >= pts.size()) return pts.back();
  const double a = idx - static_cast<double>(i0);
  return pts[i0] + a * (pts[i0 + 1] - pts[i0]);
}

Vec2 lerp_tangent(const std::vector<Vec2>& tans, double ds, double s) {
  const double idx = s / ds;
  auto i0 = static_cast<std::size_t>(idx);
  if (i0 + 1 >= tans.size()) return tans.back();
  const double a = idx - static_cast<double>(i0);
  Vec2 t = tans[i0] + a * (tans[i0 + 1] - tans[i0]);
  const double len = t.norm();
  return len > 0.0 ? Vec2(t / len) : tans[i0];
}

void check_in_domain(const CurveDomain& dom, double t) {
  if (dom.periodic) return;
  const double tol = 1e-9 * std::max(1.0, std::abs(dom.t_end));
  if (t < dom.t_begin - tol || t > dom.t_end + tol)
    throw CurveDomainError("curve evaluated at t=" + std::to_string(t) +
                               " outside [" + std::to_string(dom.t_begin) + ", " +
                               std::to_string(dom.t_end) + "]",
                           t);
}

double wrap_into_cycle(double t, double period) {
  double tm = t - std::floor(t / period) * period;
  if (tm >= period) tm -= period;
  if (tm < 0.0) tm = 0.0;
  return tm;
}

} // namespace

Vec2 ReferenceCurve::r_dot(double t) const {
  const CurveDomain dom = domain();
  const double h = fd_step();
  if (dom.periodic) return (eval(t + h) - eval(t - h)) / (2.0 * h);
  const double ta = std::max(t - h, dom.t_begin);
  const double tb = std::min(t + h, dom.t_end);
  return (eval(tb) - eval(ta)) / (tb - ta);
}

double ReferenceCurve::eta_estimate(int samples) const {
  const CurveDomain dom = domain();
  const double lo = dom.periodic ? 0.0 : dom.t_begin;
  const double hi = dom.periodic ? dom.period : dom.t_end;
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(samples - 1);
    best = std::max(best, r_dot(t).norm());
  }
  return best * (1.0 + 1e-12);
}

NearestPointResult nearest_point(const ReferenceCurve& curve, const Vec2& p,
                                 double t_hint, double window, double coarse_dt,
                                 double tol) {
  if (!(window > 0.0) || !(coarse_dt > 0.0) || !(tol > 0.0))
    throw ConfigError("nearest_point: window, coarse_dt and tol must be positive");
  const CurveDomain dom = curve.domain();
  double lo = t_hint - window;
  double hi = t_hint + window;
  bool lo_is_window = true, hi_is_window = true;
  if (!dom.periodic) {
    if (lo < dom.t_begin) {
      lo = dom.t_begin;
      lo_is_window = false;
    }
    if (hi > dom.t_end) {
      hi = dom.t_end;
      hi_is_window = false;
    }
    if (lo > hi) {
      lo = hi = std::clamp(t_hint, dom.t_begin, dom.t_end);
      lo_is_window = hi_is_window = false;
    }
  }

  auto dist2 = [&](double tau) { return (curve.eval(tau) - p).squaredNorm(); };

  double best_t = lo;
  double best_d2 = dist2(lo);
  for (double tau = lo + coarse_dt; tau < hi + 0.5 * coarse_dt; tau += coarse_dt) {
    const double tc = std::min(tau, hi);
    const double d2 = dist2(tc);
    if (d2 < best_d2) {
      best_d2 = d2;
      best_t = tc;
    }
  }

  double a = std::max(lo, best_t - coarse_dt);
  double b = std::min(hi, best_t + coarse_dt);
  constexpr double kGolden = 0.6180339887498949;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = dist2(c), fd = dist2(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = dist2(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = dist2(d);
    }
  }
  NearestPointResult res;
  res.tau = 0.5 * (a + b);
  const double d2_mid = dist2(res.tau);
  if (best_d2 < d2_mid) res.tau = best_t; // keep the coarse argmin on ties
  res.point = curve.eval(res.tau);
  res.distance = (res.point - p).norm();
  res.at_window_edge = (lo_is_window && res.tau - lo < coarse_dt) ||
                       (hi_is_window && hi - res.tau < coarse_dt);
  return res;
}

double advance_to_chord_distance(const ReferenceCurve& curve, const Vec2& q,
                                 double d, double t_start, double window,
                                 double coarse_dt, double tol) {
  if (!(d > 0.0)) throw ConfigError("advance_to_chord_distance: d must be positive");
  if (!(window > 0.0) || !(coarse_dt > 0.0) || !(tol > 0.0))
    throw ConfigError("advance_to_chord_distance: window, coarse_dt and tol must be positive");
  const CurveDomain dom = curve.domain();
  double limit = t_start + window;
  if (!dom.periodic) {
    if (t_start < dom.t_begin) t_start = dom.t_begin;
    limit = std::min(limit, dom.t_end);
  }

  auto residual = [&](double tau) { return (curve.eval(tau) - q).norm() - d; };

  double t_prev = t_start;
  double r_prev = residual(t_start);
  for (double tau = t_start + coarse_dt; tau < limit + 0.5 * coarse_dt;
       tau += coarse_dt) {
    const double tc = std::min(tau, limit);
    const double rc = residual(tc);
    if (r_prev != 0.0 && (rc == 0.0 || (r_prev < 0.0) != (rc < 0.0))) {
      double a = t_prev, b = tc;
      double ra = r_prev;
      while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        const double rm = residual(mid);
        if (rm == 0.0) return mid;
        if ((ra < 0.0) == (rm < 0.0)) {
          a = mid;
          ra = rm;
        } else {
          b = mid;
        }
      }
      return 0.5 * (a + b);
    }
    t_prev = tc;
    r_prev = rc;
    if (tc >= limit) break;
  }
  throw ChordNotFoundError(
      "no chord crossing at distance d=" + std::to_string(d) + " within " +
          std::to_string(window) + "s after t=" + std::to_string(t_start),
      t_start, d);
}

// ---------------------------------------------------------------------------
// Lane change

double lane_change_z2(double z1) {
  const double w1 = 2.4 / 25.0 * (z1 - 27.19) - 1.2;
  const double w2 = 2.4 / 21.95 * (z1 - 56.46) - 1.2;
  return 2.025 * (1.0 + std::tanh(w1)) + 2.85 * (1.0 + std::tanh(w2));
}

LaneChangeCurve::LaneChangeCurve(double speed_mps, double t_end_s)
    : speed_(speed_mps), t_end_(t_end_s) {
  if (!(speed_ > 0.0))
    throw ConfigError("lane change speed must be positive, got " +
                      std::to_string(speed_));
  if (!(t_end_ > 0.0))
    throw ConfigError("lane change t_end must be positive, got " +
                      std::to_string(t_end_));

  const double target_arc = speed_ * t_end_ + 1.0;
  const double dz = 1e-3;
  std::vector<Vec2> poly;
  poly.reserve(static_cast<std::size_t>(target_arc / dz) + 64);
  double z1 = 0.0, arc = 0.0;
  poly.emplace_back(0.0, lane_change_z2(0.0));
  while (arc < target_arc) {
    z1 += dz;
    poly.emplace_back(z1, lane_change_z2(z1));
    arc += (poly.back() - poly[poly.size() - 2]).norm();
  }
  auto table = resample_uniform(poly, 1e-3, 1000, 2000000);
  ds_ = table.ds;
  total_arc_ = table.total;
  points_ = std::move(table.pts);
  tangents_ = std::move(table.tans);
}

Vec2 LaneChangeCurve::eval(double t) const {
  check_in_domain(domain(), t);
  const double s = std::clamp(speed_ * t, 0.0, total_arc_);
  return lerp_point(points_, ds_, s);
}

Vec2 LaneChangeCurve::r_dot(double t) const {
  check_in_domain(domain(), t);
  const double s = std::clamp(speed_ * t, 0.0, total_arc_);
  return speed_ * lerp_tangent(tangents_, ds_, s);
}

CurveDomain LaneChangeCurve::domain() const {
  return {0.0, t_end_, false, 0.0};
}

// ---------------------------------------------------------------------------
// Closed spline

void ClosedSplineCurve::build_geometry(const std::vector<Vec2>& raw) {
  std::vector<Vec2> cps;
  for (const auto& p : raw)
    if (cps.empty() || (p - cps.back()).norm() > 1e-12) cps.push_back(p);
  if (cps.size() >= 2 && (cps.front() - cps.back()).norm() <= 1e-12) cps.pop_back();
  if (cps.size() < 4)
    throw ConfigError("closed spline needs at least 4 distinct control points");

  const auto k = cps.size();
  auto at = [&](std::size_t i) { return cps[i % k]; };

  std::vector<Vec2> poly;
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 p0 = at(i), p1 = at(i + 1);
    const Vec2 m0 = 0.5 * (at(i + 1) - at(i + k - 1));
    const Vec2 m1 = 0.5 * (at(i + 2) - at(i));
    // rough segment length to pick the sampling density
    double rough = 0.0;
    Vec2 prev = p0;
    for (int s = 1; s <= 16; ++s) {
      const double a = s / 16.0;
      const double a2 = a * a, a3 = a2 * a;
      const Vec2 pt = (2 * a3 - 3 * a2 + 1) * p0 + (a3 - 2 * a2 + a) * m0 +
                      (-2 * a3 + 3 * a2) * p1 + (a3 - a2) * m1;
      rough += (pt - prev).norm();
      prev = pt;
    }
    const int subs = std::clamp(static_cast<int>(std::ceil(rough / 5e-4)), 64, 20000);
    const int s0 = (i == 0) ? 0 : 1;
    for (int s = s0; s <= subs; ++s) {
      const double a = static_cast<double>(s) / subs;
      const double a2 = a * a, a3 = a2 * a;
      poly.emplace_back((2 * a3 - 3 * a2 + 1) * p0 + (a3 - 2 * a2 + a) * m0 +
                        (-2 * a3 + 3 * a2) * p1 + (a3 - a2) * m1);
    }
  }
  // closes exactly: the last hermite sample of the final segment is cps[0]

  auto table = resample_uniform(poly, 5e-4, 4096, 500000);
  ds_ = table.ds;
  total_arc_ = table.total;
  points_ = std::move(table.pts);
  tangents_ = std::move(table.tans);
}

ClosedSplineCurve::ClosedSplineCurve(std::vector<Vec2> control_points,
                                     double speed_mps)
    : constant_speed_(speed_mps) {
  if (!(constant_speed_ > 0.0))
    throw ConfigError("spline speed must be positive, got " +
                      std::to_string(constant_speed_));
  build_geometry(control_points);
  period_ = total_arc_ / constant_speed_;
}

ClosedSplineCurve::ClosedSplineCurve(std::vector<Vec2> control_points,
                                     SpeedProfile profile)
    : profile_(std::move(profile)) {
  const auto& ts = profile_.times_s;
  auto& vs = profile_.speeds_mps;
  if (ts.size() < 2 || ts.size() != vs.size())
    throw ConfigError("speed profile needs matching times/speeds lists, >= 2 entries");
  if (ts.front() != 0.0)
    throw ConfigError("speed profile must start at t=0");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (!(ts[i] > ts[i - 1]))
      throw ConfigError("speed profile times must be strictly increasing");
  for (double v : vs)
    if (!(v > 0.0)) throw ConfigError("speed profile speeds must be positive");

  build_geometry(control_points);
  period_ = ts.back();

  // Rescale so one profile cycle covers exactly one lap.
  double raw = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    raw += 0.5 * (vs[i] + vs[i - 1]) * (ts[i] - ts[i - 1]);
  const double scale = total_arc_ / raw;
  for (double& v : vs) v *= scale;

  profile_arc_.assign(ts.size(), 0.0);
  for (std::size_t i = 1; i < ts.size(); ++i)
    profile_arc_[i] = profile_arc_[i - 1] +
                      0.5 * (vs[i] + vs[i - 1]) * (ts[i] - ts[i - 1]);
  profile_arc_.back() = total_arc_;
}

double ClosedSplineCurve::speed_at(double t) const {
  if (constant_speed_ > 0.0) return constant_speed_;
  const double tm = wrap_into_cycle(t, period_);
  const auto& ts = profile_.times_s;
  const auto& vs = profile_.speeds_mps;
  auto it = std::upper_bound(ts.begin(), ts.end(), tm);
  auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, std::distance(ts.begin(), it) - 1));
  if (j + 1 >= ts.size()) return vs.back();
  const double a = (tm - ts[j]) / (ts[j + 1] - ts[j]);
  return vs[j] + a * (vs[j + 1] - vs[j]);
}

double ClosedSplineCurve::arc_at(double t) const {
  const double tm = wrap_into_cycle(t, period_);
  if (constant_speed_ > 0.0) return constant_speed_ * tm;
  const auto& ts = profile_.times_s;
  const auto& vs = profile_.speeds_mps;
  auto it = std::upper_bound(ts.begin(), ts.end(), tm);
  auto j = static_cast<std::size_t>(std::max<std::ptrdiff_t>(
      0, std::distance(ts.begin(), it) - 1));
  if (j + 1 >= ts.size()) return profile_arc_.back();
  const double dt = ts[j + 1] - ts[j];
  const double delta = tm - ts[j];
  const double slope = (vs[j + 1] - vs[j]) / dt;
  return profile_arc_[j] + vs[j] * delta + 0.5 * slope * delta * delta;
}

Vec2 ClosedSplineCurve::point_at_arc(double s) const {
  s -= std::floor(s / total_arc_) * total_arc_;
  return lerp_point(points_, ds_, s);
}

Vec2 ClosedSplineCurve::tangent_at_arc(double s) const {
  s -= std::floor(s / total_arc_) * total_arc_;
  return lerp_tangent(tangents_, ds_, s);
}

Vec2 ClosedSplineCurve::eval(double t) const { return point_at_arc(arc_at(t)); }

Vec2 ClosedSplineCurve::r_dot(double t) const {
  return speed_at(t) * tangent_at_arc(arc_at(t));
}

CurveDomain ClosedSplineCurve::domain() const {
  return {0.0, period_, true, period_};
}

std::vector<Vec2> stadium_control_points(double extent_x, double extent_y,
                                         int points_per_arc) {
  if (!(extent_y > 0.0) || extent_x < extent_y)
    throw ConfigError("stadium extents need extent_x >= extent_y > 0");
  if (points_per_arc < 2) throw ConfigError("stadium needs points_per_arc >= 2");
  const double r = 0.5 * extent_y;
  const double a = 0.5 * (extent_x - extent_y);
  std::vector<Vec2> pts;
  if (a > 1e-12) {
    pts.emplace_back(0.0, -r);
    pts.emplace_back(a, -r);
    for (int k = 1; k < points_per_arc; ++k) {
      const double th = -M_PI_2 + M_PI * k / points_per_arc;
      pts.emplace_back(a + r * std::cos(th), r * std::sin(th));
    }
    pts.emplace_back(a, r);
    pts.emplace_back(0.0, r);
    pts.emplace_back(-a, r);
    for (int k = 1; k < points_per_arc; ++k) {
      const double th = M_PI_2 + M_PI * k / points_per_arc;
      pts.emplace_back(-a + r * std::cos(th), r * std::sin(th));
    }
    pts.emplace_back(-a, -r);
  } else {
    const int n = 2 * points_per_arc;
    for (int k = 0; k < n; ++k) {
      const double th = -M_PI_2 + 2.0 * M_PI * k / n;
      pts.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  return pts;
}

AnalyticCurve::AnalyticCurve(std::function<Vec2(double)> eval_fn, CurveDomain dom,
                             std::function<Vec2(double)> r_dot_fn)
    : eval_fn_(std::move(eval_fn)), r_dot_fn_(std::move(r_dot_fn)), domain_(dom) {
  if (!eval_fn_) throw ConfigError("analytic curve needs an eval function");
}

Vec2 AnalyticCurve::eval(double t) const {
  check_in_domain(domain_, t);
  return eval_fn_(t);
}

Vec2 AnalyticCurve::r_dot(double t) const {
  if (r_dot_fn_) return r_dot_fn_(t);
  return ReferenceCurve::r_dot(t);
}

CurveDomain AnalyticCurve::domain() const { return domain_; }

} // namespace nrtrack
