#include "nrtrack/odeint.hpp"

#include <cmath>
#include <string>

#include "nrtrack/errors.hpp"

namespace nrtrack {

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * M_PI);
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

bool all_finite(const Vec& v) {
  return v.allFinite();
}

int first_nonfinite(const Vec& v) {
  for (int i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i])) return i;
  return -1;
}

namespace {

void check_derivative(const Vec& dxdt, double t) {
  if (dxdt.allFinite()) return;
  int idx = first_nonfinite(dxdt);
  throw IntegrationError(
      "non-finite derivative at t=" + std::to_string(t) + ", component " +
          std::to_string(idx),
      t, idx);
}

} // namespace

Stepper::Stepper(StepConfig cfg) : cfg_(cfg) {
  if (!(cfg_.dt > 0.0))
    throw ConfigError("step size dt must be positive, got " +
                      std::to_string(cfg_.dt));
}

void Stepper::step_inplace(const OdeField& f, Vec& x, double t, double dt) {
  if (dt <= 0.0) dt = cfg_.dt;
  const auto n = x.size();
  if (k1_.size() != n) {
    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
  }
  switch (cfg_.method) {
    case StepMethod::ForwardEuler:
      f(x, t, k1_);
      check_derivative(k1_, t);
      x += dt * k1_;
      break;
    case StepMethod::RK4:
      f(x, t, k1_);
      check_derivative(k1_, t);
      tmp_ = x + (0.5 * dt) * k1_;
      f(tmp_, t + 0.5 * dt, k2_);
      check_derivative(k2_, t + 0.5 * dt);
      tmp_ = x + (0.5 * dt) * k2_;
      f(tmp_, t + 0.5 * dt, k3_);
      check_derivative(k3_, t + 0.5 * dt);
      tmp_ = x + dt * k3_;
      f(tmp_, t + dt, k4_);
      check_derivative(k4_, t + dt);
      x += (dt / 6.0) * (k1_ + 2.0 * k2_ + 2.0 * k3_ + k4_);
      break;
  }
}

Vec step(const OdeField& f, const Vec& x, double t, const StepConfig& cfg) {
  Stepper s(cfg);
  Vec out = x;
  s.step_inplace(f, out, t, cfg.dt);
  return out;
}

// Splits [t0, t1] into n full steps plus an optional shortened tail. The step
// count snaps to the nearest integer when the quotient is within 1e-9 of it,
// so intervals meant as exact multiples of dt do not gain a stray tail step.
Vec integrate(const OdeField& f, const Vec& x0, double t0, double t1,
              const StepConfig& cfg) {
  Stepper s(cfg);
  if (t1 < t0)
    throw ConfigError("integrate: t1 < t0");
  const double span = t1 - t0;
  double q = span / cfg.dt;
  auto n = static_cast<long>(std::floor(q));
  if (std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::round(q)))
    n = static_cast<long>(std::round(q));
  Vec x = x0;
  for (long k = 0; k < n; ++k)
    s.step_inplace(f, x, t0 + static_cast<double>(k) * cfg.dt, cfg.dt);
  const double rem = span - static_cast<double>(n) * cfg.dt;
  if (rem > 1e-12 * std::max(1.0, span))
    s.step_inplace(f, x, t0 + static_cast<double>(n) * cfg.dt, rem);
  return x;
}

} // namespace nrtrack
