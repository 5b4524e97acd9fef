#pragma once

#include <functional>

#include "nrtrack/types.hpp"

namespace nrtrack {

enum class StepMethod { ForwardEuler, RK4 };

struct StepConfig {
  double dt = 1e-3;
  StepMethod method = StepMethod::ForwardEuler;
};

/// Time-dependent vector field; writes dx/dt into `dxdt` (preallocated to x.size()).
using OdeField = std::function<void(const Vec& x, double t, Vec& dxdt)>;

/// Fixed-step integrator with preallocated stage buffers. Derivatives are
/// checked for finiteness at every stage; a non-finite component throws
/// IntegrationError carrying the time and component index.
class Stepper {
public:
  explicit Stepper(StepConfig cfg);

  /// One step of size dt (overriding cfg.dt when dt > 0), x(t) -> x(t+dt), in place.
  void step_inplace(const OdeField& f, Vec& x, double t, double dt);

  const StepConfig& config() const { return cfg_; }

private:
  StepConfig cfg_;
  Vec k1_, k2_, k3_, k4_, tmp_;
};

/// Single step x(t) -> x(t + cfg.dt).
Vec step(const OdeField& f, const Vec& x, double t, const StepConfig& cfg);

/// Integrates over [t0, t1] in fixed steps of cfg.dt. When the interval is not
/// an integer multiple of dt the final step is shortened to land exactly on t1.
Vec integrate(const OdeField& f, const Vec& x0, double t0, double t1,
              const StepConfig& cfg);

} // namespace nrtrack
