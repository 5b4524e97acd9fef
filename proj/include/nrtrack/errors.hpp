#pragma once

#include <stdexcept>
#include <string>

#include "nrtrack/types.hpp"

namespace nrtrack {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad configuration or scenario value; message names the offending key.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Non-finite derivative during integration.
class IntegrationError : public Error {
public:
  IntegrationError(const std::string& what, double t, int component)
      : Error(what), t(t), component(component) {}
  double t;
  int component;
};

/// Longitudinal speed fell below the model's validity floor.
class LowSpeedError : public Error {
public:
  LowSpeedError(const std::string& what, double v_l) : Error(what), v_l(v_l) {}
  double v_l;
};

/// Curve evaluated outside its domain.
class CurveDomainError : public Error {
public:
  CurveDomainError(const std::string& what, double t) : Error(what), t(t) {}
  double t;
};

/// Chord search ran out of window without a crossing.
class ChordNotFoundError : public Error {
public:
  ChordNotFoundError(const std::string& what, double t_start, double d)
      : Error(what), t_start(t_start), d(d) {}
  double t_start;
  double d;
};

/// Predicted output Jacobian was numerically singular under the Fail policy.
class SingularJacobianError : public Error {
public:
  SingularJacobianError(const std::string& what, double t, Mat jac)
      : Error(what), t(t), jac(std::move(jac)) {}
  double t;
  Mat jac;
};

} // namespace nrtrack
