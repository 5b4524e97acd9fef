#pragma once

#include "nrtrack/odeint.hpp"
#include "nrtrack/plants.hpp"
#include "nrtrack/types.hpp"

namespace nrtrack {

struct PredictorConfig {
  double horizon = 0.5; // lookahead T, seconds
  double dt = 1e-3;     // internal integration step
  StepMethod method = StepMethod::ForwardEuler;

  void validate() const; // requires 0 < dt <= horizon
};

struct Prediction {
  Vec y_pred;  // h(xi(T)): predicted output at the end of the horizon
  Mat jac;     // d y_pred / d u, m x m
  Vec x_end;   // xi(T)
};

/// Predicted output after holding u constant for the horizon:
/// integrates xi' = f(xi, u) from xi(0) = x and returns h(xi(T)).
Vec predict(const PlantModel& plant, const Vec& x, const Vec& u,
            const PredictorConfig& cfg);

/// Prediction plus its control sensitivity. The state and the sensitivity
/// matrix S = d xi / d u are integrated together on one grid,
///   S' = df_dx(xi, u) S + df_du(xi, u),  S(0) = 0,
/// so the returned jac = dh_dx(xi(T)) S(T) is the exact derivative of the
/// discretized predict() for the Euler method.
Prediction predict_with_jacobian(const PlantModel& plant, const Vec& x,
                                 const Vec& u, const PredictorConfig& cfg);

/// Central-difference oracle for the prediction Jacobian,
/// column j = (predict(u + h e_j) - predict(u - h e_j)) / 2h,
/// h = h_rel * max(1, |u_j|).
Mat fd_jacobian(const PlantModel& plant, const Vec& x, const Vec& u,
                const PredictorConfig& cfg, double h_rel = 1e-6);

} // namespace nrtrack
