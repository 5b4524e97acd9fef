#include "nrtrack/predictor.hpp"

#include <string>

#include "nrtrack/errors.hpp"

namespace nrtrack {

void PredictorConfig::validate() const {
  if (!(horizon > 0.0))
    throw ConfigError("predictor horizon must be positive, got " +
                      std::to_string(horizon));
  if (!(dt > 0.0) || dt > horizon * (1.0 + 1e-12))
    throw ConfigError("predictor dt must satisfy 0 < dt <= horizon, got dt=" +
                      std::to_string(dt) + ", horizon=" + std::to_string(horizon));
}

Vec predict(const PlantModel& plant, const Vec& x, const Vec& u,
            const PredictorConfig& cfg) {
  cfg.validate();
  OdeField field = [&](const Vec& xi, double, Vec& out) { plant.f(xi, u, out); };
  Vec x_end = integrate(field, x, 0.0, cfg.horizon, {cfg.dt, cfg.method});
  return plant.h(x_end);
}

Prediction predict_with_jacobian(const PlantModel& plant, const Vec& x,
                                 const Vec& u, const PredictorConfig& cfg) {
  cfg.validate();
  const int n = plant.state_dim();
  const int m = plant.input_dim();

  // Combined state [xi; vec(S)], integrated on one grid.
  Vec z(n + n * m);
  z.head(n) = x;
  z.tail(n * m).setZero();

  Vec xi(n), xd(n);
  Mat A(n, n), B(n, m);
  OdeField field = [&](const Vec& zc, double, Vec& out) {
    xi = zc.head(n);
    plant.f(xi, u, xd);
    out.head(n) = xd;
    plant.df_dx(xi, u, A);
    plant.df_du(xi, u, B);
    Eigen::Map<const Mat> S(zc.data() + n, n, m);
    Eigen::Map<Mat> Sd(out.data() + n, n, m);
    Sd.noalias() = A * S;
    Sd += B;
  };
  z = integrate(field, z, 0.0, cfg.horizon, {cfg.dt, cfg.method});

  Prediction pred;
  pred.x_end = z.head(n);
  pred.y_pred = plant.h(pred.x_end);
  Eigen::Map<const Mat> S_end(z.data() + n, n, m);
  pred.jac.noalias() = plant.dh_dx(pred.x_end) * S_end;
  return pred;
}

Mat fd_jacobian(const PlantModel& plant, const Vec& x, const Vec& u,
                const PredictorConfig& cfg, double h_rel) {
  cfg.validate();
  const int m = plant.input_dim();
  Mat out(m, m);
  Vec up = u, um = u;
  for (int j = 0; j < m; ++j) {
    const double hj = h_rel * std::max(1.0, std::abs(u[j]));
    up[j] = u[j] + hj;
    um[j] = u[j] - hj;
    out.col(j) = (predict(plant, x, up, cfg) - predict(plant, x, um, cfg)) /
                 (2.0 * hj);
    up[j] = u[j];
    um[j] = u[j];
  }
  return out;
}

} // namespace nrtrack
