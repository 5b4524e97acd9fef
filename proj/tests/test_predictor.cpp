#include <cmath>
#include <random>

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "nrtrack/errors.hpp"
#include "nrtrack/plants.hpp"
#include "nrtrack/predictor.hpp"

using namespace nrtrack;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec6(double a, double b, double c, double d, double e, double f) {
  Vec v(6);
  v << a, b, c, d, e, f;
  return v;
}

} // namespace

TEST_SUITE("predictor") {

TEST_CASE("integrator prediction is x + T u with jacobian T I") {
  IntegratorPlant plant(2);
  PredictorConfig cfg;
  cfg.horizon = 0.5;
  cfg.dt = 0.01;

  for (auto method : {StepMethod::ForwardEuler, StepMethod::RK4}) {
    cfg.method = method;
    const Prediction pred = predict_with_jacobian(plant, vec2(2, 1), vec2(1, 1), cfg);
    CHECK((pred.y_pred - vec2(2.5, 1.5)).norm() < 1e-12);
    CHECK((pred.jac - 0.5 * Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK((pred.x_end - vec2(2.5, 1.5)).norm() < 1e-12);
    const Vec y = predict(plant, vec2(2, 1), vec2(1, 1), cfg);
    CHECK((y - pred.y_pred).norm() == 0.0);
  }
}

TEST_CASE("lti jacobian matches the matrix-exponential closed form") {
  // For x' = A x + B u, y = C x the prediction sensitivity is
  //   d y(T) / d u = C (integral_0^T e^{A s} ds) B,
  // and the integral is the top-right block of exp([[A, I], [0, 0]] T).
  Mat A(2, 2);
  A << 0.0, 1.0, -2.0, -3.0;
  const Mat B = Mat::Identity(2, 2);
  Mat C(2, 2);
  C << 1.0, 0.5, 0.0, 1.0;
  LinearPlant plant(A, B, C);

  const double T = 0.5;
  Mat aug = Mat::Zero(4, 4);
  aug.topLeftCorner(2, 2) = A;
  aug.topRightCorner(2, 2) = Mat::Identity(2, 2);
  const Mat phi = (aug * T).exp();
  const Mat exact = C * phi.topRightCorner(2, 2) * B;

  PredictorConfig cfg;
  cfg.horizon = T;
  cfg.dt = 1e-4;
  cfg.method = StepMethod::RK4;
  const Prediction pred =
      predict_with_jacobian(plant, vec2(0.3, -0.7), vec2(0.2, 0.1), cfg);
  CHECK((pred.jac - exact).norm() / exact.norm() < 1e-9);

  // The predicted state must match e^{AT} x + (integral) B u as well.
  const Vec x_exact = (A * T).exp() * vec2(0.3, -0.7) +
                      phi.topRightCorner(2, 2) * B * vec2(0.2, 0.1);
  CHECK((pred.x_end - x_exact).norm() < 1e-9);
}

TEST_CASE("lti jacobian does not depend on the input point") {
  Mat A(2, 2);
  A << 0.0, 1.0, -1.0, -0.4;
  LinearPlant plant(A, Mat::Identity(2, 2), Mat::Identity(2, 2));
  PredictorConfig cfg;
  cfg.horizon = 0.3;
  cfg.dt = 1e-3;
  const Mat j1 =
      predict_with_jacobian(plant, vec2(1, 1), vec2(0, 0), cfg).jac;
  const Mat j2 =
      predict_with_jacobian(plant, vec2(-2, 3), vec2(5, -4), cfg).jac;
  CHECK((j1 - j2).norm() < 1e-12);
}

TEST_CASE("euler prediction error halves with the step") {
  BicyclePlant plant{BicycleParams{}};
  const Vec x = vec6(0, 0, 10, 0.2, 0.1, 0.05);
  const Vec u = vec2(0.5, 0.03);

  PredictorConfig fine;
  fine.horizon = 0.5;
  fine.dt = 1e-5;
  fine.method = StepMethod::RK4;
  const Vec truth = predict(plant, x, u, fine);

  PredictorConfig cfg;
  cfg.horizon = 0.5;
  cfg.method = StepMethod::ForwardEuler;
  cfg.dt = 2e-3;
  const double err1 = (predict(plant, x, u, cfg) - truth).norm();
  cfg.dt = 1e-3;
  const double err2 = (predict(plant, x, u, cfg) - truth).norm();
  CHECK(err2 / err1 == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("sensitivity jacobian equals finite differences of the same scheme") {
  // Joint integration makes the jacobian the exact derivative of the Euler
  // predictor, so the only gap left is the central-difference truncation.
  BicyclePlant plant{BicycleParams{}};
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> vl(3.0, 25.0);
  std::uniform_real_distribution<double> sm(-0.4, 0.4);

  PredictorConfig cfg;
  cfg.horizon = 0.5;
  cfg.dt = 1e-3;
  cfg.method = StepMethod::ForwardEuler;

  for (int k = 0; k < 10; ++k) {
    const Vec x = vec6(sm(rng), sm(rng), vl(rng), sm(rng), sm(rng) * 3, sm(rng));
    const Vec u = vec2(sm(rng) * 2, sm(rng) * 0.5);
    const Mat js = predict_with_jacobian(plant, x, u, cfg).jac;
    const Mat jf = fd_jacobian(plant, x, u, cfg);
    CHECK((js - jf).norm() / jf.norm() < 1e-6);
  }
}

TEST_CASE("vanishing horizon returns the current output") {
  BicyclePlant plant{BicycleParams{}};
  const Vec x = vec6(3, -1, 8, 0.1, 0.4, 0.0);
  PredictorConfig cfg;
  cfg.horizon = 1e-9;
  cfg.dt = 1e-9;
  const Prediction pred = predict_with_jacobian(plant, x, vec2(0.1, 0.01), cfg);
  CHECK((pred.y_pred - plant.h(x)).norm() < 1e-7);
  CHECK(pred.jac.norm() < 1e-7);
}

TEST_CASE("config validation") {
  PredictorConfig cfg;
  cfg.horizon = 0.5;
  cfg.dt = 0.6; // step exceeding the horizon
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.dt = 0.5; // one full-horizon step is allowed
  CHECK_NOTHROW(cfg.validate());
  cfg.horizon = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("prediction output is the output map applied to the end state") {
  BicyclePlant plant{BicycleParams{}};
  const Vec x = vec6(1, 2, 12, -0.1, 0.3, 0.2);
  PredictorConfig cfg;
  cfg.horizon = 0.4;
  cfg.dt = 1e-3;
  const Prediction pred = predict_with_jacobian(plant, x, vec2(0.3, -0.02), cfg);
  CHECK((pred.y_pred - plant.h(pred.x_end)).norm() == 0.0);
}

} // TEST_SUITE
