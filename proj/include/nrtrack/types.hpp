#pragma once

#include <Eigen/Dense>

namespace nrtrack {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// True when every component is finite.
bool all_finite(const Vec& v);

/// Index of the first non-finite component, or -1.
int first_nonfinite(const Vec& v);

} // namespace nrtrack
