#include "nrtrack/plants.hpp"

#include <cmath>
#include <string>

#include "nrtrack/errors.hpp"

namespace nrtrack {

std::vector<std::string> PlantModel::state_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < state_dim(); ++i) names.push_back("x" + std::to_string(i + 1));
  return names;
}

std::vector<std::string> PlantModel::input_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < input_dim(); ++i) names.push_back("u" + std::to_string(i + 1));
  return names;
}

Vec PlantModel::f(const Vec& x, const Vec& u) const {
  Vec out(state_dim());
  f(x, u, out);
  return out;
}

Vec PlantModel::h(const Vec& x) const {
  Vec out(input_dim());
  h(x, out);
  return out;
}

Mat PlantModel::df_dx(const Vec& x, const Vec& u) const {
  Mat out(state_dim(), state_dim());
  df_dx(x, u, out);
  return out;
}

Mat PlantModel::df_du(const Vec& x, const Vec& u) const {
  Mat out(state_dim(), input_dim());
  df_du(x, u, out);
  return out;
}

Mat PlantModel::dh_dx(const Vec& x) const {
  Mat out(input_dim(), state_dim());
  dh_dx(x, out);
  return out;
}

Mat fd_df_dx(const PlantModel& plant, const Vec& x, const Vec& u, double h_rel) {
  const int n = plant.state_dim();
  Mat out(n, n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double hj = h_rel * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    out.col(j) = (plant.f(xp, u) - plant.f(xm, u)) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return out;
}

Mat fd_df_du(const PlantModel& plant, const Vec& x, const Vec& u, double h_rel) {
  const int n = plant.state_dim();
  const int m = plant.input_dim();
  Mat out(n, m);
  Vec up = u, um = u;
  for (int j = 0; j < m; ++j) {
    const double hj = h_rel * std::max(1.0, std::abs(u[j]));
    up[j] = u[j] + hj;
    um[j] = u[j] - hj;
    out.col(j) = (plant.f(x, up) - plant.f(x, um)) / (2.0 * hj);
    up[j] = u[j];
    um[j] = u[j];
  }
  return out;
}

Mat fd_dh_dx(const PlantModel& plant, const Vec& x, double h_rel) {
  const int n = plant.state_dim();
  Mat out(plant.input_dim(), n);
  Vec xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double hj = h_rel * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    out.col(j) = (plant.h(xp) - plant.h(xm)) / (2.0 * hj);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bicycle

void BicycleParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0))
      throw ConfigError(std::string(name) + " must be positive, got " +
                        std::to_string(v));
  };
  positive(mass_kg, "mass_kg");
  positive(yaw_inertia_kgm2, "yaw_inertia_kgm2");
  positive(lf_m, "lf_m");
  positive(lr_m, "lr_m");
  positive(caf_n_per_rad, "caf_n_per_rad");
  positive(car_n_per_rad, "car_n_per_rad");
}

BicyclePlant::BicyclePlant(BicycleParams params, double v_min, JacobianMode mode)
    : params_(params), v_min_(v_min), mode_(mode) {
  params_.validate();
  if (!(v_min_ > 0.0))
    throw ConfigError("v_min must be positive, got " + std::to_string(v_min_));
}

void BicyclePlant::check_speed(const Vec& x) const {
  if (x[2] < v_min_)
    throw LowSpeedError("bicycle model invalid: v_l=" + std::to_string(x[2]) +
                            " below v_min=" + std::to_string(v_min_),
                        x[2]);
}

void BicyclePlant::f(const Vec& x, const Vec& u, Vec& xdot) const {
  check_speed(x);
  const double vl = x[2], vn = x[3], psi = x[4], psid = x[5];
  const double al = u[0], df = u[1];
  const double fcf = params_.caf_n_per_rad * (df - std::atan((vn + params_.lf_m * psid) / vl));
  const double fcr = -params_.car_n_per_rad * std::atan((vn - params_.lr_m * psid) / vl);
  const double cdf = std::cos(df);
  xdot[0] = vl * std::cos(psi) - vn * std::sin(psi);
  xdot[1] = vl * std::sin(psi) + vn * std::cos(psi);
  xdot[2] = psid * vn + al;
  xdot[3] = -psid * vl + 2.0 * (fcf * cdf + fcr) / params_.mass_kg;
  xdot[4] = psid;
  xdot[5] = 2.0 * (params_.lf_m * fcf * cdf - params_.lr_m * fcr) / params_.yaw_inertia_kgm2;
}

void BicyclePlant::h(const Vec& x, Vec& y) const {
  y[0] = x[0];
  y[1] = x[1];
}

void BicyclePlant::df_dx(const Vec& x, const Vec& u, Mat& out) const {
  if (mode_ == JacobianMode::FiniteDifference) {
    out = fd_df_dx(*this, x, u);
    return;
  }
  check_speed(x);
  const double vl = x[2], vn = x[3], psi = x[4], psid = x[5];
  const double df = u[1];
  const double m = params_.mass_kg, iz = params_.yaw_inertia_kgm2;
  const double lf = params_.lf_m, lr = params_.lr_m;
  const double caf = params_.caf_n_per_rad, car = params_.car_n_per_rad;

  const double sf = (vn + lf * psid) / vl; // front/rear slip angle arguments
  const double sr = (vn - lr * psid) / vl;
  const double gf = caf / (1.0 + sf * sf);
  const double gr = car / (1.0 + sr * sr);
  const double cdf = std::cos(df);

  // dF_cf = -gf dsf, dF_cr = -gr dsr with
  //   dsf/dvl = -sf/vl, dsf/dvn = 1/vl, dsf/dpsid =  lf/vl
  //   dsr/dvl = -sr/vl, dsr/dvn = 1/vl, dsr/dpsid = -lr/vl
  const double dfcf_dvl = gf * sf / vl;
  const double dfcf_dvn = -gf / vl;
  const double dfcf_dpsid = -gf * lf / vl;
  const double dfcr_dvl = gr * sr / vl;
  const double dfcr_dvn = -gr / vl;
  const double dfcr_dpsid = gr * lr / vl;

  const double cp = std::cos(psi), sp = std::sin(psi);
  out.setZero();
  out(0, 2) = cp;
  out(0, 3) = -sp;
  out(0, 4) = -vl * sp - vn * cp;
  out(1, 2) = sp;
  out(1, 3) = cp;
  out(1, 4) = vl * cp - vn * sp;
  out(2, 3) = psid;
  out(2, 5) = vn;
  out(3, 2) = -psid + 2.0 * (cdf * dfcf_dvl + dfcr_dvl) / m;
  out(3, 3) = 2.0 * (cdf * dfcf_dvn + dfcr_dvn) / m;
  out(3, 5) = -vl + 2.0 * (cdf * dfcf_dpsid + dfcr_dpsid) / m;
  out(4, 5) = 1.0;
  out(5, 2) = 2.0 * (lf * cdf * dfcf_dvl - lr * dfcr_dvl) / iz;
  out(5, 3) = 2.0 * (lf * cdf * dfcf_dvn - lr * dfcr_dvn) / iz;
  out(5, 5) = 2.0 * (lf * cdf * dfcf_dpsid - lr * dfcr_dpsid) / iz;
}

void BicyclePlant::df_du(const Vec& x, const Vec& u, Mat& out) const {
  if (mode_ == JacobianMode::FiniteDifference) {
    out = fd_df_du(*this, x, u);
    return;
  }
  check_speed(x);
  const double vl = x[2], vn = x[3], psid = x[5];
  const double df = u[1];
  const double caf = params_.caf_n_per_rad;
  const double fcf = caf * (df - std::atan((vn + params_.lf_m * psid) / vl));
  const double cdf = std::cos(df), sdf = std::sin(df);
  // d/d(delta_f) of F_cf cos(delta_f) = C_af cos - F_cf sin
  const double dlat = caf * cdf - fcf * sdf;
  out.setZero();
  out(2, 0) = 1.0;
  out(3, 1) = 2.0 * dlat / params_.mass_kg;
  out(5, 1) = 2.0 * params_.lf_m * dlat / params_.yaw_inertia_kgm2;
}

void BicyclePlant::dh_dx(const Vec& x, Mat& out) const {
  (void)x;
  out.setZero();
  out(0, 0) = 1.0;
  out(1, 1) = 1.0;
}

std::vector<std::string> BicyclePlant::state_names() const {
  return {"z1", "z2", "v_l", "v_n", "psi", "psi_dot"};
}

std::vector<std::string> BicyclePlant::input_names() const {
  return {"a_l", "delta_f"};
}

// ---------------------------------------------------------------------------
// Integrator

IntegratorPlant::IntegratorPlant(int dim) : dim_(dim) {
  if (dim_ < 1) throw ConfigError("integrator dimension must be >= 1");
}

void IntegratorPlant::f(const Vec& x, const Vec& u, Vec& xdot) const {
  (void)x;
  xdot = u;
}

void IntegratorPlant::h(const Vec& x, Vec& y) const { y = x; }

void IntegratorPlant::df_dx(const Vec&, const Vec&, Mat& out) const { out.setZero(); }

void IntegratorPlant::df_du(const Vec&, const Vec&, Mat& out) const {
  out.setIdentity();
}

void IntegratorPlant::dh_dx(const Vec&, Mat& out) const { out.setIdentity(); }

std::vector<std::string> IntegratorPlant::state_names() const {
  return PlantModel::state_names();
}

std::vector<std::string> IntegratorPlant::input_names() const {
  return PlantModel::input_names();
}

// ---------------------------------------------------------------------------
// Linear

LinearPlant::LinearPlant(Mat A, Mat B, Mat C)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  if (A_.rows() != A_.cols() || B_.rows() != A_.rows() || C_.cols() != A_.rows())
    throw ConfigError("linear plant dimensions inconsistent");
  if (C_.rows() != B_.cols())
    throw ConfigError("linear plant output dim must equal input dim");
}

void LinearPlant::f(const Vec& x, const Vec& u, Vec& xdot) const {
  xdot.noalias() = A_ * x;
  xdot.noalias() += B_ * u;
}

void LinearPlant::h(const Vec& x, Vec& y) const { y.noalias() = C_ * x; }

void LinearPlant::df_dx(const Vec&, const Vec&, Mat& out) const { out = A_; }

void LinearPlant::df_du(const Vec&, const Vec&, Mat& out) const { out = B_; }

void LinearPlant::dh_dx(const Vec&, Mat& out) const { out = C_; }

// ---------------------------------------------------------------------------
// Unicycle

void UnicyclePlant::f(const Vec& x, const Vec& u, Vec& xdot) const {
  xdot[0] = u[0] * std::cos(x[2]);
  xdot[1] = u[0] * std::sin(x[2]);
  xdot[2] = u[1];
}

void UnicyclePlant::h(const Vec& x, Vec& y) const {
  y[0] = x[0];
  y[1] = x[1];
}

void UnicyclePlant::df_dx(const Vec& x, const Vec& u, Mat& out) const {
  out.setZero();
  out(0, 2) = -u[0] * std::sin(x[2]);
  out(1, 2) = u[0] * std::cos(x[2]);
}

void UnicyclePlant::df_du(const Vec& x, const Vec&, Mat& out) const {
  out.setZero();
  out(0, 0) = std::cos(x[2]);
  out(1, 0) = std::sin(x[2]);
  out(2, 1) = 1.0;
}

void UnicyclePlant::dh_dx(const Vec&, Mat& out) const {
  out.setZero();
  out(0, 0) = 1.0;
  out(1, 1) = 1.0;
}

std::vector<std::string> UnicyclePlant::state_names() const {
  return {"z1", "z2", "psi"};
}

std::vector<std::string> UnicyclePlant::input_names() const {
  return {"v", "omega"};
}

Eigen::Vector3d unicycle_f(const UnicycleState& s, double v, double omega) {
  return {v * std::cos(s.psi), v * std::sin(s.psi), omega};
}

Vec2 kinematic_point_of(const UnicycleState& s, double l) {
  return {s.z1 + l * std::cos(s.psi), s.z2 + l * std::sin(s.psi)};
}

std::pair<double, double> point_to_unicycle(double psi, double l, const Vec2& p_dot) {
  if (!(l > 0.0))
    throw ConfigError("kinematic point offset l must be positive, got " +
                      std::to_string(l));
  const double c = std::cos(psi), s = std::sin(psi);
  const double v = c * p_dot[0] + s * p_dot[1];
  const double omega = (-s * p_dot[0] + c * p_dot[1]) / l;
  return {v, omega};
}

} // namespace nrtrack
