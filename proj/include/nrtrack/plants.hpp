#pragma once

#include <string>
#include <vector>

#include "nrtrack/types.hpp"

namespace nrtrack {

/// Control-affine-free plant interface: dynamics f(x,u), output h(x), and the
/// partial derivatives the output predictor needs. The output dimension always
/// equals the input dimension (square tracking problem).
class PlantModel {
public:
  virtual ~PlantModel() = default;

  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;

  virtual void f(const Vec& x, const Vec& u, Vec& xdot) const = 0;
  virtual void h(const Vec& x, Vec& y) const = 0;
  virtual void df_dx(const Vec& x, const Vec& u, Mat& out) const = 0;
  virtual void df_du(const Vec& x, const Vec& u, Mat& out) const = 0;
  virtual void dh_dx(const Vec& x, Mat& out) const = 0;

  /// Index of the heading angle in the state vector, or -1 when the plant has
  /// no heading (heading error is then reported as zero).
  virtual int heading_index() const { return -1; }

  virtual std::vector<std::string> state_names() const;
  virtual std::vector<std::string> input_names() const;

  // Value-returning conveniences.
  Vec f(const Vec& x, const Vec& u) const;
  Vec h(const Vec& x) const;
  Mat df_dx(const Vec& x, const Vec& u) const;
  Mat df_du(const Vec& x, const Vec& u) const;
  Mat dh_dx(const Vec& x) const;
};

/// Central-difference Jacobians of f and h, step 1e-6 scaled per component.
/// Used by tests as an independent oracle and by the bicycle's fallback mode.
Mat fd_df_dx(const PlantModel& plant, const Vec& x, const Vec& u, double h_rel = 1e-6);
Mat fd_df_du(const PlantModel& plant, const Vec& x, const Vec& u, double h_rel = 1e-6);
Mat fd_dh_dx(const PlantModel& plant, const Vec& x, double h_rel = 1e-6);

struct BicycleParams {
  double mass_kg = 1587.0;
  double yaw_inertia_kgm2 = 2315.3;
  double lf_m = 1.218;
  double lr_m = 1.628;
  double caf_n_per_rad = 35000.0;
  double car_n_per_rad = 35000.0;

  void validate() const; // throws ConfigError on non-positive values
};

enum class JacobianMode { Analytic, FiniteDifference };

/// Planar dynamic bicycle with linear tire forces.
///
/// State (z1, z2, v_l, v_n, psi, psi_dot): inertial position, body-frame
/// longitudinal/lateral velocity, heading, yaw rate. Input (a_l, delta_f):
/// longitudinal acceleration and front steering angle. Output (z1, z2).
///
///   z1'   = v_l cos(psi) - v_n sin(psi)
///   z2'   = v_l sin(psi) + v_n cos(psi)
///   v_l'  = psi_dot v_n + a_l
///   v_n'  = -psi_dot v_l + 2 (F_cf cos(delta_f) + F_cr) / m
///   psi'  = psi_dot
///   psi_dot' = 2 (l_f F_cf cos(delta_f) - l_r F_cr) / I_z
///
/// with cornering forces F_cf = C_af (delta_f - atan((v_n + l_f psi_dot)/v_l))
/// and F_cr = -C_ar atan((v_n - l_r psi_dot)/v_l). The model loses meaning as
/// v_l -> 0, so evaluation below v_min raises LowSpeedError instead of clamping.
class BicyclePlant : public PlantModel {
public:
  explicit BicyclePlant(BicycleParams params, double v_min = 0.1,
                        JacobianMode mode = JacobianMode::Analytic);

  int state_dim() const override { return 6; }
  int input_dim() const override { return 2; }
  void f(const Vec& x, const Vec& u, Vec& xdot) const override;
  void h(const Vec& x, Vec& y) const override;
  void df_dx(const Vec& x, const Vec& u, Mat& out) const override;
  void df_du(const Vec& x, const Vec& u, Mat& out) const override;
  void dh_dx(const Vec& x, Mat& out) const override;
  int heading_index() const override { return 4; }
  std::vector<std::string> state_names() const override;
  std::vector<std::string> input_names() const override;

  const BicycleParams& params() const { return params_; }
  double v_min() const { return v_min_; }

  using PlantModel::f;
  using PlantModel::h;
  using PlantModel::df_dx;
  using PlantModel::df_du;
  using PlantModel::dh_dx;

private:
  void check_speed(const Vec& x) const;
  BicycleParams params_;
  double v_min_;
  JacobianMode mode_;
};

/// x' = u, y = x. The predicted output is exactly x + T u.
class IntegratorPlant : public PlantModel {
public:
  explicit IntegratorPlant(int dim = 2);
  int state_dim() const override { return dim_; }
  int input_dim() const override { return dim_; }
  void f(const Vec& x, const Vec& u, Vec& xdot) const override;
  void h(const Vec& x, Vec& y) const override;
  void df_dx(const Vec& x, const Vec& u, Mat& out) const override;
  void df_du(const Vec& x, const Vec& u, Mat& out) const override;
  void dh_dx(const Vec& x, Mat& out) const override;
  std::vector<std::string> state_names() const override;
  std::vector<std::string> input_names() const override;

  using PlantModel::f;
  using PlantModel::h;
  using PlantModel::df_dx;
  using PlantModel::df_du;
  using PlantModel::dh_dx;

private:
  int dim_;
};

/// x' = A x + B u, y = C x. Test plant with a known closed-form prediction.
class LinearPlant : public PlantModel {
public:
  LinearPlant(Mat A, Mat B, Mat C);
  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int input_dim() const override { return static_cast<int>(B_.cols()); }
  void f(const Vec& x, const Vec& u, Vec& xdot) const override;
  void h(const Vec& x, Vec& y) const override;
  void df_dx(const Vec& x, const Vec& u, Mat& out) const override;
  void df_du(const Vec& x, const Vec& u, Mat& out) const override;
  void dh_dx(const Vec& x, Mat& out) const override;

  using PlantModel::f;
  using PlantModel::h;
  using PlantModel::df_dx;
  using PlantModel::df_du;
  using PlantModel::dh_dx;

private:
  Mat A_, B_, C_;
};

/// Unicycle with state (z1, z2, psi), input (v, omega), output (z1, z2).
class UnicyclePlant : public PlantModel {
public:
  int state_dim() const override { return 3; }
  int input_dim() const override { return 2; }
  void f(const Vec& x, const Vec& u, Vec& xdot) const override;
  void h(const Vec& x, Vec& y) const override;
  void df_dx(const Vec& x, const Vec& u, Mat& out) const override;
  void df_du(const Vec& x, const Vec& u, Mat& out) const override;
  void dh_dx(const Vec& x, Mat& out) const override;
  int heading_index() const override { return 2; }
  std::vector<std::string> state_names() const override;
  std::vector<std::string> input_names() const override;

  using PlantModel::f;
  using PlantModel::h;
  using PlantModel::df_dx;
  using PlantModel::df_du;
  using PlantModel::dh_dx;
};

struct UnicycleState {
  double z1 = 0.0;
  double z2 = 0.0;
  double psi = 0.0;
};

/// Unicycle kinematics: returns (v cos psi, v sin psi, omega).
Eigen::Vector3d unicycle_f(const UnicycleState& s, double v, double omega);

/// Point at distance l ahead of the axle along the heading.
Vec2 kinematic_point_of(const UnicycleState& s, double l);

/// Inverts the kinematic-point velocity map: given the heading and a desired
/// point velocity p_dot, returns (v, omega) with
///   v     =  cos(psi) p_dot1 + sin(psi) p_dot2
///   omega = (-sin(psi) p_dot1 + cos(psi) p_dot2) / l.
std::pair<double, double> point_to_unicycle(double psi, double l, const Vec2& p_dot);

} // namespace nrtrack
