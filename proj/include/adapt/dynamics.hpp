#pragma once

#include <functional>

#include "adapt/types.hpp"

namespace adapt {

enum class EnvType { kCar, kArm };

enum class IntegrationMethod { kEuler, kRk4 };

/// Multipliers on each term of the car state derivative. All 1 gives the
/// unscaled model; kappa_rate (gamma_5) is the parameter-error channel.
struct CarScale {
  double speed = 1.0;       // gamma_1, scales v in x/y/theta rates
  double heading = 1.0;     // gamma_2, scales theta inside cos/sin
  double curvature = 1.0;   // gamma_3, scales kappa in the heading rate
  double accel = 1.0;       // gamma_4, scales a_v
  double kappa_rate = 1.0;  // gamma_5, scales a_kappa
};

struct ArmParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 0.1;
  double l2 = 0.1;
  double damping = 0.01;  // viscous, N*m*s/rad
};

inline constexpr int kCarStateDim = 5;   // [x, y, theta, v, kappa]
inline constexpr int kCarActionDim = 2;  // [a_v, a_kappa]
inline constexpr int kArmStateDim = 4;   // [q1, q2, qd1, qd2]
inline constexpr int kArmActionDim = 2;  // [tau1, tau2]

Vector car_derivative(const Vector& s, const Vector& a,
                      const CarScale& scale = {});

/// Continuous-time Jacobians of car_derivative for the unscaled model.
void car_jacobians(const Vector& s, const Vector& a, Matrix& a_cont,
                   Matrix& b_cont);

Vector arm_derivative(const Vector& s, const Vector& a, const ArmParams& p);

/// 2x2 mass matrix of the planar arm at configuration q.
Matrix arm_mass_matrix(const Vector& q, const ArmParams& p);

/// End-effector position in the plane.
Eigen::Vector2d arm_end_effector(const Vector& s, const ArmParams& p);

using DerivFn = std::function<Vector(const Vector&, const Vector&)>;

/// One integration step with the action held constant.
Vector integrate_step(const DerivFn& deriv, const Vector& s, const Vector& a,
                      double dt, IntegrationMethod method = IntegrationMethod::kRk4);

/// First-order hold: A = I + dt*A_cont, B = dt*B_cont, c = 0.
LinearizedStep discretize_jacobians(const Matrix& a_cont, const Matrix& b_cont,
                                    double dt);

Vector clamp_action(const Vector& a, const BoxSpace& space);

/// Car action box from the model definition: a_v in [-2,2], a_kappa in
/// [-0.5,0.5].
BoxSpace car_action_space();

/// Deterministic source dynamics for one environment: derivative, one RK4
/// step, and (for the car, analytic; for the arm, central-difference)
/// continuous-time Jacobians.
struct EnvDynamics {
  EnvType type = EnvType::kCar;
  double dt = 0.1;
  CarScale car;
  ArmParams arm;
  BoxSpace action_box;
  BoxSpace state_box;

  int state_dim() const { return type == EnvType::kCar ? kCarStateDim : kArmStateDim; }
  int action_dim() const { return type == EnvType::kCar ? kCarActionDim : kArmActionDim; }

  Vector derivative(const Vector& s, const Vector& a) const;
  Vector step(const Vector& s, const Vector& a) const;
  void jacobians(const Vector& s, const Vector& a, Matrix& a_cont,
                 Matrix& b_cont) const;
};

EnvDynamics make_car_env(double dt = 0.1);
EnvDynamics make_arm_env(double dt = 0.02, const ArmParams& params = {});

}  // namespace adapt
