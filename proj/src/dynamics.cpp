#include "adapt/dynamics.hpp"

#include <cmath>

namespace adapt {

namespace {

void check_dims(const Vector& s, const Vector& a, int sdim, int adim,
                const char* who) {
  if (s.size() != sdim || a.size() != adim) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

}  // namespace

Vector car_derivative(const Vector& s, const Vector& a, const CarScale& g) {
  check_dims(s, a, kCarStateDim, kCarActionDim, "car_derivative");
  const double theta = g.heading * s[2];
  const double v = g.speed * s[3];
  Vector ds(kCarStateDim);
  ds[0] = v * std::cos(theta);
  ds[1] = v * std::sin(theta);
  ds[2] = v * g.curvature * s[4];
  ds[3] = g.accel * a[0];
  ds[4] = g.kappa_rate * a[1];
  return ds;
}

void car_jacobians(const Vector& s, const Vector& a, Matrix& a_cont,
                   Matrix& b_cont) {
  check_dims(s, a, kCarStateDim, kCarActionDim, "car_jacobians");
  const double theta = s[2];
  const double v = s[3];
  const double kappa = s[4];
  a_cont = Matrix::Zero(kCarStateDim, kCarStateDim);
  a_cont(0, 2) = -v * std::sin(theta);
  a_cont(0, 3) = std::cos(theta);
  a_cont(1, 2) = v * std::cos(theta);
  a_cont(1, 3) = std::sin(theta);
  a_cont(2, 3) = kappa;
  a_cont(2, 4) = v;
  b_cont = Matrix::Zero(kCarStateDim, kCarActionDim);
  b_cont(3, 0) = 1.0;
  b_cont(4, 1) = 1.0;
}

Matrix arm_mass_matrix(const Vector& q, const ArmParams& p) {
  // Uniform rods: lc = l/2, I = m l^2 / 12.
  const double lc1 = 0.5 * p.l1;
  const double lc2 = 0.5 * p.l2;
  const double i1 = p.m1 * p.l1 * p.l1 / 12.0;
  const double i2 = p.m2 * p.l2 * p.l2 / 12.0;
  const double c2 = std::cos(q[1]);
  Matrix m(2, 2);
  m(0, 0) = p.m1 * lc1 * lc1 + i1 +
            p.m2 * (p.l1 * p.l1 + lc2 * lc2 + 2.0 * p.l1 * lc2 * c2) + i2;
  m(0, 1) = p.m2 * (lc2 * lc2 + p.l1 * lc2 * c2) + i2;
  m(1, 0) = m(0, 1);
  m(1, 1) = p.m2 * lc2 * lc2 + i2;
  return m;
}

Vector arm_derivative(const Vector& s, const Vector& a, const ArmParams& p) {
  check_dims(s, a, kArmStateDim, kArmActionDim, "arm_derivative");
  if (p.m1 <= 0.0 || p.m2 <= 0.0 || p.l1 <= 0.0 || p.l2 <= 0.0) {
    throw std::invalid_argument("arm_derivative: non-positive mass or length");
  }
  const double lc2 = 0.5 * p.l2;
  const double s2 = std::sin(s[1]);
  const double qd1 = s[2];
  const double qd2 = s[3];
  const double h = p.m2 * p.l1 * lc2 * s2;
  Eigen::Vector2d bias;
  bias[0] = -h * (2.0 * qd1 * qd2 + qd2 * qd2);
  bias[1] = h * qd1 * qd1;
  Eigen::Vector2d rhs(a[0] - bias[0] - p.damping * qd1,
                      a[1] - bias[1] - p.damping * qd2);
  Eigen::Vector2d qdd = arm_mass_matrix(s.head<2>(), p).ldlt().solve(rhs);
  Vector ds(kArmStateDim);
  ds << qd1, qd2, qdd[0], qdd[1];
  return ds;
}

Eigen::Vector2d arm_end_effector(const Vector& s, const ArmParams& p) {
  const double q1 = s[0];
  const double q12 = s[0] + s[1];
  return {p.l1 * std::cos(q1) + p.l2 * std::cos(q12),
          p.l1 * std::sin(q1) + p.l2 * std::sin(q12)};
}

Vector integrate_step(const DerivFn& deriv, const Vector& s, const Vector& a,
                      double dt, IntegrationMethod method) {
  if (dt <= 0.0) {
    throw std::invalid_argument("integrate_step: dt must be positive");
  }
  Vector next;
  if (method == IntegrationMethod::kEuler) {
    next = s + dt * deriv(s, a);
  } else {
    const Vector k1 = deriv(s, a);
    const Vector k2 = deriv(s + 0.5 * dt * k1, a);
    const Vector k3 = deriv(s + 0.5 * dt * k2, a);
    const Vector k4 = deriv(s + dt * k3, a);
    next = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!next.allFinite()) {
    throw std::runtime_error("integrate_step: non-finite state");
  }
  return next;
}

LinearizedStep discretize_jacobians(const Matrix& a_cont, const Matrix& b_cont,
                                    double dt) {
  if (dt <= 0.0) {
    throw std::invalid_argument("discretize_jacobians: dt must be positive");
  }
  if (a_cont.rows() != a_cont.cols() || b_cont.rows() != a_cont.rows()) {
    throw std::invalid_argument("discretize_jacobians: shape mismatch");
  }
  LinearizedStep step;
  step.A = Matrix::Identity(a_cont.rows(), a_cont.cols()) + dt * a_cont;
  step.B = dt * b_cont;
  step.c = Vector::Zero(a_cont.rows());
  return step;
}

Vector clamp_action(const Vector& a, const BoxSpace& space) {
  return space.clamp(a);
}

BoxSpace car_action_space() {
  Vector lo(2), hi(2);
  lo << -2.0, -0.5;
  hi << 2.0, 0.5;
  return BoxSpace(lo, hi);
}

Vector EnvDynamics::derivative(const Vector& s, const Vector& a) const {
  return type == EnvType::kCar ? car_derivative(s, a, car)
                               : arm_derivative(s, a, arm);
}

Vector EnvDynamics::step(const Vector& s, const Vector& a) const {
  return integrate_step(
      [this](const Vector& x, const Vector& u) { return derivative(x, u); }, s,
      a, dt, IntegrationMethod::kRk4);
}

void EnvDynamics::jacobians(const Vector& s, const Vector& a, Matrix& a_cont,
                            Matrix& b_cont) const {
  if (type == EnvType::kCar) {
    car_jacobians(s, a, a_cont, b_cont);
    return;
  }
  // Central differences; the arm has no hand-derived Jacobian.
  const double eps = 1e-6;
  const int n = state_dim();
  const int m = action_dim();
  a_cont.resize(n, n);
  b_cont.resize(n, m);
  for (int i = 0; i < n; ++i) {
    Vector sp = s, sm = s;
    sp[i] += eps;
    sm[i] -= eps;
    a_cont.col(i) = (derivative(sp, a) - derivative(sm, a)) / (2.0 * eps);
  }
  for (int j = 0; j < m; ++j) {
    Vector ap = a, am = a;
    ap[j] += eps;
    am[j] -= eps;
    b_cont.col(j) = (derivative(s, ap) - derivative(s, am)) / (2.0 * eps);
  }
}

EnvDynamics make_car_env(double dt) {
  EnvDynamics env;
  env.type = EnvType::kCar;
  env.dt = dt;
  env.action_box = car_action_space();
  // Effectively unbounded; the box exists so restricted-set handling is
  // uniform across environments.
  Vector lo(kCarStateDim), hi(kCarStateDim);
  lo << -50.0, -50.0, -50.0, -50.0, -10.0;
  hi << 50.0, 50.0, 50.0, 50.0, 10.0;
  env.state_box = BoxSpace(lo, hi);
  return env;
}

EnvDynamics make_arm_env(double dt, const ArmParams& params) {
  EnvDynamics env;
  env.type = EnvType::kArm;
  env.dt = dt;
  env.arm = params;
  Vector alo(kArmActionDim), ahi(kArmActionDim);
  alo << -0.05, -0.05;
  ahi << 0.05, 0.05;
  env.action_box = BoxSpace(alo, ahi);
  Vector slo(kArmStateDim), shi(kArmStateDim);
  slo << -50.0, -50.0, -100.0, -100.0;
  shi << 50.0, 50.0, 100.0, 100.0;
  env.state_box = BoxSpace(slo, shi);
  return env;
}

}  // namespace adapt
