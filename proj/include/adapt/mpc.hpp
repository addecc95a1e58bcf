#pragma once

#include "adapt/approx_model.hpp"
#include "adapt/types.hpp"

namespace adapt {

struct MpcConfig {
  int horizon = 20;          // N
  Vector q_diag;             // state-deviation weights
  Vector r_diag;             // action-deviation weights
  int max_iterations = 10;   // relinearization passes
  double tolerance = 1e-6;   // max-norm of delta-a at convergence
  BoxSpace action_box;       // A
};

MpcConfig default_car_mpc_config();
MpcConfig default_arm_mpc_config();

struct MpcSolution {
  Vector action;                       // first action, clamped to A
  std::vector<Vector> planned_actions; // length min(N, T - t)
  double cost = 0.0;                   // C*_N through the approximate model
  int iterations = 0;
  bool converged = false;
  bool saturated = false;
};

/// Time-varying tracking LQR over affine dynamics
/// ds_{k+1} = A_k ds_k + B_k ds_k + c_k with cost
///   sum_k (ds_k + e_k)' Q (ds_k + e_k) + (da_k + d_k)' R (da_k + d_k),
/// states k = 0..H, actions k = 0..H-1. Box constraints are not handled at
/// this layer.
struct TrackingLqrProblem {
  std::vector<LinearizedStep> steps;  // H entries
  std::vector<Vector> state_offsets;  // H+1 entries, e_k
  std::vector<Vector> action_offsets; // H entries, d_k
  Vector q_diag;
  Vector r_diag;
  Vector initial_deviation;           // ds_0
};

struct TrackingLqrSolution {
  std::vector<Vector> action_deviations;  // H entries
  std::vector<Vector> state_deviations;   // H+1 entries
  double cost = 0.0;                      // optimal objective value
};

TrackingLqrSolution solve_tracking_lqr(const TrackingLqrProblem& problem);

/// Auxiliary tracking controller: iterative relinearization of the model
/// around the current iterate, exact LQR subproblem, iterate update with
/// step halving, actions clamped to A.
MpcSolution aux_mpc(const Vector& s, int t, const Trajectory& nominal,
                    const ApproxModel& model, const MpcConfig& cfg);

/// C*_N(s, t) only.
double mpc_cost_at(const Vector& s, int t, const Trajectory& nominal,
                   const ApproxModel& model, const MpcConfig& cfg);

}  // namespace adapt
