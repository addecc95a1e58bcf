#include "adapt/mpc.hpp"

#include <cmath>

namespace adapt {

MpcConfig default_car_mpc_config() {
  MpcConfig cfg;
  cfg.horizon = 20;
  cfg.q_diag = Vector::Zero(kCarStateDim);
  cfg.q_diag[0] = 1.0;
  cfg.q_diag[1] = 1.0;
  cfg.r_diag = Vector::Constant(kCarActionDim, 1e-3);
  cfg.action_box = car_action_space();
  return cfg;
}

MpcConfig default_arm_mpc_config() {
  MpcConfig cfg;
  cfg.horizon = 20;
  cfg.q_diag = Vector::Zero(kArmStateDim);
  cfg.q_diag[0] = 1.0;
  cfg.q_diag[1] = 1.0;
  cfg.r_diag = Vector::Constant(kArmActionDim, 1e-3);
  cfg.action_box = make_arm_env().action_box;
  return cfg;
}

TrackingLqrSolution solve_tracking_lqr(const TrackingLqrProblem& prob) {
  const int h = static_cast<int>(prob.steps.size());
  if (h < 1 || prob.state_offsets.size() != static_cast<size_t>(h + 1) ||
      prob.action_offsets.size() != static_cast<size_t>(h)) {
    throw std::invalid_argument("solve_tracking_lqr: inconsistent horizon");
  }
  const Matrix q = prob.q_diag.asDiagonal();
  const Matrix r = prob.r_diag.asDiagonal();

  // Backward value recursion, V_k(ds) = ds'P ds + 2 p'ds + v.
  Matrix p_mat = q;
  Vector p_vec = q * prob.state_offsets[h];
  double v_const =
      prob.state_offsets[h].dot(q * prob.state_offsets[h]);

  std::vector<Matrix> gains(h);
  std::vector<Vector> feedforward(h);

  for (int k = h - 1; k >= 0; --k) {
    const Matrix& a = prob.steps[k].A;
    const Matrix& b = prob.steps[k].B;
    const Vector& c = prob.steps[k].c;
    const Vector& e = prob.state_offsets[k];
    const Vector& d = prob.action_offsets[k];

    const Matrix quu = r + b.transpose() * p_mat * b;
    Eigen::LLT<Matrix> llt(quu);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("solve_tracking_lqr: control Hessian not PD");
    }
    const Matrix gain = -llt.solve(b.transpose() * p_mat * a);
    const Vector ff =
        -llt.solve(r * d + b.transpose() * (p_mat * c + p_vec));

    const Matrix closed = a + b * gain;
    const Vector drift = b * ff + c;

    const Vector rdff = r * (ff + d);
    const Matrix p_next = q + gain.transpose() * r * gain +
                          closed.transpose() * p_mat * closed;
    const Vector p_vec_next = q * e + gain.transpose() * rdff +
                              closed.transpose() * (p_mat * drift + p_vec);
    v_const += e.dot(q * e) + (ff + d).dot(rdff) + drift.dot(p_mat * drift) +
               2.0 * p_vec.dot(drift);
    p_mat = 0.5 * (p_next + p_next.transpose());  // keep symmetric
    p_vec = p_vec_next;
    gains[k] = gain;
    feedforward[k] = ff;
  }

  TrackingLqrSolution sol;
  sol.state_deviations.resize(h + 1);
  sol.action_deviations.resize(h);
  Vector ds = prob.initial_deviation;
  sol.cost = ds.dot(p_mat * ds) + 2.0 * p_vec.dot(ds) + v_const;
  sol.state_deviations[0] = ds;
  for (int k = 0; k < h; ++k) {
    const Vector da = gains[k] * ds + feedforward[k];
    ds = prob.steps[k].A * ds + prob.steps[k].B * da + prob.steps[k].c;
    sol.action_deviations[k] = da;
    sol.state_deviations[k + 1] = ds;
  }
  return sol;
}

namespace {

/// Roll the model forward from s with the given actions; states.size() is
/// actions.size() + 1.
std::vector<Vector> model_rollout(const ApproxModel& model, const Vector& s,
                                  const std::vector<Vector>& actions, int t0) {
  std::vector<Vector> states;
  states.reserve(actions.size() + 1);
  states.push_back(s);
  Vector x = s;
  for (size_t k = 0; k < actions.size(); ++k) {
    x = model.predict(x, actions[k], t0 + static_cast<int>(k));
    states.push_back(x);
  }
  return states;
}

double tracking_objective(const std::vector<Vector>& states,
                          const std::vector<Vector>& actions,
                          const Trajectory& nominal, int t0, const Vector& q,
                          const Vector& r) {
  double cost = 0.0;
  for (size_t k = 0; k < states.size(); ++k) {
    const Vector e = states[k] - nominal.states[t0 + k];
    cost += e.dot(q.asDiagonal() * e);
  }
  for (size_t k = 0; k < actions.size(); ++k) {
    const Vector d = actions[k] - nominal.actions[t0 + k];
    cost += d.dot(r.asDiagonal() * d);
  }
  return cost;
}

}  // namespace

MpcSolution aux_mpc(const Vector& s, int t, const Trajectory& nominal,
                    const ApproxModel& model, const MpcConfig& cfg) {
  const int episode_steps = nominal.horizon();
  if (t < 0 || t >= episode_steps) {
    throw std::out_of_range("aux_mpc: t out of range");
  }
  if (!s.allFinite()) {
    throw std::runtime_error("aux_mpc: non-finite state");
  }
  const int h = std::min(cfg.horizon, episode_steps - t);

  // Iterate: action sequence seeded at the nominal, states rolled through
  // the model from the actual state.
  std::vector<Vector> actions(nominal.actions.begin() + t,
                              nominal.actions.begin() + t + h);
  std::vector<Vector> states = model_rollout(model, s, actions, t);
  double objective =
      tracking_objective(states, actions, nominal, t, cfg.q_diag, cfg.r_diag);

  MpcSolution sol;
  int updates = 0;
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    TrackingLqrProblem prob;
    prob.q_diag = cfg.q_diag;
    prob.r_diag = cfg.r_diag;
    prob.initial_deviation = Vector::Zero(s.size());
    prob.steps.resize(h);
    prob.state_offsets.resize(h + 1);
    prob.action_offsets.resize(h);
    for (int k = 0; k < h; ++k) {
      prob.steps[k] = model.linearize_at(states[k], actions[k], t + k);
      // Residual against the iterate, zero by construction of the rollout.
      prob.steps[k].c =
          model.predict(states[k], actions[k], t + k) - states[k + 1];
      prob.state_offsets[k] = states[k] - nominal.states[t + k];
      prob.action_offsets[k] = actions[k] - nominal.actions[t + k];
    }
    prob.state_offsets[h] = states[h] - nominal.states[t + h];

    const TrackingLqrSolution lqr = solve_tracking_lqr(prob);

    double step_norm = 0.0;
    for (const Vector& da : lqr.action_deviations) {
      step_norm = std::max(step_norm, da.lpNorm<Eigen::Infinity>());
    }
    if (step_norm < cfg.tolerance) {
      sol.converged = true;
      break;
    }

    // Step-halving acceptance on the model-predicted objective.
    bool accepted = false;
    double alpha = 1.0;
    for (int halve = 0; halve <= 5; ++halve, alpha *= 0.5) {
      std::vector<Vector> cand_actions(actions);
      for (int k = 0; k < h; ++k) {
        cand_actions[k] =
            cfg.action_box.clamp(actions[k] + alpha * lqr.action_deviations[k]);
      }
      std::vector<Vector> cand_states = model_rollout(model, s, cand_actions, t);
      const double cand_obj = tracking_objective(cand_states, cand_actions,
                                                 nominal, t, cfg.q_diag,
                                                 cfg.r_diag);
      if (cand_obj <= objective + 1e-12) {
        actions = std::move(cand_actions);
        states = std::move(cand_states);
        objective = cand_obj;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      break;  // stationary up to clamping; stop without claiming convergence
    }
    ++updates;
  }
  sol.iterations = std::max(1, updates);

  if (!states.back().allFinite()) {
    throw std::runtime_error("aux_mpc: non-finite iterate");
  }

  for (int k = 0; k < h; ++k) {
    for (Eigen::Index i = 0; i < actions[k].size(); ++i) {
      if (actions[k][i] <= cfg.action_box.lower[i] + 1e-12 ||
          actions[k][i] >= cfg.action_box.upper[i] - 1e-12) {
        sol.saturated = true;
      }
    }
  }
  sol.action = actions.front();
  sol.planned_actions = std::move(actions);
  sol.cost = objective;
  return sol;
}

double mpc_cost_at(const Vector& s, int t, const Trajectory& nominal,
                   const ApproxModel& model, const MpcConfig& cfg) {
  return aux_mpc(s, t, nominal, model, cfg).cost;
}

}  // namespace adapt
