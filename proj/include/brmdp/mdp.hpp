#pragma once

#include <Eigen/Dense>

namespace brmdp {

/// Finite MDP data that does not depend on the unknown kernel parameter:
/// sizes, discount, initial distribution and expected per-step costs.
struct MdpModel {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.0;              // strictly inside (0,1)
    Eigen::VectorXd init_dist;       // tau, length n_states
    Eigen::MatrixXd expected_cost;   // c(s,a), n_states x n_actions

    int dim() const { return n_states * n_actions; }
};

/// Transition kernel stored as a (|S||A|) x |S| row-stochastic matrix;
/// row s*|A|+a holds P(.|s,a).
struct TransitionMatrix {
    Eigen::MatrixXd probs;
};

/// Truncated discounted state-action occupancy, flat length |S||A| with the
/// same s*|A|+a indexing as TransitionMatrix rows.
struct OccupancyMeasure {
    Eigen::VectorXd lambda;
    int horizon_used = 0;
    int n_states = 0;
    int n_actions = 0;

    /// State marginal lambda_s = sum_a lambda(s,a).
    Eigen::VectorXd state_marginal() const;
};

/// Row-stochastic policy table pi(a|s), |S| x |A|.
struct PolicyTable {
    Eigen::MatrixXd pi;
};

/// Throws std::invalid_argument when model, kernel and policy shapes disagree
/// or stochasticity constraints are violated.
void validate_mdp_inputs(const MdpModel& model, const TransitionMatrix& P,
                         const PolicyTable& policy);

/// Occupancy by exact forward propagation of the state-action distribution for
/// t = 0..K; truncation error is bounded by gamma^(K+1)/(1-gamma) in l1 norm.
OccupancyMeasure compute_occupancy(const MdpModel& model, const TransitionMatrix& P,
                                   const PolicyTable& policy, int K);

/// Fixed-policy Q-values for an arbitrary per-step cost vector z (flat |S||A|):
/// Q = z + gamma * P * E_pi * Q, solved densely when |S||A| <= 4096 and by
/// value iteration to max-norm residual 1e-9 otherwise.
Eigen::MatrixXd solve_q_values(const MdpModel& model, const TransitionMatrix& P,
                               const PolicyTable& policy, const Eigen::VectorXd& z);

/// Gradient of the truncated policy value V(alpha; z) = <z, lambda(alpha)> with
/// respect to softmax logits, via the policy gradient identity
/// grad = sum_{s,a} Q(s,a) lambda(s,a) grad log pi(a|s).
/// Returns an |S| x |A| matrix aligned with the logit layout.
Eigen::MatrixXd grad_v(const MdpModel& model, const TransitionMatrix& P,
                       const PolicyTable& policy, const Eigen::VectorXd& z, int K);

struct ViResult {
    Eigen::VectorXd values;    // optimal V per state
    Eigen::VectorXi greedy;    // an argmin action per state
    int iterations = 0;
};

/// Cost-minimizing value iteration on the untruncated discounted objective.
/// Runs until the sup-norm Bellman update falls below tol.
ViResult value_iteration(const MdpModel& model, const TransitionMatrix& P,
                         double tol = 1e-9);

/// Exact untruncated value of a fixed stochastic policy (dense linear solve);
/// used as an oracle for policies produced by value_iteration.
double policy_value(const MdpModel& model, const TransitionMatrix& P,
                    const PolicyTable& policy);

/// Point-mass policy table from a per-state action choice.
PolicyTable deterministic_policy(const Eigen::VectorXi& actions, int n_actions);

}  // namespace brmdp
