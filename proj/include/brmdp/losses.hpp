#pragma once

#include <Eigen/Dense>

#include "brmdp/mdp.hpp"

namespace brmdp {

enum class LossKind { linear, kl_imitation, cmdp_lagrangian };

/// Convex loss F(lambda) of the occupancy measure. Fields are used per kind:
/// linear / cmdp read cost_vec (and cmdp penalty_vec, multiplier, budget);
/// kl reads target_state_dist J, gamma and the optional positivity floor.
struct LossSpec {
    LossKind kind = LossKind::linear;
    Eigen::VectorXd cost_vec;            // flat |S||A| (linear, cmdp)
    Eigen::VectorXd penalty_vec;         // flat |S||A| (cmdp)
    double multiplier = 0.0;             // cmdp Lagrange weight, fixed configuration
    double budget = 0.0;                 // cmdp constraint level D
    Eigen::VectorXd target_state_dist;   // length |S| (kl)
    double gamma = 0.97;                 // (1-gamma) normalization used by kl
    double j_floor = 0.0;                // 0 => strict domain error on J(s)=0
};

/// F evaluated at a (truncated) occupancy measure.
double eval_loss(const LossSpec& spec, const OccupancyMeasure& occ);

/// Exact analytic gradient of F with respect to lambda, flat |S||A|:
/// linear -> c; cmdp -> c + multiplier * d;
/// kl -> per (s,a): (1-gamma) [log((1-gamma) lambda_s / J(s)) + 1].
Eigen::VectorXd grad_loss(const LossSpec& spec, const OccupancyMeasure& occ);

/// True when F* is an indicator (linear, cmdp) and the gradient of C should be
/// computed by the direct chain rule rather than the variational saddle.
bool use_direct_gradient(const LossSpec& spec);

/// Fenchel conjugate. For kl the argument z lives in state space (length |S|)
/// and F*(z) = log sum_s J(s) exp(z_s/(1-gamma)), the log-partition closed form.
/// For direct-gradient kinds evaluation returns the constraint residual
/// ||z - c||_2 instead of an (infinite) indicator value.
double conjugate(const LossSpec& spec, const Eigen::VectorXd& z);

/// Gradient of the kl conjugate in state space: softmax weights scaled by
/// 1/(1-gamma). Throws std::logic_error for direct-gradient kinds.
Eigen::VectorXd conjugate_grad(const LossSpec& spec, const Eigen::VectorXd& z);

}  // namespace brmdp
