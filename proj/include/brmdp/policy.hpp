#pragma once

#include <Eigen/Dense>

#include "brmdp/mdp.hpp"

namespace brmdp {

/// Tabular softmax policy logits constrained to the Euclidean ball of radius
/// bound_w (the bounded convex parameter domain W).
struct PolicyParams {
    Eigen::MatrixXd alpha;   // |S| x |A| logits
    double bound_w = 50.0;
};

/// Row-wise softmax with max-subtraction; rows are strictly positive and sum to 1.
PolicyTable to_table(const PolicyParams& params);

/// Gradient of log pi(a|s) with respect to every logit:
/// d/d alpha[s,a'] = 1{a'=a} - pi(a'|s), zero on rows other than s.
Eigen::MatrixXd log_policy_grad(const PolicyParams& params, int s, int a);

/// Euclidean projection of the flattened logits onto the ball of radius bound_w.
PolicyParams project_w(PolicyParams params);

}  // namespace brmdp
