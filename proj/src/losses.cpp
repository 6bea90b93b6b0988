#include "brmdp/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace brmdp {

namespace {

/// J with the configured floor applied (no renormalization here; the floor only
/// guards the logarithms).
Eigen::VectorXd floored_target(const LossSpec& spec) {
    if (spec.j_floor <= 0.0) return spec.target_state_dist;
    return spec.target_state_dist.cwiseMax(spec.j_floor);
}

void check_kl_domain(const LossSpec& spec, const Eigen::VectorXd& state_marginal) {
    if (spec.j_floor > 0.0) return;
    for (Eigen::Index s = 0; s < state_marginal.size(); ++s)
        if (state_marginal(s) > 0.0 && spec.target_state_dist(s) <= 0.0)
            throw std::domain_error(
                "kl loss: occupancy puts mass on a state with zero target probability");
}

}  // namespace

double eval_loss(const LossSpec& spec, const OccupancyMeasure& occ) {
    switch (spec.kind) {
        case LossKind::linear:
            return spec.cost_vec.dot(occ.lambda);
        case LossKind::cmdp_lagrangian:
            // expectation form of the penalty: <lambda, c> + l (<lambda, d> - D)
            return spec.cost_vec.dot(occ.lambda) +
                   spec.multiplier * (spec.penalty_vec.dot(occ.lambda) - spec.budget);
        case LossKind::kl_imitation: {
            const Eigen::VectorXd lam_s = occ.state_marginal();
            check_kl_domain(spec, lam_s);
            const Eigen::VectorXd J = floored_target(spec);
            const double one_minus_gamma = 1.0 - spec.gamma;
            double total = 0.0;
            for (Eigen::Index s = 0; s < lam_s.size(); ++s) {
                const double w = one_minus_gamma * lam_s(s);
                if (w > 0.0) total += w * std::log(w / J(s));
            }
            return total;
        }
    }
    throw std::logic_error("eval_loss: unhandled loss kind");
}

Eigen::VectorXd grad_loss(const LossSpec& spec, const OccupancyMeasure& occ) {
    switch (spec.kind) {
        case LossKind::linear:
            return spec.cost_vec;
        case LossKind::cmdp_lagrangian:
            return spec.cost_vec + spec.multiplier * spec.penalty_vec;
        case LossKind::kl_imitation: {
            const Eigen::VectorXd lam_s = occ.state_marginal();
            check_kl_domain(spec, lam_s);
            const Eigen::VectorXd J = floored_target(spec);
            const double one_minus_gamma = 1.0 - spec.gamma;
            Eigen::VectorXd grad(occ.lambda.size());
            for (int s = 0; s < occ.n_states; ++s) {
                // the log term diverges as lambda_s -> 0; clamp far below any
                // occupancy reachable from a strictly positive softmax policy
                const double w = std::max(one_minus_gamma * lam_s(s), 1e-300);
                const double g = one_minus_gamma * (std::log(w / J(s)) + 1.0);
                grad.segment(static_cast<Eigen::Index>(s) * occ.n_actions, occ.n_actions)
                    .setConstant(g);
            }
            return grad;
        }
    }
    throw std::logic_error("grad_loss: unhandled loss kind");
}

bool use_direct_gradient(const LossSpec& spec) {
    return spec.kind != LossKind::kl_imitation;
}

double conjugate(const LossSpec& spec, const Eigen::VectorXd& z) {
    if (use_direct_gradient(spec)) {
        // F* is an indicator for these kinds; report the distance of z from the
        // admissible point instead of an infinite value.
        Eigen::VectorXd effective = spec.cost_vec;
        if (spec.kind == LossKind::cmdp_lagrangian)
            effective += spec.multiplier * spec.penalty_vec;
        return (z - effective).norm();
    }
    const Eigen::VectorXd J = floored_target(spec);
    if (z.size() != J.size())
        throw std::invalid_argument("conjugate: z must be a state-space vector for kl");
    const double one_minus_gamma = 1.0 - spec.gamma;
    const Eigen::VectorXd scaled = z / one_minus_gamma;
    const double zmax = scaled.maxCoeff();
    double acc = 0.0;
    for (Eigen::Index s = 0; s < J.size(); ++s)
        acc += J(s) * std::exp(scaled(s) - zmax);
    return zmax + std::log(acc);
}

Eigen::VectorXd conjugate_grad(const LossSpec& spec, const Eigen::VectorXd& z) {
    if (use_direct_gradient(spec))
        throw std::logic_error(
            "conjugate_grad: loss kind is flagged use_direct_gradient; "
            "the variational path does not apply");
    const Eigen::VectorXd J = floored_target(spec);
    if (z.size() != J.size())
        throw std::invalid_argument("conjugate_grad: z must be a state-space vector");
    const double one_minus_gamma = 1.0 - spec.gamma;
    const Eigen::VectorXd scaled = z / one_minus_gamma;
    const double zmax = scaled.maxCoeff();
    Eigen::VectorXd q(J.size());
    for (Eigen::Index s = 0; s < J.size(); ++s) q(s) = J(s) * std::exp(scaled(s) - zmax);
    q /= q.sum();
    // argmax state distribution mapped back to state occupancy scale
    return q / one_minus_gamma;
}

}  // namespace brmdp
