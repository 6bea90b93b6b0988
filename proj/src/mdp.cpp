#include "brmdp/mdp.hpp"

#include <cmath>
#include <stdexcept>

namespace brmdp {

Eigen::VectorXd OccupancyMeasure::state_marginal() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n_states);
    for (int s = 0; s < n_states; ++s) {
        m(s) = lambda.segment(static_cast<Eigen::Index>(s) * n_actions, n_actions).sum();
    }
    return m;
}

void validate_mdp_inputs(const MdpModel& model, const TransitionMatrix& P,
                         const PolicyTable& policy) {
    const int S = model.n_states, A = model.n_actions;
    if (S <= 0 || A <= 0) throw std::invalid_argument("mdp: nonpositive state/action count");
    if (!(model.gamma > 0.0 && model.gamma < 1.0))
        throw std::invalid_argument("mdp: gamma must lie strictly inside (0,1)");
    if (model.init_dist.size() != S)
        throw std::invalid_argument("mdp: init_dist length mismatch");
    if (model.init_dist.minCoeff() < 0.0 || std::abs(model.init_dist.sum() - 1.0) > 1e-12)
        throw std::invalid_argument("mdp: init_dist is not a probability vector");
    if (P.probs.rows() != static_cast<Eigen::Index>(S) * A || P.probs.cols() != S)
        throw std::invalid_argument("mdp: transition matrix shape mismatch");
    if (policy.pi.rows() != S || policy.pi.cols() != A)
        throw std::invalid_argument("mdp: policy table shape mismatch");
    for (Eigen::Index row = 0; row < P.probs.rows(); ++row) {
        if (P.probs.row(row).minCoeff() < -1e-12 ||
            std::abs(P.probs.row(row).sum() - 1.0) > 1e-12)
            throw std::invalid_argument("mdp: transition row is not a probability vector");
    }
    for (int s = 0; s < S; ++s) {
        if (std::abs(policy.pi.row(s).sum() - 1.0) > 1e-12 || policy.pi.row(s).minCoeff() < 0.0)
            throw std::invalid_argument("mdp: policy row is not a probability vector");
    }
}

OccupancyMeasure compute_occupancy(const MdpModel& model, const TransitionMatrix& P,
                                   const PolicyTable& policy, int K) {
    if (K < 0) throw std::invalid_argument("compute_occupancy: K must be >= 0");
    validate_mdp_inputs(model, P, policy);
    const int S = model.n_states, A = model.n_actions;

    OccupancyMeasure occ;
    occ.horizon_used = K;
    occ.n_states = S;
    occ.n_actions = A;
    occ.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S) * A);

    Eigen::VectorXd state_dist = model.init_dist;      // distribution of s_t
    Eigen::VectorXd sa_dist(static_cast<Eigen::Index>(S) * A);
    double discount = 1.0;
    for (int t = 0; t <= K; ++t) {
        for (int s = 0; s < S; ++s)
            sa_dist.segment(static_cast<Eigen::Index>(s) * A, A) =
                state_dist(s) * policy.pi.row(s).transpose();
        occ.lambda += discount * sa_dist;
        discount *= model.gamma;
        if (t < K) state_dist = P.probs.transpose() * sa_dist;
    }
    return occ;
}

Eigen::MatrixXd solve_q_values(const MdpModel& model, const TransitionMatrix& P,
                               const PolicyTable& policy, const Eigen::VectorXd& z) {
    validate_mdp_inputs(model, P, policy);
    const int S = model.n_states, A = model.n_actions;
    const Eigen::Index SA = static_cast<Eigen::Index>(S) * A;
    if (z.size() != SA) throw std::invalid_argument("solve_q_values: z length mismatch");
    if (!z.allFinite()) throw std::invalid_argument("solve_q_values: z has non-finite entries");

    if (SA <= 4096) {
        // dense route: (I - gamma * P * E_pi) Q = z, with E_pi(s', s'A+a') = pi(a'|s')
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(S, SA);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) E(s, static_cast<Eigen::Index>(s) * A + a) = policy.pi(s, a);
        Eigen::MatrixXd M = Eigen::MatrixXd::Identity(SA, SA) - model.gamma * (P.probs * E);
        Eigen::VectorXd q = M.partialPivLu().solve(z);
        return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(q.data(), S, A);
    }

    // iterative route for large products: Q <- z + gamma * P * (pi-average of Q)
    Eigen::VectorXd q = Eigen::VectorXd::Zero(SA);
    Eigen::VectorXd v(S);
    for (int it = 0; it < 1000000; ++it) {
        for (int s = 0; s < S; ++s)
            v(s) = policy.pi.row(s).dot(
                q.segment(static_cast<Eigen::Index>(s) * A, A).transpose());
        Eigen::VectorXd next = z + model.gamma * (P.probs * v);
        const double resid = (next - q).cwiseAbs().maxCoeff();
        q = next;
        if (resid <= 1e-9) break;
    }
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(q.data(), S, A);
}

Eigen::MatrixXd grad_v(const MdpModel& model, const TransitionMatrix& P,
                       const PolicyTable& policy, const Eigen::VectorXd& z, int K) {
    const int S = model.n_states, A = model.n_actions;
    const OccupancyMeasure occ = compute_occupancy(model, P, policy, K);
    const Eigen::MatrixXd Q = solve_q_values(model, P, policy, z);

    // With row sums r(s) = sum_a Q(s,a) lambda(s,a), the score-function identity
    // collapses the double sum to grad(s,a) = Q(s,a) lambda(s,a) - pi(a|s) r(s).
    Eigen::MatrixXd grad(S, A);
    for (int s = 0; s < S; ++s) {
        Eigen::RowVectorXd ql =
            Q.row(s).cwiseProduct(
                occ.lambda.segment(static_cast<Eigen::Index>(s) * A, A).transpose());
        grad.row(s) = ql - policy.pi.row(s) * ql.sum();
    }
    return grad;
}

ViResult value_iteration(const MdpModel& model, const TransitionMatrix& P, double tol) {
    const int S = model.n_states, A = model.n_actions;
    if (P.probs.rows() != static_cast<Eigen::Index>(S) * A || P.probs.cols() != S)
        throw std::invalid_argument("value_iteration: transition matrix shape mismatch");

    ViResult res;
    res.values = Eigen::VectorXd::Zero(S);
    Eigen::MatrixXd q(S, A);
    for (int it = 0;; ++it) {
        Eigen::VectorXd pv = P.probs * res.values;  // length SA
        for (int s = 0; s < S; ++s)
            q.row(s) = model.expected_cost.row(s) +
                       model.gamma * pv.segment(static_cast<Eigen::Index>(s) * A, A).transpose();
        Eigen::VectorXd next(S);
        for (int s = 0; s < S; ++s) next(s) = q.row(s).minCoeff();
        const double resid = (next - res.values).cwiseAbs().maxCoeff();
        res.values = next;
        if (resid < tol) {
            res.iterations = it + 1;
            break;
        }
    }
    res.greedy.resize(S);
    for (int s = 0; s < S; ++s) {
        int best = 0;
        q.row(s).minCoeff(&best);
        res.greedy(s) = best;
    }
    return res;
}

double policy_value(const MdpModel& model, const TransitionMatrix& P,
                    const PolicyTable& policy) {
    const int S = model.n_states, A = model.n_actions;
    // state-to-state kernel and per-state cost under the fixed policy
    Eigen::MatrixXd Pp = Eigen::MatrixXd::Zero(S, S);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(S);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            Pp.row(s) += policy.pi(s, a) * P.probs.row(static_cast<Eigen::Index>(s) * A + a);
            c(s) += policy.pi(s, a) * model.expected_cost(s, a);
        }
    }
    Eigen::VectorXd v =
        (Eigen::MatrixXd::Identity(S, S) - model.gamma * Pp).partialPivLu().solve(c);
    return model.init_dist.dot(v);
}

PolicyTable deterministic_policy(const Eigen::VectorXi& actions, int n_actions) {
    PolicyTable table;
    table.pi = Eigen::MatrixXd::Zero(actions.size(), n_actions);
    for (Eigen::Index s = 0; s < actions.size(); ++s) {
        if (actions(s) < 0 || actions(s) >= n_actions)
            throw std::invalid_argument("deterministic_policy: action index out of range");
        table.pi(s, actions(s)) = 1.0;
    }
    return table;
}

}  // namespace brmdp
