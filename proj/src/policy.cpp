#include "brmdp/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace brmdp {

PolicyTable to_table(const PolicyParams& params) {
    if (!params.alpha.allFinite())
        throw std::invalid_argument("to_table: non-finite logits");
    const Eigen::Index S = params.alpha.rows(), A = params.alpha.cols();
    PolicyTable table;
    table.pi.resize(S, A);
    for (Eigen::Index s = 0; s < S; ++s) {
        const Eigen::RowVectorXd shifted =
            params.alpha.row(s).array() - params.alpha.row(s).maxCoeff();
        const Eigen::RowVectorXd e = shifted.array().exp();
        table.pi.row(s) = e / e.sum();
    }
    return table;
}

Eigen::MatrixXd log_policy_grad(const PolicyParams& params, int s, int a) {
    const Eigen::Index S = params.alpha.rows(), A = params.alpha.cols();
    if (s < 0 || s >= S || a < 0 || a >= A)
        throw std::out_of_range("log_policy_grad: state or action index out of range");
    const PolicyTable table = to_table(params);
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(S, A);
    grad.row(s) = -table.pi.row(s);
    grad(s, a) += 1.0;
    return grad;
}

PolicyParams project_w(PolicyParams params) {
    const double norm = params.alpha.norm();
    if (norm > params.bound_w && norm > 0.0)
        params.alpha *= params.bound_w / norm;
    return params;
}

}  // namespace brmdp
