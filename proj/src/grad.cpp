#include "brmdp/grad.hpp"

#include <cmath>
#include <stdexcept>

#include "brmdp/rng.hpp"

namespace brmdp {

LossSpec effective_spec(const LossSpec& spec, const ThetaKernel& kernel) {
    LossSpec eff = spec;
    if (kernel.cost_override && spec.kind != LossKind::kl_imitation) {
        const Eigen::MatrixXd& c = *kernel.cost_override;
        Eigen::VectorXd flat(c.rows() * c.cols());
        for (Eigen::Index s = 0; s < c.rows(); ++s)
            for (Eigen::Index a = 0; a < c.cols(); ++a) flat(s * c.cols() + a) = c(s, a);
        eff.cost_vec = flat;
    }
    return eff;
}

double eval_c(const MdpModel& model, const ThetaKernel& kernel, const PolicyParams& params,
              const LossSpec& spec, int K) {
    const LossSpec eff = effective_spec(spec, kernel);
    const PolicyTable table = to_table(params);
    const OccupancyMeasure occ = compute_occupancy(model, kernel.P, table, K);
    return eval_loss(eff, occ);
}

Eigen::MatrixXd grad_c_direct(const MdpModel& model, const ThetaKernel& kernel,
                              const PolicyParams& params, const LossSpec& spec, int K) {
    const LossSpec eff = effective_spec(spec, kernel);
    const PolicyTable table = to_table(params);
    const OccupancyMeasure occ = compute_occupancy(model, kernel.P, table, K);
    const Eigen::VectorXd z = grad_loss(eff, occ);
    return grad_v(model, kernel.P, table, z, K);
}

namespace {

/// Broadcast a state-space dual vector over actions so that
/// <expand(z), lambda> = <z, state marginal of lambda>.
Eigen::VectorXd expand_state_dual(const Eigen::VectorXd& z, int n_actions) {
    Eigen::VectorXd out(z.size() * n_actions);
    for (Eigen::Index s = 0; s < z.size(); ++s)
        out.segment(s * n_actions, n_actions).setConstant(z(s));
    return out;
}

}  // namespace

Eigen::MatrixXd grad_c_variational(const MdpModel& model, const ThetaKernel& kernel,
                                   const PolicyParams& params, const LossSpec& spec,
                                   const GradConfig& cfg) {
    const LossSpec eff = effective_spec(spec, kernel);
    if (use_direct_gradient(eff))
        throw std::logic_error(
            "grad_c_variational: loss kind is flagged use_direct_gradient; "
            "use grad_c_direct instead");
    const int S = model.n_states, A = model.n_actions;
    const PolicyTable table = to_table(params);
    const OccupancyMeasure occ = compute_occupancy(model, kernel.P, table, cfg.K);
    const Eigen::VectorXd lam_state = occ.state_marginal();

    // Dual start: grad F at the uniform occupancy carrying the truncated mass.
    OccupancyMeasure uniform;
    uniform.horizon_used = cfg.K;
    uniform.n_states = S;
    uniform.n_actions = A;
    const double mass = (1.0 - std::pow(model.gamma, cfg.K + 1)) / (1.0 - model.gamma);
    uniform.lambda = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(S) * A,
                                               mass / (static_cast<double>(S) * A));
    const Eigen::VectorXd g0 = grad_loss(eff, uniform);
    Eigen::VectorXd z(S);
    for (int s = 0; s < S; ++s) z(s) = g0(static_cast<Eigen::Index>(s) * A);

    // Saddle iteration with decaying steps a_t = b_t = 1/sqrt(t+1); the primal
    // average x tracks -grad_alpha V(alpha; z_t) and is updated before z so the
    // first step lands exactly on -grad V(z_0).
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(S, A);
    for (int t = 0; t < cfg.var_iters; ++t) {
        const double step = 1.0 / std::sqrt(static_cast<double>(t) + 1.0);
        const Eigen::MatrixXd gz =
            grad_v(model, kernel.P, table, expand_state_dual(z, A), cfg.K);
        x -= step * (gz + x);
        z += step * (lam_state - conjugate_grad(eff, z));
    }
    return -x;
}

Eigen::MatrixXd gaussian_smoothed_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& alpha,
    double nu, int m, std::mt19937_64& rng) {
    if (nu <= 0.0)
        throw std::invalid_argument("gaussian_smoothed_gradient: nu must be positive");
    if (m <= 0) throw std::invalid_argument("gaussian_smoothed_gradient: m must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double base = f(alpha);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols());
    Eigen::MatrixXd u(alpha.rows(), alpha.cols());
    for (int i = 0; i < m; ++i) {
        for (Eigen::Index row = 0; row < u.rows(); ++row)
            for (Eigen::Index col = 0; col < u.cols(); ++col) u(row, col) = normal(rng);
        acc += ((f(alpha + nu * u) - base) / nu) * u;
    }
    return acc / static_cast<double>(m);
}

Eigen::MatrixXd grad_c_zeroth_order(const MdpModel& model, const ThetaKernel& kernel,
                                    const PolicyParams& params, const LossSpec& spec,
                                    const GradConfig& cfg, std::uint64_t seed) {
    auto rng = make_rng(seed);
    const auto f = [&](const Eigen::MatrixXd& logits) {
        PolicyParams shifted = params;
        shifted.alpha = logits;
        return eval_c(model, kernel, shifted, spec, cfg.K);
    };
    return gaussian_smoothed_gradient(f, params.alpha, cfg.nu, cfg.m, rng);
}

GradientEstimate assemble_gradient(const MdpModel& model, const KernelFamily& family,
                                   const Posterior& post, const PolicyParams& params,
                                   const LossSpec& spec, const RiskMeasure& measure,
                                   const GradConfig& cfg, std::uint64_t seed) {
    if (cfg.r <= 0) throw std::invalid_argument("assemble_gradient: r must be positive");
    const std::vector<Eigen::VectorXd> thetas =
        sample_theta(post, cfg.r, mix_seed({seed, 1}));

    GradientEstimate est;
    est.c_values.resize(cfg.r);
    est.per_sample_norms.resize(cfg.r);
    est.g_hat = Eigen::MatrixXd::Zero(model.n_states, model.n_actions);

    std::vector<Eigen::MatrixXd> grads(cfg.r);
    for (int k = 0; k < cfg.r; ++k) {
        const ThetaKernel kernel = family.at(thetas[k]);
        est.c_values(k) = eval_c(model, kernel, params, spec, cfg.K);
        switch (cfg.method) {
            case GradMethod::direct:
                grads[k] = grad_c_direct(model, kernel, params, spec, cfg.K);
                break;
            case GradMethod::variational:
                grads[k] = grad_c_variational(model, kernel, params, spec, cfg);
                break;
            case GradMethod::zeroth_order:
                grads[k] = grad_c_zeroth_order(model, kernel, params, spec, cfg,
                                               mix_seed({seed, 2, static_cast<std::uint64_t>(k)}));
                break;
        }
        est.per_sample_norms(k) = grads[k].norm();
    }

    const EnvelopeSolution env = envelope_weights(est.c_values, measure);
    est.rho = env.rho_value;
    est.envelope_converged = env.converged;
    for (int k = 0; k < cfg.r; ++k) est.g_hat += env.xi(k) * grads[k];
    est.g_hat /= static_cast<double>(cfg.r);
    return est;
}

}  // namespace brmdp
