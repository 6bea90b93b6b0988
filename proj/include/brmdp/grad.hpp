#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "brmdp/bayes.hpp"
#include "brmdp/losses.hpp"
#include "brmdp/mdp.hpp"
#include "brmdp/policy.hpp"
#include "brmdp/risk.hpp"

namespace brmdp {

/// Kernel (and, when the per-step costs depend on theta, the cost table) for
/// one concrete parameter draw.
struct ThetaKernel {
    TransitionMatrix P;
    std::optional<Eigen::MatrixXd> cost_override;  // |S| x |A| expected costs
};

/// Parametric family theta -> kernel; implementations are pure and cheap enough
/// to call once per posterior sample.
class KernelFamily {
public:
    virtual ~KernelFamily() = default;
    virtual ThetaKernel at(const Eigen::VectorXd& theta) const = 0;
};

enum class GradMethod { direct, variational, zeroth_order };

struct GradConfig {
    GradMethod method = GradMethod::direct;
    int var_iters = 2000;   // saddle iterations of the variational scheme
    double nu = 1e-3;       // Gaussian smoothing radius
    int m = 100;            // smoothing directions
    int r = 30;             // posterior samples per gradient estimate
    int K = 130;            // occupancy truncation horizon
};

/// LossSpec with the theta-dependent cost table substituted in (linear / cmdp
/// kinds only; kl ignores costs).
LossSpec effective_spec(const LossSpec& spec, const ThetaKernel& kernel);

/// C(alpha, theta) = F(lambda(alpha, theta)) at truncation horizon K.
double eval_c(const MdpModel& model, const ThetaKernel& kernel, const PolicyParams& params,
              const LossSpec& spec, int K);

/// Chain rule: z = grad_lambda F at the current occupancy, then the policy
/// gradient of V(alpha; z).
Eigen::MatrixXd grad_c_direct(const MdpModel& model, const ThetaKernel& kernel,
                              const PolicyParams& params, const LossSpec& spec, int K);

/// Saddle iteration on the Fenchel conjugate (state-space dual variable):
///   z <- z + a_t [lambda_state - grad F*(z)],  x <- x - b_t [grad_alpha V(alpha; z) + x]
/// with a_t = b_t = 1/sqrt(t+1); returns -x after var_iters steps. Only valid
/// for losses with a usable conjugate (kl); others throw std::logic_error.
Eigen::MatrixXd grad_c_variational(const MdpModel& model, const ThetaKernel& kernel,
                                   const PolicyParams& params, const LossSpec& spec,
                                   const GradConfig& cfg);

/// Gaussian-smoothing estimator of the gradient of an arbitrary scalar function
/// of the logits: mean over m directions u of [f(alpha + nu u) - f(alpha)]/nu * u.
Eigen::MatrixXd gaussian_smoothed_gradient(
    const std::function<double(const Eigen::MatrixXd&)>& f, const Eigen::MatrixXd& alpha,
    double nu, int m, std::mt19937_64& rng);

/// Zeroth-order estimate of grad_alpha C(alpha, theta); deterministic given seed.
Eigen::MatrixXd grad_c_zeroth_order(const MdpModel& model, const ThetaKernel& kernel,
                                    const PolicyParams& params, const LossSpec& spec,
                                    const GradConfig& cfg, std::uint64_t seed);

struct GradientEstimate {
    Eigen::MatrixXd g_hat;            // |S| x |A|
    Eigen::VectorXd per_sample_norms; // ||grad C(alpha, theta_k)||
    Eigen::VectorXd c_values;         // C(alpha, theta_k)
    double rho = 0.0;                 // risk functional of the sampled C values
    bool envelope_converged = true;   // false flags a degraded-quality estimate
};

/// Full Bayesian-risk policy gradient estimator: r posterior draws, envelope
/// weights xi* from the risk measure, weighted average (1/r) sum xi_k grad C_k.
GradientEstimate assemble_gradient(const MdpModel& model, const KernelFamily& family,
                                   const Posterior& post, const PolicyParams& params,
                                   const LossSpec& spec, const RiskMeasure& measure,
                                   const GradConfig& cfg, std::uint64_t seed);

}  // namespace brmdp
