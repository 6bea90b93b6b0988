#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "brmdp/bayes.hpp"
#include "brmdp/grad.hpp"
#include "brmdp/losses.hpp"
#include "brmdp/mdp.hpp"
#include "brmdp/policy.hpp"
#include "brmdp/risk.hpp"

namespace brmdp {

enum class OutputRule { last_iterate, uniform_random };

struct RunConfig {
    int iters = 100;       // projected-gradient iterations T
    double step = 0.5;     // constant stepsize
    GradConfig grad_cfg;
    OutputRule output_rule = OutputRule::last_iterate;
    std::uint64_t seed = 0;
    /// Optional per-iteration hook (iterate index, post-update params,
    /// objective estimate at the pre-update iterate, gradient-estimate norm).
    std::function<void(int, const PolicyParams&, double, double)> observer;
};

struct TraceRow {
    int iter = 0;           // global iteration index, monotone across episodes
    double objective = 0.0; // risk functional of the sampled C values at alpha_t
    double grad_norm = 0.0;
    int episode = 0;        // 0 for the batch algorithm
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    std::vector<Posterior> episode_posteriors;  // state after each episode's update
};

struct TrainResult {
    PolicyParams params;
    TrainTrace trace;
    bool completed = true;   // false: an iteration threw; trace holds progress so far
    std::string error;
};

/// Batch Bayesian-risk policy gradient: T iterations of
///   sample theta_1..r ~ posterior, envelope weights xi*, g_hat = (1/r) sum xi_k grad C_k,
///   alpha <- Proj_W(alpha - step * g_hat),
/// returning the last iterate or a uniformly drawn one per output_rule.
/// Default start is the uniform policy (zero logits).
TrainResult br_pg(const MdpModel& model, const KernelFamily& family, const Posterior& post,
                  const LossSpec& spec, const RiskMeasure& measure, const RunConfig& cfg,
                  std::optional<PolicyParams> init = std::nullopt);

/// Data-collection hook: deploy a policy in the real environment (kernel at
/// true_theta), label each transition as a Bernoulli trial of a named kernel
/// component, and return the aggregated counts.
class EpisodeEnvironment {
public:
    virtual ~EpisodeEnvironment() = default;
    virtual TransitionDataset collect(const PolicyTable& policy,
                                      const Eigen::VectorXd& true_theta, int batch_size,
                                      std::uint64_t seed) const = 0;
};

struct EpisodeSchedule {
    int n_episodes = 1;
    std::vector<int> iters_per_episode;  // t_i, all >= 1
    int batch_size = 5;                  // labeled transitions collected per episode
};

/// Episodic extension: per episode deploy the current policy, update the
/// posterior with the collected counts, then run t_i warm-started iterations.
TrainResult episodic_br_pg(const MdpModel& model, const KernelFamily& family,
                           const EpisodeEnvironment& env, Posterior prior,
                           const Eigen::VectorXd& true_theta, const LossSpec& spec,
                           const RiskMeasure& measure, const EpisodeSchedule& schedule,
                           const RunConfig& cfg,
                           std::optional<PolicyParams> init = std::nullopt);

/// Theory-mode iteration counts: t_i = clamp(round(c * L_i * gap_i / epsilon^2), 1, max).
std::vector<int> schedule_iters(double epsilon, const std::vector<double>& lipschitz_estimates,
                                const std::vector<double>& gap_estimates,
                                double proportionality = 1.0, int max_iters = 10000);

/// TrainTrace rows as CSV with header `iter,objective,grad_norm,episode`.
std::string trace_to_csv(const TrainTrace& trace);

}  // namespace brmdp
