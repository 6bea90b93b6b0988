#include "brmdp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <utility>

#include "brmdp/rng.hpp"

namespace brmdp {

namespace {

/// One contiguous block of projected-gradient iterations against a fixed
/// posterior; appends to the trace and advances the global iteration counter.
void run_block(const MdpModel& model, const KernelFamily& family, const Posterior& post,
               const LossSpec& spec, const RiskMeasure& measure, const RunConfig& cfg,
               int n_iters, int episode, std::uint64_t block_seed, int& global_iter,
               PolicyParams& params, TrainTrace& trace,
               std::vector<PolicyParams>* snapshots) {
    for (int t = 0; t < n_iters; ++t) {
        const GradientEstimate est = assemble_gradient(
            model, family, post, params, spec, measure, cfg.grad_cfg,
            mix_seed({block_seed, static_cast<std::uint64_t>(t)}));
        TraceRow row;
        row.iter = global_iter;
        row.objective = est.rho;
        row.grad_norm = est.g_hat.norm();
        row.episode = episode;
        params.alpha -= cfg.step * est.g_hat;
        params = project_w(std::move(params));
        trace.rows.push_back(row);
        if (snapshots) snapshots->push_back(params);
        if (cfg.observer) cfg.observer(global_iter, params, row.objective, row.grad_norm);
        ++global_iter;
    }
}

PolicyParams starting_point(const MdpModel& model, const std::optional<PolicyParams>& init) {
    PolicyParams params;
    if (init) {
        params = *init;
    } else {
        params.alpha = Eigen::MatrixXd::Zero(model.n_states, model.n_actions);
    }
    return project_w(std::move(params));
}

}  // namespace

TrainResult br_pg(const MdpModel& model, const KernelFamily& family, const Posterior& post,
                  const LossSpec& spec, const RiskMeasure& measure, const RunConfig& cfg,
                  std::optional<PolicyParams> init) {
    if (cfg.iters < 1) throw std::invalid_argument("br_pg: iters must be >= 1");
    if (!(cfg.step >= 0.0) || !std::isfinite(cfg.step))
        throw std::invalid_argument("br_pg: step must be finite and >= 0");

    TrainResult res;
    PolicyParams params = starting_point(model, init);
    std::vector<PolicyParams> snapshots;
    std::vector<PolicyParams>* snap_ptr =
        cfg.output_rule == OutputRule::uniform_random ? &snapshots : nullptr;
    int global_iter = 0;
    try {
        run_block(model, family, post, spec, measure, cfg, cfg.iters, /*episode=*/0,
                  mix_seed({cfg.seed, 1, 0}), global_iter, params, res.trace, snap_ptr);
    } catch (const std::exception& e) {
        res.completed = false;
        res.error = e.what();
        res.params = std::move(params);
        return res;
    }
    if (cfg.output_rule == OutputRule::uniform_random) {
        auto rng = make_rng(mix_seed({cfg.seed, 7}));
        std::uniform_int_distribution<std::size_t> pick(0, snapshots.size() - 1);
        res.params = snapshots[pick(rng)];
    } else {
        res.params = std::move(params);
    }
    return res;
}

TrainResult episodic_br_pg(const MdpModel& model, const KernelFamily& family,
                           const EpisodeEnvironment& env, Posterior prior,
                           const Eigen::VectorXd& true_theta, const LossSpec& spec,
                           const RiskMeasure& measure, const EpisodeSchedule& schedule,
                           const RunConfig& cfg, std::optional<PolicyParams> init) {
    if (schedule.n_episodes < 1)
        throw std::invalid_argument("episodic_br_pg: n_episodes must be >= 1");
    if (static_cast<int>(schedule.iters_per_episode.size()) != schedule.n_episodes)
        throw std::invalid_argument(
            "episodic_br_pg: iters_per_episode must list one count per episode");
    for (int t : schedule.iters_per_episode)
        if (t < 1) throw std::invalid_argument("episodic_br_pg: every t_i must be >= 1");
    if (schedule.batch_size < 0)
        throw std::invalid_argument("episodic_br_pg: batch_size must be >= 0");
    if (!(cfg.step >= 0.0) || !std::isfinite(cfg.step))
        throw std::invalid_argument("episodic_br_pg: step must be finite and >= 0");

    TrainResult res;
    PolicyParams params = starting_point(model, init);
    int global_iter = 0;
    try {
        for (int i = 0; i < schedule.n_episodes; ++i) {
            if (schedule.batch_size > 0) {
                const TransitionDataset batch = env.collect(
                    to_table(params), true_theta, schedule.batch_size,
                    mix_seed({cfg.seed, 2, static_cast<std::uint64_t>(i)}));
                prior = posterior_update(std::move(prior), batch);
            }
            res.trace.episode_posteriors.push_back(prior);
            // Episode i reuses seed lane 1 at index i so a single-episode run with
            // an empty batch reproduces br_pg on the prior exactly.
            run_block(model, family, prior, spec, measure, cfg,
                      schedule.iters_per_episode[i], /*episode=*/i + 1,
                      mix_seed({cfg.seed, 1, static_cast<std::uint64_t>(i)}), global_iter,
                      params, res.trace, nullptr);
        }
    } catch (const std::exception& e) {
        res.completed = false;
        res.error = e.what();
    }
    res.params = std::move(params);
    return res;
}

std::vector<int> schedule_iters(double epsilon, const std::vector<double>& lipschitz_estimates,
                                const std::vector<double>& gap_estimates,
                                double proportionality, int max_iters) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("schedule_iters: epsilon must be > 0");
    if (!(proportionality > 0.0) || max_iters < 1)
        throw std::invalid_argument("schedule_iters: bad proportionality or max_iters");
    if (lipschitz_estimates.size() != gap_estimates.size())
        throw std::invalid_argument("schedule_iters: estimate lists differ in length");
    std::vector<int> out;
    out.reserve(lipschitz_estimates.size());
    for (std::size_t i = 0; i < lipschitz_estimates.size(); ++i) {
        const double l_i = lipschitz_estimates[i], gap_i = gap_estimates[i];
        if (!(l_i > 0.0) || !(gap_i > 0.0))
            throw std::invalid_argument("schedule_iters: estimates must be positive");
        const double raw = proportionality * l_i * gap_i / (epsilon * epsilon);
        const long long rounded = std::llround(raw);
        out.push_back(static_cast<int>(std::clamp<long long>(rounded, 1, max_iters)));
    }
    return out;
}

std::string trace_to_csv(const TrainTrace& trace) {
    std::string out = "iter,objective,grad_norm,episode\n";
    char line[160];
    for (const TraceRow& row : trace.rows) {
        std::snprintf(line, sizeof(line), "%d,%.12g,%.12g,%d\n", row.iter, row.objective,
                      row.grad_norm, row.episode);
        out += line;
    }
    return out;
}

}  // namespace brmdp
