#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brmdp/bayes.hpp"
#include "brmdp/frozen_lake.hpp"
#include "brmdp/grad.hpp"
#include "brmdp/losses.hpp"
#include "brmdp/mdp.hpp"
#include "brmdp/optimizer.hpp"
#include "brmdp/policy.hpp"
#include "brmdp/risk.hpp"

namespace brmdp {

/// One training method of an experiment: the risk-sensitive policy gradient at
/// some risk setting, the plug-in baseline, or the episodic variant.
struct MethodConfig {
    std::string name;            // row label, also used in trace file names
    std::string type = "br_pg";  // "br_pg" | "empirical" | "episodic"
    RiskMeasure measure;
    int episodes = 0;            // episodic only; 0 => experiment default
    int iters_per_episode = 0;   // episodic only; 0 => experiment default
};

struct ExperimentConfig {
    std::string mode = "run";  // "run" | "episodic" | "imitate"
    std::string map_path;      // empty => built-in default map
    double theta_s = 0.3;      // true slip probability
    double theta_e = 0.02;     // true escape probability
    double gamma = 0.97;
    int horizon = 130;         // occupancy truncation K
    std::vector<int> n_data = {50};
    std::uint64_t seed = 20240;
    int reps = 50;
    int iters = 100;
    double step = 0.5;
    int r = 30;                // posterior samples per gradient estimate
    int workers = 1;
    std::string out_dir = "out";
    std::vector<MethodConfig> methods;
    // episodic mode defaults
    int episodes = 20;
    int iters_per_episode = 5;
    int batch_size = 5;
    // imitation mode
    double j_floor = 1e-12;    // floor applied to the expert target distribution
    bool write_traces = true;
    bool write_plots = true;
};

/// Parse a JSON experiment description; unknown keys are rejected so config
/// typos fail loudly. n_data accepts a scalar or an array.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct ReplicationResult {
    std::string method;
    int n_data = 0;
    int rep = 0;
    double true_loss = 0.0;  // loss of the output policy under the true kernel
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    TrainTrace trace;
    PolicyParams params;
};

struct ExperimentResults {
    ExperimentConfig cfg;
    std::vector<ReplicationResult> rows;  // method-major, then N, then replication
    double vi_optimum = 0.0;              // value-iteration oracle on the true kernel
};

/// Mean over i of max(0, x_i - mean(x))^2: the second moment of the upward
/// deviations, the paper-style robustness summary.
double positive_sided_variance(const std::vector<double>& losses);

/// Plug-in baseline: maximum-likelihood point estimate of the kernel parameters
/// (0.5 fallback on empty components), then plain policy gradient on that fixed
/// model — realized as the same loop with a point-mass posterior and the
/// expectation risk measure.
PolicyParams empirical_baseline(const TransitionDataset& data, const MdpModel& model,
                                const KernelFamily& family,
                                const std::vector<std::string>& components,
                                const LossSpec& spec, const RunConfig& run_cfg);

/// Run every method x data-size x replication cell of the experiment over a
/// worker pool. Results are keyed by cell index, so any pool size produces the
/// same rows. Throws std::runtime_error when more than 10% of cells fail.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

/// Loss of a policy snapshot under the config's true kernel and loss mode
/// (linear for run/episodic, imitation KL for imitate).
double evaluate_policy(const ExperimentConfig& cfg, const PolicyParams& params);

/// Summary table as CSV `method,N,beta,mean_loss,stderr,psv` (stderr = sample
/// standard deviation / sqrt(R); failed replications excluded).
std::string results_table_csv(const ExperimentResults& results);

/// Write table.csv, per-replication trace CSVs and (optionally) an SVG of the
/// per-iteration objective with 95% confidence bands into cfg.out_dir.
void emit_outputs(const ExperimentResults& results);

/// Flat-text policy snapshot: first line "n_states n_actions", then one row of
/// logits per state.
std::string policy_to_text(const PolicyParams& params);
PolicyParams policy_from_text(const std::string& text);

}  // namespace brmdp
