#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "brmdp/bench.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    int reps = 0;
    int workers = 0;
    bool save_policies = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "override the config's base seed");
    cmd->add_option("--reps", flags.reps, "override the replication count");
    cmd->add_option("--out", flags.out_dir, "override the output directory");
    cmd->add_option("--workers", flags.workers, "override the worker-pool size");
    cmd->add_flag("--save-policies", flags.save_policies,
                  "also write policy_<method>_<rep>.txt logit snapshots");
}

void run_mode(CLI::App* cmd, const CommonFlags& flags, const std::string& mode) {
    brmdp::ExperimentConfig cfg = brmdp::load_config(flags.config);
    cfg.mode = mode;
    if (cmd->count("--seed")) cfg.seed = flags.seed;
    if (cmd->count("--reps")) cfg.reps = flags.reps;
    if (cmd->count("--out")) cfg.out_dir = flags.out_dir;
    if (cmd->count("--workers")) cfg.workers = flags.workers;

    const brmdp::ExperimentResults results = brmdp::run_experiment(cfg);
    brmdp::emit_outputs(results);
    if (flags.save_policies) {
        const bool multi_n = cfg.n_data.size() > 1;
        for (const brmdp::ReplicationResult& res : results.rows) {
            if (!res.ok) continue;
            std::ostringstream name;
            name << cfg.out_dir << "/policy_" << res.method;
            if (multi_n) name << "_N" << res.n_data;
            name << "_" << res.rep << ".txt";
            std::ofstream out(name.str(), std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + name.str());
            out << brmdp::policy_to_text(res.params);
        }
    }
    std::printf("optimal value (value iteration, true kernel): %.6f\n", results.vi_optimum);
    std::fputs(brmdp::results_table_csv(results).c_str(), stdout);
    std::printf("outputs written to %s\n", cfg.out_dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian-risk policy optimization benchmarks on the 5x5 lake"};
    app.require_subcommand(1);

    CommonFlags run_flags, episodic_flags, imitate_flags;
    CLI::App* cmd_run =
        app.add_subcommand("run", "batch-data comparison of risk settings and baseline");
    add_common(cmd_run, run_flags);
    CLI::App* cmd_episodic =
        app.add_subcommand("episodic", "deploy-collect-update training schedules");
    add_common(cmd_episodic, episodic_flags);
    CLI::App* cmd_imitate =
        app.add_subcommand("imitate", "occupancy-matching against the greedy expert");
    add_common(cmd_imitate, imitate_flags);

    std::string policy_path, eval_config;
    CLI::App* cmd_eval =
        app.add_subcommand("evaluate", "true-model loss of a stored policy snapshot");
    cmd_eval->add_option("policy-file", policy_path, "flat-text logit snapshot")
        ->required()
        ->check(CLI::ExistingFile);
    cmd_eval->add_option("--config", eval_config, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) run_mode(cmd_run, run_flags, "run");
        if (cmd_episodic->parsed()) run_mode(cmd_episodic, episodic_flags, "episodic");
        if (cmd_imitate->parsed()) run_mode(cmd_imitate, imitate_flags, "imitate");
        if (cmd_eval->parsed()) {
            const brmdp::ExperimentConfig cfg = brmdp::load_config(eval_config);
            std::ifstream in(policy_path, std::ios::binary);
            std::ostringstream buf;
            buf << in.rdbuf();
            const brmdp::PolicyParams params = brmdp::policy_from_text(buf.str());
            std::printf("true-model loss: %.6f\n", brmdp::evaluate_policy(cfg, params));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
