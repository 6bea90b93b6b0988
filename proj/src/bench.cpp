#include "brmdp/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "brmdp/rng.hpp"

namespace brmdp {

namespace {

using nlohmann::json;

void require_known_keys(const json& j, const std::set<std::string>& allowed,
                        const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
}

RiskMeasure measure_from_json(const json& jm) {
    RiskMeasure m;
    const std::string kind = jm.value("risk", "expectation");
    if (kind == "expectation") {
        m.kind = RiskKind::expectation;
    } else if (kind == "cvar") {
        m.kind = RiskKind::cvar;
    } else if (kind == "mean_semideviation") {
        m.kind = RiskKind::mean_semideviation;
    } else {
        throw std::invalid_argument("config: unknown risk kind '" + kind + "'");
    }
    m.beta = jm.value("beta", 0.0);
    m.c_msd = jm.value("c", 0.5);
    if (!(m.beta >= 0.0 && m.beta < 1.0))
        throw std::invalid_argument("config: beta must lie in [0,1)");
    if (!(m.c_msd >= 0.0 && m.c_msd <= 1.0))
        throw std::invalid_argument("config: semideviation weight must lie in [0,1]");
    return m;
}

void validate_config(const ExperimentConfig& cfg) {
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
        throw std::invalid_argument("config: gamma must lie strictly inside (0,1)");
    if (cfg.horizon < 0) throw std::invalid_argument("config: horizon must be >= 0");
    if (cfg.reps < 1) throw std::invalid_argument("config: reps must be >= 1");
    if (cfg.iters < 1) throw std::invalid_argument("config: iters must be >= 1");
    if (!(cfg.step >= 0.0)) throw std::invalid_argument("config: step must be >= 0");
    if (cfg.r < 1) throw std::invalid_argument("config: r must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (cfg.n_data.empty()) throw std::invalid_argument("config: n_data must be nonempty");
    for (int n : cfg.n_data)
        if (n < 0) throw std::invalid_argument("config: n_data entries must be >= 0");
    if (cfg.episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
    if (cfg.iters_per_episode < 1)
        throw std::invalid_argument("config: iters_per_episode must be >= 1");
    if (cfg.batch_size < 0) throw std::invalid_argument("config: batch_size must be >= 0");
    if (!(cfg.j_floor >= 0.0)) throw std::invalid_argument("config: j_floor must be >= 0");
    if (cfg.methods.empty()) throw std::invalid_argument("config: methods must be nonempty");
    std::set<std::string> names;
    for (const MethodConfig& mc : cfg.methods) {
        if (mc.name.empty()) throw std::invalid_argument("config: method name must be nonempty");
        if (!names.insert(mc.name).second)
            throw std::invalid_argument("config: duplicate method name '" + mc.name + "'");
    }
}

Eigen::VectorXd flatten_rowmajor(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) v(i * m.cols() + k) = m(i, k);
    return v;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    static const std::set<std::string> top_keys = {
        "mode",     "map_path", "theta_s",  "theta_e",  "gamma",
        "horizon",  "n_data",   "seed",     "reps",     "iters",
        "step",     "r",        "workers",  "out_dir",  "methods",
        "episodes", "iters_per_episode",    "batch_size",
        "j_floor",  "write_traces",         "write_plots"};
    require_known_keys(j, top_keys, "experiment");

    ExperimentConfig cfg;
    cfg.mode = j.value("mode", cfg.mode);
    if (cfg.mode != "run" && cfg.mode != "episodic" && cfg.mode != "imitate")
        throw std::invalid_argument("config: mode must be run, episodic or imitate");
    cfg.map_path = j.value("map_path", cfg.map_path);
    cfg.theta_s = j.value("theta_s", cfg.theta_s);
    cfg.theta_e = j.value("theta_e", cfg.theta_e);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.horizon = j.value("horizon", cfg.horizon);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.reps = j.value("reps", cfg.reps);
    cfg.iters = j.value("iters", cfg.iters);
    cfg.step = j.value("step", cfg.step);
    cfg.r = j.value("r", cfg.r);
    cfg.workers = j.value("workers", cfg.workers);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.episodes = j.value("episodes", cfg.episodes);
    cfg.iters_per_episode = j.value("iters_per_episode", cfg.iters_per_episode);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.j_floor = j.value("j_floor", cfg.j_floor);
    cfg.write_traces = j.value("write_traces", cfg.write_traces);
    cfg.write_plots = j.value("write_plots", cfg.write_plots);
    if (j.contains("n_data")) {
        cfg.n_data.clear();
        if (j["n_data"].is_array()) {
            for (const auto& v : j["n_data"]) cfg.n_data.push_back(v.get<int>());
        } else {
            cfg.n_data.push_back(j["n_data"].get<int>());
        }
    }
    if (!j.contains("methods") || !j["methods"].is_array())
        throw std::invalid_argument("config: methods array required");
    static const std::set<std::string> method_keys = {"name",     "type", "risk", "beta",
                                                      "c",        "episodes",
                                                      "iters_per_episode"};
    for (const auto& jm : j["methods"]) {
        require_known_keys(jm, method_keys, "method");
        MethodConfig mc;
        mc.name = jm.at("name").get<std::string>();
        mc.type = jm.value("type", mc.type);
        if (mc.type != "br_pg" && mc.type != "empirical" && mc.type != "episodic")
            throw std::invalid_argument("config: unknown method type '" + mc.type + "'");
        mc.measure = measure_from_json(jm);
        mc.episodes = jm.value("episodes", 0);
        mc.iters_per_episode = jm.value("iters_per_episode", 0);
        cfg.methods.push_back(mc);
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

double positive_sided_variance(const std::vector<double>& losses) {
    if (losses.empty()) throw std::invalid_argument("positive_sided_variance: empty input");
    double mean = 0.0;
    for (double x : losses) mean += x;
    mean /= static_cast<double>(losses.size());
    double acc = 0.0;
    for (double x : losses) {
        const double d = x - mean;
        if (d > 0.0) acc += d * d;
    }
    return acc / static_cast<double>(losses.size());
}

PolicyParams empirical_baseline(const TransitionDataset& data, const MdpModel& model,
                                const KernelFamily& family,
                                const std::vector<std::string>& components,
                                const LossSpec& spec, const RunConfig& run_cfg) {
    const MleResult fit = mle(data, components);
    Posterior point;
    point.names = components;
    for (Eigen::Index i = 0; i < fit.theta.size(); ++i) {
        // near-point-mass belief at the MLE; the optimizer then sees an
        // essentially deterministic model
        const double p = fit.theta(i);
        point.beliefs.push_back(BetaBelief{1e9 * p + 1.0, 1e9 * (1.0 - p) + 1.0});
        point.n_observations.push_back(0);
    }
    const RiskMeasure expectation;  // risk-neutral: plain policy gradient
    TrainResult tr = br_pg(model, family, point, spec, expectation, run_cfg);
    if (!tr.completed) throw std::runtime_error("empirical_baseline: " + tr.error);
    return std::move(tr.params);
}

namespace {

/// Everything about the true environment a mode needs: model, kernel, loss,
/// the oracle optimum and the greedy expert actions.
struct EnvBundle {
    LakeMap map;
    LakeParams true_params;
    MdpModel model;
    TransitionMatrix true_kernel;
    Eigen::VectorXd true_theta;
    LossSpec spec;
    double vi_optimum = 0.0;
    Eigen::VectorXi vi_greedy;
};

EnvBundle build_env(const ExperimentConfig& cfg) {
    EnvBundle env;
    env.map = cfg.map_path.empty() ? default_lake_map() : load_lake_map(cfg.map_path);
    env.true_params = LakeParams{cfg.theta_s, cfg.theta_e};
    env.model = make_lake_model(env.map, env.true_params, cfg.gamma);
    env.true_kernel = build_kernel(env.map, env.true_params);
    env.true_theta.resize(2);
    env.true_theta << 1.0 - cfg.theta_s, cfg.theta_e;
    const ViResult vi = value_iteration(env.model, env.true_kernel);
    env.vi_optimum = vi.values(env.map.start);
    env.vi_greedy = vi.greedy;

    env.spec.gamma = cfg.gamma;
    if (cfg.mode == "imitate") {
        env.spec.kind = LossKind::kl_imitation;
        const PolicyTable expert = deterministic_policy(vi.greedy, lake_actions);
        env.spec.target_state_dist = expert_state_dist(env.map, env.true_params, expert,
                                                       cfg.gamma, cfg.horizon, cfg.j_floor);
        env.spec.j_floor = cfg.j_floor;
    } else {
        env.spec.kind = LossKind::linear;
        env.spec.cost_vec = flatten_rowmajor(build_costs(env.map, env.true_params));
    }
    return env;
}

}  // namespace

double evaluate_policy(const ExperimentConfig& cfg, const PolicyParams& params) {
    const EnvBundle env = build_env(cfg);
    const LakeKernelFamily family(env.map);
    return eval_c(env.model, family.at(env.true_theta), params, env.spec, cfg.horizon);
}

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const EnvBundle bundle = build_env(cfg);
    const LakeMap& map = bundle.map;
    const LakeParams& true_params = bundle.true_params;
    const MdpModel& model = bundle.model;
    const LakeKernelFamily family(map);
    const LakeEnvironment env(map);
    const Eigen::VectorXd& true_theta = bundle.true_theta;
    const LossSpec& spec = bundle.spec;

    ExperimentResults out;
    out.cfg = cfg;
    out.vi_optimum = bundle.vi_optimum;
    const ThetaKernel eval_kernel = family.at(true_theta);

    struct Cell {
        int method_idx, n_idx, rep;
    };
    const int n_count = static_cast<int>(cfg.n_data.size());
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(cfg.methods.size()) * n_count * cfg.reps);
    for (int mi = 0; mi < static_cast<int>(cfg.methods.size()); ++mi)
        for (int ni = 0; ni < n_count; ++ni)
            for (int rep = 0; rep < cfg.reps; ++rep) cells.push_back({mi, ni, rep});
    std::vector<ReplicationResult> rows(cells.size());

    const auto run_cell = [&](const Cell& cell) {
        const MethodConfig& mc = cfg.methods[cell.method_idx];
        const int n = cfg.n_data[cell.n_idx];
        ReplicationResult res;
        res.method = mc.name;
        res.n_data = n;
        res.rep = cell.rep;
        res.seed = mix_seed({cfg.seed, static_cast<std::uint64_t>(cell.rep),
                             1000 + static_cast<std::uint64_t>(cell.method_idx),
                             static_cast<std::uint64_t>(cell.n_idx)});
        const auto t0 = std::chrono::steady_clock::now();
        try {
            RunConfig rc;
            rc.iters = cfg.iters;
            rc.step = cfg.step;
            rc.seed = res.seed;
            rc.grad_cfg.method = GradMethod::direct;
            rc.grad_cfg.r = cfg.r;
            rc.grad_cfg.K = cfg.horizon;

            if (mc.type == "episodic") {
                const int eps = mc.episodes > 0 ? mc.episodes : cfg.episodes;
                const int ipe =
                    mc.iters_per_episode > 0 ? mc.iters_per_episode : cfg.iters_per_episode;
                EpisodeSchedule sched;
                sched.n_episodes = eps;
                sched.iters_per_episode.assign(eps, ipe);
                sched.batch_size = cfg.batch_size;
                res.n_data = eps * cfg.batch_size;
                TrainResult tr = episodic_br_pg(model, family, env, lake_prior(), true_theta,
                                                spec, mc.measure, sched, rc);
                if (!tr.completed) throw std::runtime_error(tr.error);
                res.params = std::move(tr.params);
                res.trace = std::move(tr.trace);
            } else {
                // common-random-number data draw: every method sees the same
                // dataset within a replication
                const TransitionDataset data = generate_data(
                    map, true_params, std::nullopt, n,
                    mix_seed({cfg.seed, static_cast<std::uint64_t>(cell.rep), 777,
                              static_cast<std::uint64_t>(cell.n_idx)}));
                if (mc.type == "empirical") {
                    res.params = empirical_baseline(data, model, family,
                                                    lake_component_names(), spec, rc);
                } else {
                    const Posterior post = posterior_update(lake_prior(), data);
                    TrainResult tr = br_pg(model, family, post, spec, mc.measure, rc);
                    if (!tr.completed) throw std::runtime_error(tr.error);
                    res.params = std::move(tr.params);
                    res.trace = std::move(tr.trace);
                }
            }
            res.true_loss = eval_c(model, eval_kernel, res.params, spec, cfg.horizon);
        } catch (const std::exception& e) {
            res.ok = false;
            res.error = e.what();
        }
        res.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    };

    const int workers = cfg.workers;
    std::atomic<std::size_t> next{0};
    const auto drain = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            rows[i] = run_cell(cells[i]);
        }
    };
    if (workers <= 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
        for (std::thread& t : pool) t.join();
    }

    std::size_t failed = 0;
    for (const ReplicationResult& res : rows) {
        if (!res.ok) {
            ++failed;
            std::fprintf(stderr, "replication failed: method=%s N=%d rep=%d: %s\n",
                         res.method.c_str(), res.n_data, res.rep, res.error.c_str());
        }
    }
    if (failed * 10 > rows.size())
        throw std::runtime_error("run_experiment: more than 10% of replications failed");

    out.rows = std::move(rows);
    return out;
}

std::string results_table_csv(const ExperimentResults& results) {
    std::string out = "method,N,beta,mean_loss,stderr,psv\n";
    const ExperimentConfig& cfg = results.cfg;
    const int n_count = static_cast<int>(cfg.n_data.size());
    for (int mi = 0; mi < static_cast<int>(cfg.methods.size()); ++mi) {
        for (int ni = 0; ni < n_count; ++ni) {
            std::vector<double> losses;
            int n_label = cfg.n_data[ni];
            for (int rep = 0; rep < cfg.reps; ++rep) {
                const ReplicationResult& res =
                    results.rows[(static_cast<std::size_t>(mi) * n_count + ni) * cfg.reps + rep];
                n_label = res.n_data;
                if (res.ok) losses.push_back(res.true_loss);
            }
            double mean = std::nan(""), se = std::nan(""), psv = std::nan("");
            if (!losses.empty()) {
                mean = 0.0;
                for (double x : losses) mean += x;
                mean /= static_cast<double>(losses.size());
                double var = 0.0;
                for (double x : losses) var += (x - mean) * (x - mean);
                var = losses.size() > 1 ? var / static_cast<double>(losses.size() - 1) : 0.0;
                se = std::sqrt(var / static_cast<double>(losses.size()));
                psv = positive_sided_variance(losses);
            }
            char line[256];
            std::snprintf(line, sizeof(line), "%s,%d,%g,%.6g,%.6g,%.6g\n",
                          cfg.methods[mi].name.c_str(), n_label, cfg.methods[mi].measure.beta,
                          mean, se, psv);
            out += line;
        }
    }
    return out;
}

namespace {

struct PlotSeries {
    std::string label;
    std::vector<double> mean;
    std::vector<double> half;  // 1.96 * stderr per iteration
};

std::string render_loss_svg(const std::vector<PlotSeries>& series) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    const double width = 640, height = 420;
    const double ml = 62, mr = 18, mt = 18, mb = 46;
    std::size_t max_len = 0;
    double ymin = 1e300, ymax = -1e300;
    for (const PlotSeries& s : series) {
        max_len = std::max(max_len, s.mean.size());
        for (std::size_t i = 0; i < s.mean.size(); ++i) {
            ymin = std::min(ymin, s.mean[i] - s.half[i]);
            ymax = std::max(ymax, s.mean[i] + s.half[i]);
        }
    }
    if (max_len < 2 || ymin > ymax) return {};
    const double pad = 0.05 * std::max(ymax - ymin, 1e-12);
    ymin -= pad;
    ymax += pad;
    const double xspan = static_cast<double>(max_len - 1);
    const auto px = [&](double it) { return ml + (width - ml - mr) * (it / xspan); };
    const auto py = [&](double v) {
        return mt + (height - mt - mb) * (1.0 - (v - ymin) / (ymax - ymin));
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    svg << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
        << height - mb << "\" stroke=\"black\"/>\n";
    const char* style = " font-family=\"sans-serif\" font-size=\"11\"";
    for (int k = 0; k <= 4; ++k) {
        const double frac = k / 4.0;
        const double xv = frac * xspan, yv = ymin + frac * (ymax - ymin);
        svg << "<text x=\"" << px(xv) << "\" y=\"" << height - mb + 16
            << "\" text-anchor=\"middle\"" << style << ">" << fmt("%g", xv) << "</text>\n";
        svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\""
            << style << ">" << fmt("%.4g", yv) << "</text>\n";
    }
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\"" << style << ">iteration</text>\n";
    svg << "<text x=\"14\" y=\"" << (mt + height - mb) / 2 << "\" text-anchor=\"middle\""
        << style << " transform=\"rotate(-90 14 " << (mt + height - mb) / 2
        << ")\">objective</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const char* color = palette[si % 6];
        if (s.mean.size() < 2) continue;
        // confidence band: forward along the upper edge, back along the lower
        svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < s.mean.size(); ++i)
            svg << fmt("%.2f", px(static_cast<double>(i))) << ","
                << fmt("%.2f", py(s.mean[i] + s.half[i])) << " ";
        for (std::size_t i = s.mean.size(); i-- > 0;)
            svg << fmt("%.2f", px(static_cast<double>(i))) << ","
                << fmt("%.2f", py(s.mean[i] - s.half[i])) << " ";
        svg << "\"/>\n";
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.mean.size(); ++i)
            svg << fmt("%.2f", px(static_cast<double>(i))) << ","
                << fmt("%.2f", py(s.mean[i])) << " ";
        svg << "\"/>\n";
        // legend entry
        const double ly = mt + 8 + 16 * static_cast<double>(si);
        svg << "<line x1=\"" << width - mr - 150 << "\" y1=\"" << ly << "\" x2=\""
            << width - mr - 126 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << width - mr - 120 << "\" y=\"" << ly + 4 << "\"" << style << ">"
            << escape_xml(s.label) << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("emit_outputs: cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("emit_outputs: short write to " + path.string());
}

}  // namespace

void emit_outputs(const ExperimentResults& results) {
    namespace fs = std::filesystem;
    const ExperimentConfig& cfg = results.cfg;
    const fs::path dir = cfg.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("emit_outputs: cannot create " + dir.string());

    write_file(dir / "table.csv", results_table_csv(results));

    const bool multi_n = cfg.n_data.size() > 1;
    if (cfg.write_traces) {
        for (const ReplicationResult& res : results.rows) {
            if (!res.ok || res.trace.rows.empty()) continue;
            char name[160];
            if (multi_n)
                std::snprintf(name, sizeof(name), "trace_%s_N%d_%d.csv", res.method.c_str(),
                              res.n_data, res.rep);
            else
                std::snprintf(name, sizeof(name), "trace_%s_%d.csv", res.method.c_str(),
                              res.rep);
            write_file(dir / name, trace_to_csv(res.trace));
        }
    }

    if (cfg.write_plots) {
        // per (method, N): mean objective per iteration with a 95% band over reps
        std::vector<PlotSeries> series;
        const int n_count = static_cast<int>(cfg.n_data.size());
        for (int mi = 0; mi < static_cast<int>(cfg.methods.size()); ++mi) {
            for (int ni = 0; ni < n_count; ++ni) {
                std::vector<const TrainTrace*> traces;
                int n_label = cfg.n_data[ni];
                for (int rep = 0; rep < cfg.reps; ++rep) {
                    const ReplicationResult& res =
                        results.rows[(static_cast<std::size_t>(mi) * n_count + ni) * cfg.reps +
                                     rep];
                    n_label = res.n_data;
                    if (res.ok && !res.trace.rows.empty()) traces.push_back(&res.trace);
                }
                if (traces.empty()) continue;
                std::size_t len = traces.front()->rows.size();
                for (const TrainTrace* tr : traces) len = std::min(len, tr->rows.size());
                PlotSeries s;
                s.label = multi_n ? cfg.methods[mi].name + " N=" + std::to_string(n_label)
                                  : cfg.methods[mi].name;
                for (std::size_t i = 0; i < len; ++i) {
                    double mean = 0.0;
                    for (const TrainTrace* tr : traces) mean += tr->rows[i].objective;
                    mean /= static_cast<double>(traces.size());
                    double var = 0.0;
                    for (const TrainTrace* tr : traces)
                        var += (tr->rows[i].objective - mean) * (tr->rows[i].objective - mean);
                    var = traces.size() > 1 ? var / static_cast<double>(traces.size() - 1) : 0.0;
                    s.mean.push_back(mean);
                    s.half.push_back(1.96 * std::sqrt(var / static_cast<double>(traces.size())));
                }
                series.push_back(std::move(s));
            }
        }
        const std::string svg = render_loss_svg(series);
        if (!svg.empty()) write_file(dir / "loss_vs_iter.svg", svg);
    }
}

std::string policy_to_text(const PolicyParams& params) {
    std::string out = std::to_string(params.alpha.rows()) + " " +
                      std::to_string(params.alpha.cols()) + "\n";
    char buf[48];
    for (Eigen::Index s = 0; s < params.alpha.rows(); ++s) {
        for (Eigen::Index a = 0; a < params.alpha.cols(); ++a) {
            std::snprintf(buf, sizeof(buf), a + 1 < params.alpha.cols() ? "%.17g " : "%.17g\n",
                          params.alpha(s, a));
            out += buf;
        }
    }
    return out;
}

PolicyParams policy_from_text(const std::string& text) {
    std::istringstream in(text);
    long s_count = 0, a_count = 0;
    if (!(in >> s_count >> a_count) || s_count <= 0 || a_count <= 0)
        throw std::invalid_argument("policy file: bad header");
    PolicyParams params;
    params.alpha.resize(s_count, a_count);
    for (long s = 0; s < s_count; ++s)
        for (long a = 0; a < a_count; ++a)
            if (!(in >> params.alpha(s, a)))
                throw std::invalid_argument("policy file: truncated logit table");
    return params;
}

}  // namespace brmdp
