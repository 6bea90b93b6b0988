#include "brmdp/frozen_lake.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "brmdp/rng.hpp"

namespace brmdp {

namespace {

constexpr int d_row[lake_actions] = {-1, 1, 0, 0};
constexpr int d_col[lake_actions] = {0, 0, -1, 1};
// perpendicular slip directions: up/down slip to left/right and vice versa
constexpr int perp_a[lake_actions] = {2, 2, 0, 0};
constexpr int perp_b[lake_actions] = {3, 3, 1, 1};

int clip_move(int state, int action) {
    const int i = state / 5, j = state % 5;
    const int ni = i + d_row[action], nj = j + d_col[action];
    if (ni < 0 || ni > 4 || nj < 0 || nj > 4) return state;
    return 5 * ni + nj;
}

void check_params(const LakeParams& p) {
    if (!(p.theta_s >= 0.0 && p.theta_s <= 1.0) || !(p.theta_e >= 0.0 && p.theta_e <= 1.0))
        throw std::invalid_argument("lake: theta_s and theta_e must lie in [0,1]");
}

}  // namespace

LakeMap parse_lake_map(const std::string& text) {
    LakeMap map;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) map.rows.push_back(line);
    }
    if (map.rows.size() != 5) throw std::invalid_argument("lake map: expected 5 rows");
    for (int i = 0; i < 5; ++i) {
        if (map.rows[i].size() != 5)
            throw std::invalid_argument("lake map: every row must have 5 cells");
        for (int j = 0; j < 5; ++j) {
            const int s = 5 * i + j;
            switch (map.rows[i][j]) {
                case 'S':
                    if (map.start >= 0) throw std::invalid_argument("lake map: duplicate S");
                    map.start = s;
                    break;
                case 'G':
                    if (map.goal >= 0) throw std::invalid_argument("lake map: duplicate G");
                    map.goal = s;
                    break;
                case 'H':
                    map.holes.push_back(s);
                    break;
                case 'F':
                    break;
                default:
                    throw std::invalid_argument("lake map: cells must be S, F, H or G");
            }
        }
    }
    if (map.start < 0 || map.goal < 0 || map.holes.size() != 6)
        throw std::invalid_argument("lake map: need exactly one S, one G and six H");
    return map;
}

LakeMap load_lake_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("lake map: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lake_map(buf.str());
}

std::string lake_map_to_text(const LakeMap& map) {
    std::string out;
    for (const std::string& row : map.rows) {
        out += row;
        out += '\n';
    }
    return out;
}

LakeMap default_lake_map() {
    return parse_lake_map(
        "SFFFF\n"
        "FHHHF\n"
        "FFFFF\n"
        "FHHHF\n"
        "FFFFG\n");
}

TransitionMatrix build_kernel(const LakeMap& map, const LakeParams& params) {
    check_params(params);
    TransitionMatrix P;
    P.probs = Eigen::MatrixXd::Zero(lake_states * lake_actions, lake_states);
    for (int s = 0; s < lake_states; ++s) {
        const char c = map.cell(s);
        for (int a = 0; a < lake_actions; ++a) {
            auto row = P.probs.row(static_cast<Eigen::Index>(s) * lake_actions + a);
            if (c == 'G') {
                row(s) = 1.0;
            } else if (c == 'H') {
                row(clip_move(s, a)) += params.theta_e;
                row(s) += 1.0 - params.theta_e;
            } else {
                row(clip_move(s, a)) += 1.0 - params.theta_s;
                row(clip_move(s, perp_a[a])) += params.theta_s / 2.0;
                row(clip_move(s, perp_b[a])) += params.theta_s / 2.0;
            }
        }
    }
    return P;
}

Eigen::MatrixXd build_costs(const LakeMap& map, const LakeParams& params) {
    check_params(params);
    Eigen::MatrixXd cost(lake_states, lake_actions);
    for (int s = 0; s < lake_states; ++s) {
        double c;
        switch (map.cell(s)) {
            case 'G': c = 0.0; break;
            case 'H': c = 2.0 - params.theta_e; break;
            default:  c = 1.0; break;
        }
        cost.row(s).setConstant(c);
    }
    return cost;
}

MdpModel make_lake_model(const LakeMap& map, const LakeParams& params, double gamma) {
    MdpModel model;
    model.n_states = lake_states;
    model.n_actions = lake_actions;
    model.gamma = gamma;
    model.init_dist = Eigen::VectorXd::Zero(lake_states);
    model.init_dist(map.start) = 1.0;
    model.expected_cost = build_costs(map, params);
    return model;
}

std::vector<std::string> lake_component_names() { return {"slippery", "escape"}; }

Posterior lake_prior() {
    Posterior post;
    post.names = lake_component_names();
    post.beliefs = {BetaBelief{1.0, 1.0}, BetaBelief{1.0, 1.0}};
    post.n_observations = {0, 0};
    return post;
}

LakeParams params_from_theta(const Eigen::VectorXd& theta) {
    if (theta.size() != 2)
        throw std::invalid_argument("lake: theta must be (p_intended, p_escape)");
    return LakeParams{1.0 - theta(0), theta(1)};
}

LakeKernelFamily::LakeKernelFamily(LakeMap map) : map_(std::move(map)) {}

ThetaKernel LakeKernelFamily::at(const Eigen::VectorXd& theta) const {
    const LakeParams p = params_from_theta(theta);
    ThetaKernel kernel;
    kernel.P = build_kernel(map_, p);
    kernel.cost_override = build_costs(map_, p);
    return kernel;
}

TransitionDataset generate_data(const LakeMap& map, const LakeParams& true_params,
                                const std::optional<PolicyTable>& policy, int n,
                                std::uint64_t seed, double slippery_fraction) {
    check_params(true_params);
    if (n < 0) throw std::invalid_argument("generate_data: n must be >= 0");
    if (!(slippery_fraction >= 0.0 && slippery_fraction <= 1.0))
        throw std::invalid_argument("generate_data: slippery_fraction must lie in [0,1]");

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long succ_s = 0, n_s = 0, succ_e = 0, n_e = 0;

    if (!policy) {
        // component-level Bernoulli trials; the odd trial of a 50/50 split goes
        // to the slippery side
        n_e = static_cast<long>(std::floor(n * (1.0 - slippery_fraction)));
        n_s = n - n_e;
        const double p_int = 1.0 - true_params.theta_s;
        for (long i = 0; i < n_s; ++i) succ_s += unif(rng) < p_int ? 1 : 0;
        for (long i = 0; i < n_e; ++i) succ_e += unif(rng) < true_params.theta_e ? 1 : 0;
    } else {
        if (policy->pi.rows() != lake_states || policy->pi.cols() != lake_actions)
            throw std::invalid_argument("generate_data: policy table must be 25 x 4");
        int state = map.start;
        int collected = 0;
        while (collected < n) {
            if (map.cell(state) == 'G') {
                state = map.start;  // episode over, redeploy
                continue;
            }
            const double u = unif(rng);
            int a = lake_actions - 1;
            double acc = 0.0;
            for (int cand = 0; cand < lake_actions; ++cand) {
                acc += policy->pi(state, cand);
                if (u < acc) {
                    a = cand;
                    break;
                }
            }
            if (map.cell(state) == 'H') {
                const bool escaped = unif(rng) < true_params.theta_e;
                ++n_e;
                succ_e += escaped ? 1 : 0;
                if (escaped) state = clip_move(state, a);
            } else {
                // label by the latent slip outcome so wall-clipped moves stay
                // unambiguous
                const double v = unif(rng);
                int latent;
                if (v < 1.0 - true_params.theta_s) latent = a;
                else if (v < 1.0 - true_params.theta_s / 2.0) latent = perp_a[a];
                else latent = perp_b[a];
                ++n_s;
                succ_s += latent == a ? 1 : 0;
                state = clip_move(state, latent);
            }
            ++collected;
        }
    }

    TransitionDataset data;
    if (n_s > 0) data.records.push_back({"slippery", succ_s, n_s});
    if (n_e > 0) data.records.push_back({"escape", succ_e, n_e});
    return data;
}

LakeEnvironment::LakeEnvironment(LakeMap map) : map_(std::move(map)) {}

TransitionDataset LakeEnvironment::collect(const PolicyTable& policy,
                                           const Eigen::VectorXd& true_theta, int batch_size,
                                           std::uint64_t seed) const {
    return generate_data(map_, params_from_theta(true_theta), policy, batch_size, seed);
}

Eigen::VectorXd expert_state_dist(const LakeMap& map, const LakeParams& true_params,
                                  const PolicyTable& expert, double gamma, int K,
                                  double floor_eps) {
    const MdpModel model = make_lake_model(map, true_params, gamma);
    const TransitionMatrix P = build_kernel(map, true_params);
    const OccupancyMeasure occ = compute_occupancy(model, P, expert, K);
    Eigen::VectorXd j = (1.0 - gamma) * occ.state_marginal();
    if (floor_eps > 0.0) j = j.cwiseMax(floor_eps);
    j /= j.sum();
    return j;
}

}  // namespace brmdp
