#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brmdp/bayes.hpp"
#include "brmdp/grad.hpp"
#include "brmdp/mdp.hpp"
#include "brmdp/optimizer.hpp"

namespace brmdp {

/// 5x5 grid of cells {S: start (ice), F: ice, H: hole, G: goal}; states are
/// numbered 5*row + col, actions 0=up 1=down 2=left 3=right.
struct LakeMap {
    std::vector<std::string> rows;  // 5 strings of length 5
    int start = -1;                 // state id of S
    int goal = -1;                  // state id of G
    std::vector<int> holes;         // state ids of the 6 H cells, ascending

    char cell(int state) const { return rows[state / 5][state % 5]; }
};

inline constexpr int lake_states = 25;
inline constexpr int lake_actions = 4;

/// Slippery and escape probabilities of the lake dynamics.
struct LakeParams {
    double theta_s = 0.0;  // slip probability on ice, in [0,1]
    double theta_e = 0.0;  // escape probability in a hole, in [0,1]
};

/// Parse 5 lines of SFHG characters; throws std::invalid_argument unless the
/// grid is 5x5 with exactly one S, one G and six H.
LakeMap parse_lake_map(const std::string& text);
LakeMap load_lake_map(const std::string& path);
std::string lake_map_to_text(const LakeMap& map);

/// The layout shipped with the repository (see configs/lake_default.map).
LakeMap default_lake_map();

/// Ice: intended direction with prob 1-theta_s, each perpendicular theta_s/2,
/// moves into a wall stay in place. Hole: intended move with prob theta_e,
/// stay otherwise. Goal: absorbing under every action.
TransitionMatrix build_kernel(const LakeMap& map, const LakeParams& params);

/// Expected per-step costs: ice (and start) 1, hole 2-theta_e (mean of the
/// uniform on [1, 1+2(1-theta_e)]), goal 0.
Eigen::MatrixXd build_costs(const LakeMap& map, const LakeParams& params);

/// MdpModel with the lake sizes, point-mass start distribution and the cost
/// table at the given parameters.
MdpModel make_lake_model(const LakeMap& map, const LakeParams& params, double gamma);

/// Posterior component order used throughout: {"slippery", "escape"}, where the
/// slippery component tracks p = P(moved as intended) = 1 - theta_s and the
/// escape component tracks p = theta_e.
std::vector<std::string> lake_component_names();

/// Uninformative Beta(1,1) prior on both components.
Posterior lake_prior();

/// theta = (p_intended, p_escape) in component order.
LakeParams params_from_theta(const Eigen::VectorXd& theta);

/// Kernel family over theta = (p_intended, p_escape); supplies the
/// theta-dependent cost table alongside the transition matrix.
class LakeKernelFamily : public KernelFamily {
public:
    explicit LakeKernelFamily(LakeMap map);
    ThetaKernel at(const Eigen::VectorXd& theta) const override;

private:
    LakeMap map_;
};

/// Batch of n labeled Bernoulli trials. Without a policy the batch is split
/// between the components (slippery share n - floor(n * (1 - slippery_fraction)),
/// rounded so a 50/50 split gives the slippery side the extra odd trial) and
/// drawn directly from the true parameters. With a policy the trials come from
/// a simulated trajectory: ice steps are slippery trials labeled by the latent
/// slip outcome, hole steps are escape trials, reaching the goal resets to the
/// start without recording a trial.
TransitionDataset generate_data(const LakeMap& map, const LakeParams& true_params,
                                const std::optional<PolicyTable>& policy, int n,
                                std::uint64_t seed, double slippery_fraction = 0.5);

/// Episodic data-collection hook backed by the trajectory simulator above.
class LakeEnvironment : public EpisodeEnvironment {
public:
    explicit LakeEnvironment(LakeMap map);
    TransitionDataset collect(const PolicyTable& policy, const Eigen::VectorXd& true_theta,
                              int batch_size, std::uint64_t seed) const override;

private:
    LakeMap map_;
};

/// Imitation target J: (1-gamma) times the expert's truncated state occupancy
/// under the true kernel, optionally floored at floor_eps, renormalized to sum
/// exactly 1.
Eigen::VectorXd expert_state_dist(const LakeMap& map, const LakeParams& true_params,
                                  const PolicyTable& expert, double gamma, int K,
                                  double floor_eps = 0.0);

}  // namespace brmdp
