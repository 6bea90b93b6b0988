#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace brmdp {

/// Beta(a,b) belief over a single probability parameter.
struct BetaBelief {
    double a = 1.0;
    double b = 1.0;

    double mean() const { return a / (a + b); }
};

/// Named product of independent Beta beliefs (one per unknown kernel parameter)
/// together with the number of observations absorbed per component.
struct Posterior {
    std::vector<std::string> names;
    std::vector<BetaBelief> beliefs;
    std::vector<long> n_observations;

    int size() const { return static_cast<int>(names.size()); }
    int index_of(const std::string& name) const;  // -1 when absent
};

/// Aggregated Bernoulli trial counts for one posterior component.
struct TransitionRecord {
    std::string component;
    long successes = 0;
    long trials = 0;
};

struct TransitionDataset {
    std::vector<TransitionRecord> records;
};

/// Conjugate update: per component Beta(a,b) -> Beta(a + successes, b + failures).
/// Unknown component names raise std::invalid_argument.
Posterior posterior_update(Posterior prior, const TransitionDataset& data);

/// r i.i.d. draws from the product posterior; element k is the length-|components|
/// parameter vector theta_k. Deterministic given the seed.
std::vector<Eigen::VectorXd> sample_theta(const Posterior& post, int r, std::uint64_t seed);

struct MleResult {
    Eigen::VectorXd theta;             // one entry per requested component
    std::vector<bool> fallback_used;   // true where 0/0 forced the 0.5 default
};

/// Maximum-likelihood point estimate successes/trials per component; components
/// with zero trials fall back to 0.5 and are flagged.
MleResult mle(const TransitionDataset& data, const std::vector<std::string>& components);

/// Dataset serialization as CSV rows `component,successes,trials`.
std::string dataset_to_csv(const TransitionDataset& data);
TransitionDataset dataset_from_csv(const std::string& text);

}  // namespace brmdp
