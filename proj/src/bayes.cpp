#include "brmdp/bayes.hpp"

#include <random>
#include <sstream>
#include <stdexcept>

#include "brmdp/rng.hpp"

namespace brmdp {

int Posterior::index_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
        if (names[i] == name) return i;
    return -1;
}

Posterior posterior_update(Posterior prior, const TransitionDataset& data) {
    for (const TransitionRecord& rec : data.records) {
        if (rec.successes < 0 || rec.trials < rec.successes)
            throw std::invalid_argument("posterior_update: invalid trial counts for '" +
                                        rec.component + "'");
        const int i = prior.index_of(rec.component);
        if (i < 0)
            throw std::invalid_argument("posterior_update: unknown component '" +
                                        rec.component + "'");
        prior.beliefs[i].a += static_cast<double>(rec.successes);
        prior.beliefs[i].b += static_cast<double>(rec.trials - rec.successes);
        prior.n_observations[i] += rec.trials;
    }
    return prior;
}

std::vector<Eigen::VectorXd> sample_theta(const Posterior& post, int r, std::uint64_t seed) {
    if (r < 1) throw std::invalid_argument("sample_theta: r must be >= 1");
    std::mt19937_64 rng = make_rng(seed);
    std::vector<Eigen::VectorXd> draws(r, Eigen::VectorXd(post.size()));
    for (int k = 0; k < r; ++k) {
        for (int i = 0; i < post.size(); ++i) {
            // Beta(a,b) via the ratio of two gamma draws
            std::gamma_distribution<double> ga(post.beliefs[i].a, 1.0);
            std::gamma_distribution<double> gb(post.beliefs[i].b, 1.0);
            const double x = ga(rng), y = gb(rng);
            draws[k](i) = (x + y > 0.0) ? x / (x + y) : 0.5;
        }
    }
    return draws;
}

MleResult mle(const TransitionDataset& data, const std::vector<std::string>& components) {
    MleResult res;
    res.theta.resize(static_cast<Eigen::Index>(components.size()));
    res.fallback_used.assign(components.size(), false);
    for (std::size_t i = 0; i < components.size(); ++i) {
        long succ = 0, trials = 0;
        for (const TransitionRecord& rec : data.records) {
            if (rec.component == components[i]) {
                succ += rec.successes;
                trials += rec.trials;
            }
        }
        if (trials == 0) {
            res.theta(static_cast<Eigen::Index>(i)) = 0.5;
            res.fallback_used[i] = true;
        } else {
            res.theta(static_cast<Eigen::Index>(i)) =
                static_cast<double>(succ) / static_cast<double>(trials);
        }
    }
    return res;
}

std::string dataset_to_csv(const TransitionDataset& data) {
    std::ostringstream out;
    out << "component,successes,trials\n";
    for (const TransitionRecord& rec : data.records)
        out << rec.component << ',' << rec.successes << ',' << rec.trials << '\n';
    return out.str();
}

TransitionDataset dataset_from_csv(const std::string& text) {
    TransitionDataset data;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {  // skip the header row
            first = false;
            continue;
        }
        std::istringstream fields(line);
        TransitionRecord rec;
        std::string tok;
        if (!std::getline(fields, rec.component, ',') || !std::getline(fields, tok, ','))
            throw std::invalid_argument("dataset_from_csv: malformed row '" + line + "'");
        rec.successes = std::stol(tok);
        if (!std::getline(fields, tok, ','))
            throw std::invalid_argument("dataset_from_csv: malformed row '" + line + "'");
        rec.trials = std::stol(tok);
        data.records.push_back(rec);
    }
    return data;
}

}  // namespace brmdp
