#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "brmdp/grad.hpp"
#include "brmdp/rng.hpp"

using namespace brmdp;

namespace {

struct SmallMdp {
    MdpModel model;
    ThetaKernel kernel;
};

SmallMdp small_mdp(std::uint64_t seed, int S, int A, double gamma) {
    auto rng = make_rng(mix_seed({seed, 301}));
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    SmallMdp out;
    out.model.n_states = S;
    out.model.n_actions = A;
    out.model.gamma = gamma;
    out.model.init_dist = Eigen::VectorXd::Zero(S);
    out.model.init_dist(0) = 1.0;
    out.model.expected_cost = Eigen::MatrixXd(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) out.model.expected_cost(s, a) = unif(rng);
    out.kernel.P.probs = Eigen::MatrixXd(S * A, S);
    for (int row = 0; row < S * A; ++row) {
        for (int col = 0; col < S; ++col) out.kernel.P.probs(row, col) = unif(rng);
        out.kernel.P.probs.row(row) /= out.kernel.P.probs.row(row).sum();
    }
    return out;
}

PolicyParams random_params(std::uint64_t seed, int S, int A, double scale = 0.7) {
    auto rng = make_rng(mix_seed({seed, 302}));
    std::normal_distribution<double> normal(0.0, scale);
    PolicyParams params;
    params.alpha = Eigen::MatrixXd(S, A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) params.alpha(s, a) = normal(rng);
    return params;
}

LossSpec linear_spec(const MdpModel& model) {
    LossSpec spec;
    spec.kind = LossKind::linear;
    spec.cost_vec = Eigen::VectorXd(model.dim());
    for (int s = 0; s < model.n_states; ++s)
        for (int a = 0; a < model.n_actions; ++a)
            spec.cost_vec(s * model.n_actions + a) = model.expected_cost(s, a);
    return spec;
}

LossSpec kl_spec(std::uint64_t seed, int S, double gamma) {
    auto rng = make_rng(mix_seed({seed, 303}));
    std::uniform_real_distribution<double> unif(0.2, 1.0);
    LossSpec spec;
    spec.kind = LossKind::kl_imitation;
    spec.gamma = gamma;
    spec.target_state_dist = Eigen::VectorXd(S);
    for (int s = 0; s < S; ++s) spec.target_state_dist(s) = unif(rng);
    spec.target_state_dist /= spec.target_state_dist.sum();
    return spec;
}

/// Central finite differences of eval_c in every logit coordinate.
Eigen::MatrixXd fd_gradient(const MdpModel& model, const ThetaKernel& kernel,
                            const PolicyParams& params, const LossSpec& spec, int K,
                            double h) {
    Eigen::MatrixXd g(params.alpha.rows(), params.alpha.cols());
    for (Eigen::Index s = 0; s < params.alpha.rows(); ++s) {
        for (Eigen::Index a = 0; a < params.alpha.cols(); ++a) {
            PolicyParams up = params, down = params;
            up.alpha(s, a) += h;
            down.alpha(s, a) -= h;
            g(s, a) = (eval_c(model, kernel, up, spec, K) -
                       eval_c(model, kernel, down, spec, K)) /
                      (2.0 * h);
        }
    }
    return g;
}

/// Two-component family: theta(0) mixes two fixed kernels, theta(1) scales the
/// per-step costs through a cost override.
class MixFamily : public KernelFamily {
public:
    MixFamily(const MdpModel& model, TransitionMatrix a, TransitionMatrix b)
        : base_cost_(model.expected_cost), a_(std::move(a)), b_(std::move(b)) {}

    ThetaKernel at(const Eigen::VectorXd& theta) const override {
        ThetaKernel out;
        out.P.probs = (1.0 - theta(0)) * a_.probs + theta(0) * b_.probs;
        out.cost_override = base_cost_ * (1.0 + theta(1));
        return out;
    }

private:
    Eigen::MatrixXd base_cost_;
    TransitionMatrix a_, b_;
};

Posterior two_beta_posterior(double a1, double b1, double a2, double b2) {
    Posterior post;
    post.names = {"mix", "scale"};
    post.beliefs = {{a1, b1}, {a2, b2}};
    post.n_observations = {0, 0};
    return post;
}

}  // namespace

TEST_CASE("eval_c composes occupancy and loss") {
    const SmallMdp m = small_mdp(11, 4, 3, 0.9);
    const PolicyParams params = random_params(12, 4, 3);
    const LossSpec spec = linear_spec(m.model);
    const OccupancyMeasure occ = compute_occupancy(m.model, m.kernel.P, to_table(params), 80);
    CHECK(eval_c(m.model, m.kernel, params, spec, 80) ==
          doctest::Approx(eval_loss(spec, occ)).epsilon(1e-12));
}

TEST_CASE("effective spec substitutes the theta-dependent cost table") {
    const SmallMdp base = small_mdp(13, 3, 2, 0.9);
    ThetaKernel kernel = base.kernel;
    Eigen::MatrixXd override_cost(3, 2);
    override_cost << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
    kernel.cost_override = override_cost;

    const LossSpec lin = linear_spec(base.model);
    const LossSpec eff = effective_spec(lin, kernel);
    for (int s = 0; s < 3; ++s)
        for (int a = 0; a < 2; ++a) CHECK(eff.cost_vec(s * 2 + a) == override_cost(s, a));

    // kl ignores cost overrides entirely
    const LossSpec kl = kl_spec(14, 3, 0.9);
    const LossSpec eff_kl = effective_spec(kl, kernel);
    CHECK(eff_kl.kind == LossKind::kl_imitation);
    CHECK(eff_kl.target_state_dist == kl.target_state_dist);

    // no override: spec passes through unchanged
    const LossSpec plain = effective_spec(lin, base.kernel);
    CHECK(plain.cost_vec == lin.cost_vec);
}

TEST_CASE("direct gradient matches central differences for every loss kind") {
    // gamma^(K+1)/(1-gamma) ~ 1e-11 here, so the truncated objective and the
    // policy-gradient identity with exact Q agree far below the tolerance
    const int K = 120;
    const double h = 1e-5;
    const SmallMdp m = small_mdp(21, 3, 2, 0.8);
    const PolicyParams params = random_params(22, 3, 2);

    std::vector<LossSpec> specs;
    specs.push_back(linear_spec(m.model));
    LossSpec cmdp = linear_spec(m.model);
    cmdp.kind = LossKind::cmdp_lagrangian;
    cmdp.penalty_vec = Eigen::VectorXd::LinSpaced(m.model.dim(), 0.1, 1.0);
    cmdp.multiplier = 0.7;
    cmdp.budget = 1.0;
    specs.push_back(cmdp);
    specs.push_back(kl_spec(23, 3, 0.8));

    for (const LossSpec& spec : specs) {
        const Eigen::MatrixXd g = grad_c_direct(m.model, m.kernel, params, spec, K);
        const Eigen::MatrixXd fd = fd_gradient(m.model, m.kernel, params, spec, K, h);
        const double scale = std::max(1e-12, fd.cwiseAbs().maxCoeff());
        CHECK((g - fd).cwiseAbs().maxCoeff() / scale <= 1e-5);
    }
}

TEST_CASE("variational gradient agrees with the direct chain rule on kl") {
    const SmallMdp m = small_mdp(31, 3, 2, 0.8);
    const PolicyParams params = random_params(32, 3, 2);
    const LossSpec spec = kl_spec(33, 3, 0.8);
    GradConfig cfg;
    cfg.var_iters = 4000;
    cfg.K = 120;
    const Eigen::MatrixXd direct = grad_c_direct(m.model, m.kernel, params, spec, cfg.K);
    const Eigen::MatrixXd vari = grad_c_variational(m.model, m.kernel, params, spec, cfg);
    CHECK((direct - vari).norm() / direct.norm() <= 0.05);
}

TEST_CASE("variational gradient rejects direct-gradient loss kinds") {
    const SmallMdp m = small_mdp(41, 3, 2, 0.8);
    const PolicyParams params = random_params(42, 3, 2);
    GradConfig cfg;
    CHECK_THROWS_AS(grad_c_variational(m.model, m.kernel, params, linear_spec(m.model), cfg),
                    std::logic_error);
    LossSpec cmdp = linear_spec(m.model);
    cmdp.kind = LossKind::cmdp_lagrangian;
    cmdp.penalty_vec = Eigen::VectorXd::Ones(m.model.dim());
    CHECK_THROWS_AS(grad_c_variational(m.model, m.kernel, params, cmdp, cfg),
                    std::logic_error);
}

TEST_CASE("gaussian smoothing recovers a linear function's gradient") {
    Eigen::MatrixXd G(2, 2);
    G << 0.8, -0.4, 1.3, 0.2;
    const auto f = [&](const Eigen::MatrixXd& x) { return (G.array() * x.array()).sum(); };
    auto rng = make_rng(mix_seed({51}));
    const Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(2, 2);
    const Eigen::MatrixXd est = gaussian_smoothed_gradient(f, alpha, 1e-3, 20000, rng);
    CHECK((est - G).norm() / G.norm() <= 0.05);
}

TEST_CASE("gaussian smoothing on a quadratic stays near the true gradient") {
    const auto f = [](const Eigen::MatrixXd& x) { return 0.5 * x.squaredNorm(); };
    Eigen::MatrixXd alpha(2, 2);
    alpha << 1.0, -0.5, 0.25, 2.0;
    auto rng = make_rng(mix_seed({52}));
    const Eigen::MatrixXd est = gaussian_smoothed_gradient(f, alpha, 1e-3, 20000, rng);
    CHECK((est - alpha).norm() / alpha.norm() <= 0.05);
}

TEST_CASE("gaussian smoothing of a constant is exactly zero") {
    const auto f = [](const Eigen::MatrixXd&) { return 3.5; };
    auto rng = make_rng(mix_seed({53}));
    const Eigen::MatrixXd est =
        gaussian_smoothed_gradient(f, Eigen::MatrixXd::Zero(3, 2), 1e-2, 50, rng);
    CHECK(est.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gaussian smoothing validates nu and m") {
    const auto f = [](const Eigen::MatrixXd&) { return 0.0; };
    auto rng = make_rng(1);
    CHECK_THROWS_AS(gaussian_smoothed_gradient(f, Eigen::MatrixXd::Zero(1, 1), 0.0, 10, rng),
                    std::invalid_argument);
    CHECK_THROWS_AS(gaussian_smoothed_gradient(f, Eigen::MatrixXd::Zero(1, 1), 1e-3, 0, rng),
                    std::invalid_argument);
}

TEST_CASE("zeroth order gradient points along the direct gradient") {
    const SmallMdp m = small_mdp(61, 3, 2, 0.8);
    const PolicyParams params = random_params(62, 3, 2);
    const LossSpec spec = linear_spec(m.model);
    GradConfig cfg;
    cfg.K = 120;
    cfg.nu = 1e-3;
    cfg.m = 1000;
    const Eigen::MatrixXd direct = grad_c_direct(m.model, m.kernel, params, spec, cfg.K);
    const Eigen::MatrixXd zeroth =
        grad_c_zeroth_order(m.model, m.kernel, params, spec, cfg, mix_seed({63}));
    const double cosine =
        (direct.array() * zeroth.array()).sum() / (direct.norm() * zeroth.norm());
    CHECK(cosine >= 0.95);
    // deterministic given the seed
    const Eigen::MatrixXd again =
        grad_c_zeroth_order(m.model, m.kernel, params, spec, cfg, mix_seed({63}));
    CHECK((zeroth - again).norm() == 0.0);
}

TEST_CASE("assembled gradient under expectation is the plain average") {
    const SmallMdp base = small_mdp(71, 3, 2, 0.8);
    const SmallMdp alt = small_mdp(72, 3, 2, 0.8);
    const MixFamily family(base.model, base.kernel.P, alt.kernel.P);
    const Posterior post = two_beta_posterior(2.0, 2.0, 3.0, 1.5);
    const PolicyParams params = random_params(73, 3, 2);
    const LossSpec spec = linear_spec(base.model);
    GradConfig cfg;
    cfg.r = 6;
    cfg.K = 120;
    RiskMeasure expectation;

    const std::uint64_t seed = 555;
    const GradientEstimate est =
        assemble_gradient(base.model, family, post, params, spec, expectation, cfg, seed);

    // replay the same posterior draws and average the per-sample gradients
    const std::vector<Eigen::VectorXd> thetas = sample_theta(post, cfg.r, mix_seed({seed, 1}));
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(3, 2);
    for (int k = 0; k < cfg.r; ++k) {
        const ThetaKernel kernel = family.at(thetas[k]);
        CHECK(est.c_values(k) ==
              doctest::Approx(eval_c(base.model, kernel, params, spec, cfg.K)).epsilon(1e-12));
        const Eigen::MatrixXd g = grad_c_direct(base.model, kernel, params, spec, cfg.K);
        CHECK(est.per_sample_norms(k) == doctest::Approx(g.norm()).epsilon(1e-12));
        mean += g;
    }
    mean /= static_cast<double>(cfg.r);
    CHECK((est.g_hat - mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(est.rho == doctest::Approx(est.c_values.mean()).epsilon(1e-12));
    CHECK(est.envelope_converged);
}

TEST_CASE("assembled gradient at a point-mass posterior collapses to one draw") {
    const SmallMdp base = small_mdp(81, 3, 2, 0.8);
    const SmallMdp alt = small_mdp(82, 3, 2, 0.8);
    const MixFamily family(base.model, base.kernel.P, alt.kernel.P);
    // enormous pseudo-counts pin theta = (0.4, 0.25) up to ~1e-5 jitter
    const Posterior post = two_beta_posterior(0.4e9, 0.6e9, 0.25e9, 0.75e9);
    const PolicyParams params = random_params(83, 3, 2);
    const LossSpec spec = linear_spec(base.model);
    GradConfig cfg;
    cfg.r = 8;
    cfg.K = 120;
    RiskMeasure cvar;
    cvar.kind = RiskKind::cvar;
    cvar.beta = 0.9;

    const GradientEstimate est =
        assemble_gradient(base.model, family, post, params, spec, cvar, cfg, 999);
    Eigen::VectorXd theta(2);
    theta << 0.4, 0.25;
    const Eigen::MatrixXd ref = grad_c_direct(base.model, family.at(theta), params, spec, cfg.K);
    CHECK((est.g_hat - ref).cwiseAbs().maxCoeff() <= 1e-3);
}

TEST_CASE("cvar at beta zero weighs samples like the expectation") {
    const SmallMdp base = small_mdp(91, 3, 2, 0.8);
    const SmallMdp alt = small_mdp(92, 3, 2, 0.8);
    const MixFamily family(base.model, base.kernel.P, alt.kernel.P);
    const Posterior post = two_beta_posterior(2.0, 2.0, 2.0, 2.0);
    const PolicyParams params = random_params(93, 3, 2);
    const LossSpec spec = linear_spec(base.model);
    GradConfig cfg;
    cfg.r = 5;
    cfg.K = 120;
    RiskMeasure expectation;
    RiskMeasure cvar0;
    cvar0.kind = RiskKind::cvar;
    cvar0.beta = 0.0;
    const GradientEstimate a =
        assemble_gradient(base.model, family, post, params, spec, expectation, cfg, 77);
    const GradientEstimate b =
        assemble_gradient(base.model, family, post, params, spec, cvar0, cfg, 77);
    CHECK((a.g_hat - b.g_hat).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("four-sample cvar half keeps only the two worst draws") {
    const SmallMdp base = small_mdp(101, 3, 2, 0.8);
    const SmallMdp alt = small_mdp(102, 3, 2, 0.8);
    const MixFamily family(base.model, base.kernel.P, alt.kernel.P);
    const Posterior post = two_beta_posterior(2.0, 2.0, 2.0, 2.0);
    const PolicyParams params = random_params(103, 3, 2);
    const LossSpec spec = linear_spec(base.model);
    GradConfig cfg;
    cfg.r = 4;
    cfg.K = 120;
    RiskMeasure cvar;
    cvar.kind = RiskKind::cvar;
    cvar.beta = 0.5;

    const std::uint64_t seed = 4242;
    const GradientEstimate est =
        assemble_gradient(base.model, family, post, params, spec, cvar, cfg, seed);

    const std::vector<Eigen::VectorXd> thetas = sample_theta(post, 4, mix_seed({seed, 1}));
    std::vector<std::pair<double, Eigen::MatrixXd>> samples;
    for (const Eigen::VectorXd& theta : thetas) {
        const ThetaKernel kernel = family.at(theta);
        samples.emplace_back(eval_c(base.model, kernel, params, spec, cfg.K),
                             grad_c_direct(base.model, kernel, params, spec, cfg.K));
    }
    std::sort(samples.begin(), samples.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    // all four continuous draws are distinct, so with r=4, beta=0.5 the two
    // worst samples receive weight 1/(1-beta)=2 and the others zero
    REQUIRE(samples[1].first < samples[2].first - 1e-12);
    const Eigen::MatrixXd expected = 0.5 * (samples[2].second + samples[3].second);
    CHECK((est.g_hat - expected).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(est.rho == doctest::Approx(0.5 * (samples[2].first + samples[3].first)).epsilon(1e-12));
}

TEST_CASE("assembled gradient is deterministic in the seed") {
    const SmallMdp base = small_mdp(111, 3, 2, 0.8);
    const SmallMdp alt = small_mdp(112, 3, 2, 0.8);
    const MixFamily family(base.model, base.kernel.P, alt.kernel.P);
    const Posterior post = two_beta_posterior(3.0, 2.0, 2.0, 3.0);
    const PolicyParams params = random_params(113, 3, 2);
    const LossSpec spec = linear_spec(base.model);
    GradConfig cfg;
    cfg.r = 5;
    cfg.K = 120;
    RiskMeasure cvar;
    cvar.kind = RiskKind::cvar;
    cvar.beta = 0.5;
    const GradientEstimate a =
        assemble_gradient(base.model, family, post, params, spec, cvar, cfg, 31);
    const GradientEstimate b =
        assemble_gradient(base.model, family, post, params, spec, cvar, cfg, 31);
    const GradientEstimate c =
        assemble_gradient(base.model, family, post, params, spec, cvar, cfg, 32);
    CHECK((a.g_hat - b.g_hat).norm() == 0.0);
    CHECK(a.rho == b.rho);
    CHECK((a.g_hat - c.g_hat).norm() > 0.0);
    CHECK(a.rho == doctest::Approx(rho_value(cvar, a.c_values)).epsilon(1e-12));
    CHECK_THROWS_AS(
        assemble_gradient(base.model, family, post, params, spec, cvar,
                          [] { GradConfig bad; bad.r = 0; return bad; }(), 31),
        std::invalid_argument);
}
