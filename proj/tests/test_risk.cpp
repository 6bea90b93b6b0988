#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "brmdp/risk.hpp"
#include "brmdp/rng.hpp"

using namespace brmdp;

namespace {

Eigen::VectorXd random_values(std::uint64_t seed, int r, double scale = 2.0) {
    auto rng = make_rng(mix_seed({seed, 71}));
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::VectorXd v(r);
    for (int i = 0; i < r; ++i) v(i) = normal(rng);
    return v;
}

/// Independent CVaR oracle: minimize t + mean[(x - t)_+]/(1 - beta) over t by
/// scanning the sample points (the minimum is attained at one of them).
double cvar_oracle(const Eigen::VectorXd& values, double beta) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < values.size(); ++i) {
        const double t = values(i);
        double mean_excess = 0.0;
        for (int j = 0; j < values.size(); ++j)
            mean_excess += std::max(0.0, values(j) - t);
        mean_excess /= static_cast<double>(values.size());
        best = std::min(best, t + mean_excess / (1.0 - beta));
    }
    return best;
}

/// Direct primal mean-upper-semideviation formula.
double msd_oracle(const Eigen::VectorXd& values, double c) {
    const double mean = values.mean();
    double acc = 0.0;
    for (int i = 0; i < values.size(); ++i)
        acc += std::pow(std::max(0.0, values(i) - mean), 2.0);
    return mean + c * std::sqrt(acc / static_cast<double>(values.size()));
}

void check_envelope_feasible(const EnvelopeSolution& sol, const RiskMeasure& m,
                             const Eigen::VectorXd& values) {
    CHECK(sol.xi.minCoeff() >= -1e-8);
    CHECK(sol.xi.mean() == doctest::Approx(1.0).epsilon(1e-6));
    if (m.kind == RiskKind::cvar)
        CHECK(sol.xi.maxCoeff() <= 1.0 / (1.0 - m.beta) + 1e-8);
    CHECK(sol.xi.dot(values) / static_cast<double>(values.size()) ==
          doctest::Approx(sol.rho_value).epsilon(1e-6));
}

}  // namespace

TEST_CASE("var order statistic picks the 1-indexed ceil(r beta) smallest") {
    Eigen::VectorXd v(3);
    v << 5.0, 1.0, 3.0;
    CHECK(var_order_statistic(v, 0.5) == 3.0);   // ceil(1.5) = 2nd smallest
    CHECK(var_order_statistic(v, 0.0) == 1.0);   // clamped to the minimum
    CHECK(var_order_statistic(v, 0.99) == 5.0);
}

TEST_CASE("cvar weights at beta=0 reduce to the expectation") {
    const Eigen::VectorXd v = random_values(1, 12);
    const EnvelopeSolution sol = cvar_weights(v, 0.0);
    CHECK((sol.xi - Eigen::VectorXd::Ones(12)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(sol.rho_value == doctest::Approx(v.mean()).epsilon(1e-12));
}

TEST_CASE("cvar weights split the atom at the var level") {
    Eigen::VectorXd v(4);
    v << 1.0, 2.0, 3.0, 4.0;
    const EnvelopeSolution sol = cvar_weights(v, 0.5);
    // strictly-above samples saturate at 1/(1-beta); the var sample takes the
    // leftover mass, which here is zero
    CHECK(sol.xi(0) == doctest::Approx(0.0));
    CHECK(sol.xi(1) == doctest::Approx(0.0));
    CHECK(sol.xi(2) == doctest::Approx(2.0));
    CHECK(sol.xi(3) == doctest::Approx(2.0));
    CHECK(sol.rho_value == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(sol.rho_value == doctest::Approx(cvar_oracle(v, 0.5)).epsilon(1e-12));
}

TEST_CASE("cvar matches the minimization oracle on random vectors") {
    for (int trial = 0; trial < 40; ++trial) {
        const int r = 1 + static_cast<int>(mix_seed({static_cast<std::uint64_t>(trial)}) % 33);
        const Eigen::VectorXd v = random_values(trial + 10, r);
        for (double beta : {0.0, 0.3, 0.5, 0.9, 0.95}) {
            RiskMeasure m;
            m.kind = RiskKind::cvar;
            m.beta = beta;
            const EnvelopeSolution sol = cvar_weights(v, beta);
            check_envelope_feasible(sol, m, v);
            CHECK(sol.rho_value == doctest::Approx(cvar_oracle(v, beta)).epsilon(1e-9));
            CHECK(rho_value(m, v) == doctest::Approx(sol.rho_value).epsilon(1e-12));
        }
    }
}

TEST_CASE("cvar handles repeated values") {
    Eigen::VectorXd v(5);
    v << 2.0, 2.0, 2.0, 2.0, 7.0;
    const EnvelopeSolution sol = cvar_weights(v, 0.6);
    RiskMeasure m;
    m.kind = RiskKind::cvar;
    m.beta = 0.6;
    check_envelope_feasible(sol, m, v);
    CHECK(sol.rho_value == doctest::Approx(cvar_oracle(v, 0.6)).epsilon(1e-9));

    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(6, 4.2);
    for (double beta : {0.0, 0.5, 0.9})
        CHECK(cvar_weights(constant, beta).rho_value == doctest::Approx(4.2));
}

TEST_CASE("cvar of a single sample is the sample") {
    Eigen::VectorXd v(1);
    v << -1.7;
    CHECK(cvar_weights(v, 0.9).rho_value == doctest::Approx(-1.7));
    CHECK_THROWS_AS(cvar_weights(Eigen::VectorXd(), 0.5), std::invalid_argument);
}

TEST_CASE("cvar beta near one approaches the worst sample") {
    const Eigen::VectorXd v = random_values(3, 40);
    RiskMeasure m;
    m.kind = RiskKind::cvar;
    m.beta = 0.99;
    CHECK(rho_value(m, v) == doctest::Approx(v.maxCoeff()).epsilon(1e-9));
}

TEST_CASE("mean-semideviation closed form agrees with its envelope weights") {
    for (int trial = 0; trial < 30; ++trial) {
        const int r = 2 + static_cast<int>(mix_seed({static_cast<std::uint64_t>(trial), 2}) % 30);
        const Eigen::VectorXd v = random_values(trial + 50, r);
        for (double c : {0.0, 0.3, 0.5, 1.0}) {
            RiskMeasure m;
            m.kind = RiskKind::mean_semideviation;
            m.c_msd = c;
            const double direct = msd_oracle(v, c);
            CHECK(rho_value(m, v) == doctest::Approx(direct).epsilon(1e-10));
            const EnvelopeSolution sol = envelope_weights(v, m);
            check_envelope_feasible(sol, m, v);
            CHECK(sol.rho_value == doctest::Approx(direct).epsilon(1e-8));
            // q=2 envelope feasibility: xi = 1 + zeta - mean(zeta) with
            // (mean zeta^2)^(1/2) <= c; recover zeta up to its mean shift
            const Eigen::VectorXd zeta_centered =
                sol.xi - Eigen::VectorXd::Ones(r);
            const double rms =
                std::sqrt(zeta_centered.squaredNorm() / static_cast<double>(r));
            CHECK(rms <= c + 1e-6);
        }
    }
}

TEST_CASE("expectation kind is the plain mean") {
    const Eigen::VectorXd v = (Eigen::VectorXd(3) << 1.0, 2.0, 3.0).finished();
    RiskMeasure m;
    CHECK(rho_value(m, v) == doctest::Approx(2.0));
    const EnvelopeSolution sol = envelope_weights(v, m);
    CHECK((sol.xi - Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("envelope bounds per kind") {
    RiskMeasure e;
    CHECK(envelope_bound(e) == doctest::Approx(1.0));
    RiskMeasure c;
    c.kind = RiskKind::cvar;
    c.beta = 0.75;
    CHECK(envelope_bound(c) == doctest::Approx(4.0));
    RiskMeasure m;
    m.kind = RiskKind::mean_semideviation;
    m.c_msd = 0.5;
    CHECK(envelope_bound(m) == doctest::Approx(1.5));
}

TEST_CASE("saa solver reproduces the closed forms") {
    int checked = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const int r = 2 + static_cast<int>(mix_seed({static_cast<std::uint64_t>(trial), 3}) % 63);
        const Eigen::VectorXd v = random_values(trial + 90, r);
        std::vector<RiskMeasure> measures;
        RiskMeasure e;
        measures.push_back(e);
        for (double beta : {0.3, 0.5, 0.9}) {
            RiskMeasure c;
            c.kind = RiskKind::cvar;
            c.beta = beta;
            measures.push_back(c);
        }
        for (double cm : {0.25, 0.5, 0.9}) {
            RiskMeasure m;
            m.kind = RiskKind::mean_semideviation;
            m.c_msd = cm;
            measures.push_back(m);
        }
        for (const RiskMeasure& m : measures) {
            const EnvelopeSolution sol = saa_envelope_solve(v, m);
            CHECK(std::abs(sol.rho_value - rho_value(m, v)) <= 1e-3);
            check_envelope_feasible(sol, m, v);
            ++checked;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("coherence axioms hold for all three kinds") {
    auto rng = make_rng(mix_seed({77}));
    std::normal_distribution<double> normal(0.0, 1.5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<RiskMeasure> measures;
    RiskMeasure e;
    measures.push_back(e);
    RiskMeasure c;
    c.kind = RiskKind::cvar;
    c.beta = 0.7;
    measures.push_back(c);
    RiskMeasure m;
    m.kind = RiskKind::mean_semideviation;
    m.c_msd = 0.6;
    measures.push_back(m);

    for (int trial = 0; trial < 80; ++trial) {
        const int r = 2 + static_cast<int>(mix_seed({static_cast<std::uint64_t>(trial), 4}) % 20);
        Eigen::VectorXd x(r), y(r);
        for (int i = 0; i < r; ++i) {
            x(i) = normal(rng);
            y(i) = normal(rng);
        }
        const double t = 2.0 * unif(rng) - 1.0;
        const double s = 0.1 + 2.0 * unif(rng);
        for (const RiskMeasure& measure : measures) {
            const double rx = rho_value(measure, x);
            // translation invariance
            CHECK(rho_value(measure, x.array() + t) == doctest::Approx(rx + t).epsilon(1e-9));
            // positive homogeneity
            CHECK(rho_value(measure, s * x) == doctest::Approx(s * rx).epsilon(1e-9));
            // monotonicity via a dominating vector
            const Eigen::VectorXd worse = x + y.cwiseAbs();
            CHECK(rho_value(measure, worse) >= rx - 1e-9);
            // subadditivity
            CHECK(rho_value(measure, x + y) <= rho_value(measure, x) + rho_value(measure, y) + 1e-9);
        }
    }
}

TEST_CASE("saa solver is deterministic and flags convergence") {
    const Eigen::VectorXd v = random_values(123, 24);
    RiskMeasure m;
    m.kind = RiskKind::cvar;
    m.beta = 0.8;
    const EnvelopeSolution a = saa_envelope_solve(v, m);
    const EnvelopeSolution b = saa_envelope_solve(v, m);
    CHECK((a.xi - b.xi).norm() == 0.0);
    CHECK(a.rho_value == b.rho_value);
    CHECK(a.converged);
    CHECK(a.iterations >= 1);
}
