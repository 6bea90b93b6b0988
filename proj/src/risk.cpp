#include "brmdp/risk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace brmdp {

namespace {

void check_measure(const RiskMeasure& m) {
    if (m.kind == RiskKind::cvar && !(m.beta >= 0.0 && m.beta < 1.0))
        throw std::invalid_argument("risk: cvar beta must lie in [0,1)");
    if (m.kind == RiskKind::mean_semideviation &&
        !(m.c_msd >= 0.0 && m.c_msd <= 1.0 && m.p_order >= 1.0))
        throw std::invalid_argument("risk: mean_semideviation needs c in [0,1], p >= 1");
}

/// Euclidean projection onto {0 <= xi <= cap, mean(xi) = 1}: bisection on the
/// uniform shift, then one exact shift recomputation on the active set found
/// (the bisection alone stalls at float resolution for far-away points).
Eigen::VectorXd project_box_mean(Eigen::VectorXd xi, double cap) {
    const Eigen::Index r = xi.size();
    double lo = -xi.maxCoeff();          // everything clips to 0: mean 0
    double hi = cap - xi.minCoeff();     // everything clips to cap: mean cap >= 1
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double mean = xi.unaryExpr([&](double v) {
                                 return std::clamp(v + mid, 0.0, cap);
                             }).mean();
        (mean < 1.0 ? lo : hi) = mid;
    }
    double shift = 0.5 * (lo + hi);
    Eigen::Index n_active = 0, n_cap = 0;
    double active_sum = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) {
        const double v = xi(i) + shift;
        if (v >= cap)
            ++n_cap;
        else if (v > 0.0) {
            ++n_active;
            active_sum += xi(i);
        }
    }
    if (n_active > 0)
        shift = (static_cast<double>(r) - static_cast<double>(n_cap) * cap - active_sum) /
                static_cast<double>(n_active);
    for (Eigen::Index i = 0; i < r; ++i) xi(i) = std::clamp(xi(i) + shift, 0.0, cap);
    return xi;
}

EnvelopeSolution saa_cvar(const Eigen::VectorXd& v, double beta, const SaaConfig& cfg) {
    const Eigen::Index r = v.size();
    EnvelopeSolution sol;
    if (beta == 0.0) {
        sol.xi = Eigen::VectorXd::Ones(r);
        sol.rho_value = v.mean();
        return sol;
    }
    const double cap = 1.0 / (1.0 - beta);
    // the objective is linear in xi, so a large base step lands the projected
    // iterate on the optimal face almost immediately; 1/sqrt(t) decay keeps the
    // remaining steps large enough to stay there
    const double scale = (cfg.step_scale > 0.0)
                             ? cfg.step_scale
                             : 1e9 * static_cast<double>(r) /
                                   std::max(v.cwiseAbs().maxCoeff(), 1e-12);
    Eigen::VectorXd xi = Eigen::VectorXd::Ones(r);
    Eigen::VectorXd best_xi = xi;
    double best_rho = xi.dot(v) / static_cast<double>(r);
    double prev = best_rho;
    sol.converged = false;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        xi = project_box_mean(xi + (scale / std::sqrt(static_cast<double>(t))) *
                                       (v / static_cast<double>(r)),
                              cap);
        const double rho = xi.dot(v) / static_cast<double>(r);
        if (rho > best_rho) {
            best_rho = rho;
            best_xi = xi;
        }
        sol.iterations = t;
        if (t > 1 && std::abs(rho - prev) <= cfg.tol) {
            sol.converged = true;
            break;
        }
        prev = rho;
    }
    sol.xi = best_xi;
    sol.rho_value = best_rho;
    sol.dual_multipliers = {{"mean_shift", 0.0}};
    return sol;
}

EnvelopeSolution saa_msd(const Eigen::VectorXd& v, double c, const SaaConfig& cfg) {
    // parameterize the envelope as xi = 1 + zeta - mean(zeta) with zeta >= 0 and
    // rms(zeta) <= c; ascent on zeta with projection (clip, then radial scaling)
    const Eigen::Index r = v.size();
    const Eigen::VectorXd dev = v.array() - v.mean();
    EnvelopeSolution sol;
    const double scale = (cfg.step_scale > 0.0)
                             ? cfg.step_scale
                             : 1e9 * std::sqrt(static_cast<double>(r)) /
                                   std::max(dev.cwiseAbs().maxCoeff(), 1e-12);
    Eigen::VectorXd zeta = Eigen::VectorXd::Zero(r);
    Eigen::VectorXd best_xi = Eigen::VectorXd::Ones(r);
    double best_rho = v.mean();
    double prev = best_rho;
    double radial = 1.0;
    sol.converged = false;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        zeta = (zeta + (scale / std::sqrt(static_cast<double>(t))) *
                           (dev / static_cast<double>(r)))
                   .cwiseMax(0.0);
        const double rms = std::sqrt(zeta.squaredNorm() / static_cast<double>(r));
        radial = (rms > c && rms > 0.0) ? c / rms : 1.0;
        zeta *= radial;
        const Eigen::VectorXd xi = (1.0 + (zeta.array() - zeta.mean())).matrix();
        const double rho = xi.dot(v) / static_cast<double>(r);
        if (rho > best_rho) {
            best_rho = rho;
            best_xi = xi;
        }
        sol.iterations = t;
        if (t > 1 && std::abs(rho - prev) <= cfg.tol) {
            sol.converged = true;
            break;
        }
        prev = rho;
    }
    sol.xi = best_xi;
    sol.rho_value = best_rho;
    sol.dual_multipliers = {{"radial_scale", radial}};
    return sol;
}

}  // namespace

double envelope_bound(const RiskMeasure& measure) {
    check_measure(measure);
    switch (measure.kind) {
        case RiskKind::expectation: return 1.0;
        case RiskKind::cvar: return 1.0 / (1.0 - measure.beta);
        case RiskKind::mean_semideviation: return 1.0 + measure.c_msd;
    }
    throw std::logic_error("envelope_bound: unhandled kind");
}

double var_order_statistic(const Eigen::VectorXd& values, double beta) {
    if (values.size() == 0) throw std::invalid_argument("var_order_statistic: empty values");
    std::vector<double> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end());
    const auto r = static_cast<double>(sorted.size());
    const auto idx = static_cast<std::size_t>(
        std::max<long>(1, static_cast<long>(std::ceil(r * beta))));
    return sorted[idx - 1];
}

EnvelopeSolution cvar_weights(const Eigen::VectorXd& values, double beta) {
    if (values.size() == 0) throw std::invalid_argument("cvar_weights: empty values");
    if (!(beta >= 0.0 && beta < 1.0))
        throw std::invalid_argument("cvar_weights: beta must lie in [0,1)");
    const Eigen::Index r = values.size();
    EnvelopeSolution sol;
    if (beta == 0.0) {
        sol.xi = Eigen::VectorXd::Ones(r);
        sol.rho_value = values.mean();
        return sol;
    }
    const double cap = 1.0 / (1.0 - beta);
    const double vhat = var_order_statistic(values, beta);
    Eigen::Index n_above = 0, n_at = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        if (values(i) > vhat)
            ++n_above;
        else if (values(i) == vhat)
            ++n_at;
    }
    // strictly-above samples saturate the box; the boundary atoms share whatever
    // weight is left so that mean(xi) = 1 holds exactly
    const double remainder =
        std::max(0.0, static_cast<double>(r) - static_cast<double>(n_above) * cap);
    sol.xi = Eigen::VectorXd::Zero(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (values(i) > vhat)
            sol.xi(i) = cap;
        else if (values(i) == vhat)
            sol.xi(i) = remainder / static_cast<double>(n_at);
    }
    sol.rho_value = sol.xi.dot(values) / static_cast<double>(r);
    sol.dual_multipliers = {{"var_threshold", vhat}};
    return sol;
}

EnvelopeSolution saa_envelope_solve(const Eigen::VectorXd& values,
                                    const RiskMeasure& measure, const SaaConfig& cfg) {
    if (values.size() == 0) throw std::invalid_argument("saa_envelope_solve: empty values");
    check_measure(measure);
    switch (measure.kind) {
        case RiskKind::expectation: {
            EnvelopeSolution sol;
            sol.xi = Eigen::VectorXd::Ones(values.size());
            sol.rho_value = values.mean();
            return sol;
        }
        case RiskKind::cvar: return saa_cvar(values, measure.beta, cfg);
        case RiskKind::mean_semideviation: return saa_msd(values, measure.c_msd, cfg);
    }
    throw std::logic_error("saa_envelope_solve: unhandled kind");
}

EnvelopeSolution envelope_weights(const Eigen::VectorXd& values, const RiskMeasure& measure,
                                  const SaaConfig& cfg) {
    if (values.size() == 0) throw std::invalid_argument("envelope_weights: empty values");
    check_measure(measure);
    switch (measure.kind) {
        case RiskKind::expectation: {
            EnvelopeSolution sol;
            sol.xi = Eigen::VectorXd::Ones(values.size());
            sol.rho_value = values.mean();
            return sol;
        }
        case RiskKind::cvar: return cvar_weights(values, measure.beta);
        case RiskKind::mean_semideviation: {
            if (measure.p_order != 2.0) return saa_msd(values, measure.c_msd, cfg);
            // p = 2 maximizer in closed form: zeta* proportional to the positive
            // deviations, scaled to the rms bound c
            const Eigen::Index r = values.size();
            const double mean = values.mean();
            const Eigen::VectorXd pos = (values.array() - mean).max(0.0).matrix();
            const double rms = std::sqrt(pos.squaredNorm() / static_cast<double>(r));
            EnvelopeSolution sol;
            if (rms <= 0.0) {
                sol.xi = Eigen::VectorXd::Ones(r);
                sol.rho_value = mean;
                return sol;
            }
            const Eigen::VectorXd zeta = (measure.c_msd / rms) * pos;
            sol.xi = (1.0 + (zeta.array() - zeta.mean())).matrix();
            sol.rho_value = sol.xi.dot(values) / static_cast<double>(r);
            return sol;
        }
    }
    throw std::logic_error("envelope_weights: unhandled kind");
}

double rho_value(const RiskMeasure& measure, const Eigen::VectorXd& values) {
    if (values.size() == 0) throw std::invalid_argument("rho_value: empty values");
    check_measure(measure);
    switch (measure.kind) {
        case RiskKind::expectation: return values.mean();
        case RiskKind::cvar: return cvar_weights(values, measure.beta).rho_value;
        case RiskKind::mean_semideviation: {
            const double mean = values.mean();
            const Eigen::ArrayXd pos = (values.array() - mean).max(0.0);
            const double moment = pos.pow(measure.p_order).mean();
            return mean + measure.c_msd * std::pow(moment, 1.0 / measure.p_order);
        }
    }
    throw std::logic_error("rho_value: unhandled kind");
}

}  // namespace brmdp
