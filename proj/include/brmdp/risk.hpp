#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace brmdp {

enum class RiskKind { expectation, cvar, mean_semideviation };

/// Coherent risk measure in dual (envelope) form over a finite sample vector.
struct RiskMeasure {
    RiskKind kind = RiskKind::expectation;
    double beta = 0.0;      // cvar confidence, in [0,1)
    double c_msd = 0.5;     // semideviation weight, in [0,1]
    double p_order = 2.0;   // semideviation order (p = 2 supported by the solver)
};

/// Moment bound B_q of the envelope: 1/(1-beta) for cvar (q = infinity box),
/// 1 + c for mean-semideviation (q = 2), 1 for expectation.
double envelope_bound(const RiskMeasure& measure);

/// Density-ratio weights attaining rho = max_{xi in U} mean(xi * values).
struct EnvelopeSolution {
    Eigen::VectorXd xi;
    double rho_value = 0.0;
    std::vector<std::pair<std::string, double>> dual_multipliers;
    bool converged = true;
    int iterations = 0;
};

/// The ceil(r * beta)-th smallest sample (1-indexed, clamped to >= 1).
double var_order_statistic(const Eigen::VectorXd& values, double beta);

/// Closed-form CVaR envelope weights: samples strictly above the VaR order
/// statistic receive 1/(1-beta); the remaining mass needed for mean(xi)=1 is
/// shared uniformly by the samples equal to it (finite-sample atom handling).
EnvelopeSolution cvar_weights(const Eigen::VectorXd& values, double beta);

struct SaaConfig {
    int max_iters = 20000;
    double tol = 1e-6;
    double step_scale = 0.0;  // 0 => automatic scale from the sample vector
};

/// SAA saddle solver: projected gradient ascent on xi with steps step/sqrt(t),
/// feasibility kept by Euclidean projection each iteration. Stops when the
/// objective stalls below tol; reports converged=false when max_iters is hit.
EnvelopeSolution saa_envelope_solve(const Eigen::VectorXd& values,
                                    const RiskMeasure& measure,
                                    const SaaConfig& cfg = SaaConfig());

/// Closed-form rho(values): expectation, CVaR tail mean, or the primal
/// mean-upper-semideviation formula mean + c * (mean[(x-mean)_+^p])^(1/p).
double rho_value(const RiskMeasure& measure, const Eigen::VectorXd& values);

/// Production dispatcher for envelope weights: closed forms where available
/// (expectation, cvar, mean-semideviation with p=2), the SAA solver otherwise.
EnvelopeSolution envelope_weights(const Eigen::VectorXd& values, const RiskMeasure& measure,
                                  const SaaConfig& cfg = SaaConfig());

}  // namespace brmdp
