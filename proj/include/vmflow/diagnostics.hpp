#pragma once

#include "vmflow/integrate.hpp"

#include <optional>
#include <string>

namespace vmflow {

struct LimitEstimate {
    Vector value;
    double finalResidual = 0.0;
    bool converged = false; // final residual < 1e-6
};

/// Final recorded state, flagged unconverged when the fixed-point residual
/// has not reached 1e-6. Finite dimension makes the reported limit a
/// strong one; reports label it "limit (finite-dim)".
LimitEstimate estimate_limit(const Trajectory& traj);

struct RateFit {
    double rate = 0.0;       // decay rate of ||u(t) - u*||
    double fitQuality = 0.0; // coefficient of determination
    int samples = 0;
};

/// Least-squares slope of log ||u(t) - u*|| over the window
/// [0.1 tEnd, 0.9 tEnd]; samples already at the floor (distance <= 1e-12)
/// are excluded. Throws when fewer than 10 samples remain.
RateFit fit_exponential_rate(const Trajectory& traj, const Vector& uStar);

/// True when ||u(t) - u*|| never increases by more than 1e-9 between
/// consecutive recorded samples.
bool check_monotone_attractor(const Trajectory& traj, const Vector& uStar);

struct RateClassification {
    enum class Kind { ExponentialRate, MonotoneAttractor } kind;
    double rate = 0.0; // lambdaLower (1 - 1/(4 eta rho)) when exponential
};

/// Decay-rate prediction from (lambdaLower, eta, rho): an exponential rate
/// C = lambdaLower (1 - 1/(4 eta rho)) when 1/(eta rho) < 4, otherwise the
/// monotone-attractor classification. The norm-level bound uses C/2.
RateClassification predicted_rate(double lambdaLower, double eta, double rho);

/// ||u(t)-u*|| <= (1 + 1e-6) ||u0-u*|| exp(-(C/2) t) at every sample.
bool check_exponential_bound(const Trajectory& traj, const Vector& uStar,
                             double rateC);

/// (f+g)(v(t)) with v = prox^M_{gamma f}(u(t)) at every recorded sample.
/// Only meaningful for Prox-kind flows.
std::vector<double> objective_trace(const Trajectory& traj,
                                    const FunctionSpec& f,
                                    const FunctionSpec& g,
                                    const FlowSpec& spec);

struct ConvergenceReport {
    Vector limitEstimate;
    double finalResidual = 0.0;
    bool converged = false;
    std::string limitLabel = "limit (finite-dim)";
    std::optional<double> rateEstimate;
    std::optional<double> fitQuality;
    bool monotoneAttractor = false;
    std::optional<bool> exponentialBoundHolds;
    std::optional<double> predictedRate;
    ValidationReport conditions;

    std::string render() const;
};

/// Full post-run analysis; uStar enables the attractor/rate checks (the
/// final state stands in when absent and the run converged).
ConvergenceReport analyze(const FlowSpec& spec, const Trajectory& traj,
                          const std::optional<Vector>& uStar = std::nullopt);

} // namespace vmflow
