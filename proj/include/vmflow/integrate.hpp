#pragma once

#include "vmflow/flows.hpp"

#include <string>
#include <vector>

namespace vmflow {

struct IntegratorConfig {
    enum class Method { Euler, RK4, RK45 };
    Method method = Method::RK4;
    double h = 1e-2;       // fixed-step size (Euler, RK4)
    double relTol = 1e-8;  // adaptive (RK45)
    double absTol = 1e-10;
    double tEnd = 10.0;
    int recordStride = 1;  // record every k-th accepted step

    void validate() const;
};

std::string to_string(IntegratorConfig::Method m);

/// Recorded trajectory samples. residuals[i] caches the Euclidean
/// fixed-point residual ||T(u_i) - u_i|| of the recorded state; objective
/// holds (f+g)(prox^M of the state) for Prox flows and is empty otherwise.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    std::vector<double> residuals;
    std::vector<double> objective;
    bool completed = true;
    std::string abortReason;
    std::uint64_t specHash = 0;
    IntegratorConfig config;
    std::vector<double> lambdaBreakpoints;

    size_t size() const { return times.size(); }
    double t_end() const { return times.empty() ? 0.0 : times.back(); }
    const Vector& final_state() const { return states.back(); }
};

struct DiscreteRun {
    std::vector<Vector> iterates;
    std::vector<double> norms; // ||u_n||
    LambdaSchedule schedule;
};

/* Integrates u' = lambda(t)(T u - u) from u(0) = u0 up to tEnd. Steps are
 * split exactly at the relaxation schedule's breakpoints, so lambda is
 * constant across every step taken. Fixed-step methods subdivide each
 * segment uniformly with step <= h; RK45 adapts within segments under the
 * configured tolerances. Integration aborts (completed = false) on state
 * blow-up (||u|| > 1e12 or non-finite) or adaptive step underflow,
 * keeping the samples recorded so far. */
Trajectory integrate(const FlowSpec& spec, const Vector& u0,
                     const IntegratorConfig& cfg);

/// The relaxed fixed-point iteration u_{n+1} = u_n + lambda_n (T u_n - u_n),
/// n = 1..nMax. Records every iterate and its norm (including u_0).
DiscreteRun iterate_discrete(const FlowSpec& spec, const Vector& u0,
                             const LambdaSchedule& schedule, int nMax);

/// Finite-difference velocity estimate from the recorded samples: central
/// away from schedule breakpoints and record boundaries, one-sided there.
/// Throws if t lies outside the recorded range.
Vector derivative_estimate(const Trajectory& traj, double t);

} // namespace vmflow
