#pragma once

#include "vmflow/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vmflow {

/* Relaxation schedule lambda. Piecewise-constant schedules take the value
 * of the piece containing t, with pieces closed on the right: the value at
 * a breakpoint is the left piece's (so a schedule "1 on [0,50], 0 after"
 * still reads 1 at t = 50). Integrators never straddle a breakpoint, so
 * only left limits matter there. */
struct LambdaSchedule {
    enum class Kind { Constant, PiecewiseConstant, HarmonicDiscrete };
    Kind kind = Kind::Constant;
    double constantValue = 1.0;
    std::vector<double> breakpoints;
    std::vector<double> values; // breakpoints.size() + 1 entries

    static LambdaSchedule constant(double value);
    static LambdaSchedule piecewise(std::vector<double> breakpoints,
                                    std::vector<double> values);
    /// lambda_n = 1/n, defined for the discrete iteration only.
    static LambdaSchedule harmonic();

    double value(double t) const;
    /// lambda_n with n >= 1.
    double discrete_value(int n) const;
    double inf_value() const;
    double sup_value() const;
    /// 0 < inf lambda <= sup lambda < inf  (the standing relaxation bound).
    bool satisfies_lower_upper_bounds() const;
    std::string describe() const;
};

enum class FlowKind { BF, FB, Prox };

std::string to_string(FlowKind k);

/// Constants entering the convergence conditions. alpha is the
/// cocoercivity of A_gamma, beta that of B, kappa the shared cocoercivity
/// of M^{-1}A_gamma and M^{-1}B in the M metric. rho (strong monotonicity
/// of B_{-gamma}) and eta enter the exponential-rate condition only.
struct FlowConstants {
    double alpha = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
    std::optional<double> rho;
    std::optional<double> eta;
};

/* One of three autonomous semiflows driven by u' = lambda(t) (T u - u):
 *
 *   BF    T = (I - gamma M^{-1} B) o J^M_{gamma A}   (backward, then forward)
 *   FB    T = J^M_{gamma A} o (I - gamma M^{-1} B)   (forward, then backward)
 *   Prox  the BF arrangement with A = subdifferential(f), B = grad g
 *
 * with J^M evaluated under the spec's ResolventConvention. */
struct FlowSpec {
    FlowKind kind = FlowKind::BF;
    OperatorSpec backward; // A
    OperatorSpec forward;  // B (single-valued)
    std::optional<FunctionSpec> f, g; // populated for Prox (objective traces)
    Metric metric;
    double gamma = 1.0;
    LambdaSchedule lambda;
    ResolventConvention convention = ResolventConvention::YosidaForm;
    FlowConstants constants;

    int dim() const { return metric.dim(); }
    double delta() const { return (2.0 * constants.kappa + gamma) / (2.0 * gamma); }
};

FlowSpec make_flow(FlowKind kind, OperatorSpec a, OperatorSpec b, Metric m,
                   double gamma, LambdaSchedule lambda,
                   ResolventConvention conv, FlowConstants constants);

/// Prox flow over f + g, arranged as BF over (subdifferential f, grad g)
/// with alpha = gamma.
FlowSpec make_prox_flow(FunctionSpec f, FunctionSpec g, Metric m, double gamma,
                        LambdaSchedule lambda, ResolventConvention conv,
                        double kappa);

/// The unrelaxed map T(u) of the flow.
Vector flow_map(const FlowSpec& spec, const Vector& u);

/// Right-hand side lambda(t) (T(u) - u).
Vector field(const FlowSpec& spec, double t, const Vector& u);

struct Residual {
    double euclid = 0.0;
    double metric = 0.0;
};

/// ||T(u) - u|| in the Euclidean and the M norm.
Residual residual(const FlowSpec& spec, const Vector& u);

/// The companion FB system over (B_{-gamma}, A_gamma), whose field agrees
/// with the BF field pointwise. Requires the YosidaForm convention.
FlowSpec swap_spec(const FlowSpec& spec);

struct ConditionCheck {
    std::string name;
    std::string detail;
    bool applicable = true;
    bool pass = false;
    double slack = 0.0; // rhs - lhs for "lhs <= rhs" style conditions
};

struct ValidationReport {
    std::vector<ConditionCheck> checks;
    /// True when every applicable structural condition holds (the
    /// asymptotic guarantees then apply).
    bool guarantees_apply() const;
    std::string render() const;
};

/// Numeric verdicts for the step-size, metric and relaxation conditions,
/// plus the exponential-rate condition when rho and eta are supplied.
ValidationReport validate_parameters(const FlowSpec& spec);

/// Stable content hash of everything defining the flow (used to stamp
/// recorded trajectories).
std::uint64_t spec_hash(const FlowSpec& spec);

} // namespace vmflow
