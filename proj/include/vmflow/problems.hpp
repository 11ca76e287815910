#pragma once

#include "vmflow/integrate.hpp"

#include <string>
#include <vector>

namespace vmflow {

/* A named flow with ground truth attached. `solution` is a zero of A + B
 * (a minimizer of f + g for prox flows). For BF-arranged flows the
 * trajectory's attractor lives in the companion zero set, reached from the
 * solution through u = (I - gamma M^{-1} B) v; that image is stored as
 * `flowFixedPoint` and is checked to be a fixed point of the flow map
 * (residual <= 1e-10) when the instance is built. */
struct ProblemInstance {
    std::string name;
    FlowSpec spec;
    Vector u0Default;
    Vector solution;
    Vector flowFixedPoint;
    std::string solutionProvenance;
    std::string notes;
    IntegratorConfig defaultConfig;
};

/// Scalar inclusion: A the subdifferential-type step operator (0 below
/// zero, [0,1] at zero, 1 above), B = x/2, metric 3I, gamma = 1/2, exact
/// resolvent convention, relaxation 1 on [0,50] then 0. Solution 0.
ProblemInstance scalar_piecewise_problem();

/// 2-D inclusion with the nonmonotone A = diag(-2,0)^{-1} (cohypomonotone
/// through its Yosida approximation), B = diag(1/2,1/3), metric diag(4,8),
/// gamma = 4, Yosida-form convention. The flow map assembles to
/// diag(1/4, 35/48). Solution (0,0).
ProblemInstance cohypo_diag_problem();

/// Small LASSO instance min w||u||_1 + (1/2)||K u - b||^2 as a prox flow,
/// d <= 4, with the solution computed by exhaustive sign-pattern
/// enumeration (independent of the flow machinery).
ProblemInstance lasso_small(int d = 3, unsigned seed = 7);

/// Scalar affine instance built so that B_{-gamma} is rho-strongly
/// monotone with rho known in closed form (B = x/4, gamma = 1 gives
/// slope 1/3), the exponential-rate condition holds with eta = 0.9, and
/// the planted rate C = 1/6 is weaker than the true decay 1/8.
ProblemInstance strongly_monotone_problem();

std::vector<std::string> builtin_names();
ProblemInstance builtin(const std::string& name);

/// Exact LASSO minimizer by enumerating all 3^d sign patterns and solving
/// the corresponding stationarity systems (d small). Independent of the
/// prox/flow code paths.
Vector lasso_sign_pattern_solution(const Matrix& k, const Vector& b, double w);

} // namespace vmflow
