#pragma once

#include "vmflow/functions.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vmflow {

struct OperatorSpec;

/// x -> linear x + offset.
struct AffineMap {
    Matrix linear;
    Vector offset;
};

/// The relation A = N^{-1}, i.e. gra A = {(Nz, z)}. N may be singular,
/// in which case A is genuinely set-valued (and possibly nonmonotone);
/// such operators are handled through their Yosida approximations
/// A_gamma = (N + gamma I)^{-1}.
struct InverseOfMatrix {
    Matrix n;
};

/// A = subdifferential of a convex function.
struct SubdifferentialOf {
    FunctionSpec fn;
};

/// Affine piece of a scalar operator on an open interval.
struct ScalarPiece {
    double slope = 0.0;
    double intercept = 0.0;
    double at(double x) const { return slope * x + intercept; }
};

/// Monotone scalar operator: k breakpoints split the line into k+1 open
/// intervals, each carrying an affine piece; at a breakpoint the operator
/// takes the closed interval between the one-sided limits (the maximal
/// monotone fill-in).
struct PiecewiseScalar {
    std::vector<double> breakpoints;
    std::vector<ScalarPiece> pieces; // size breakpoints.size() + 1
};

/// The Yosida approximation of another operator, used as an operator in
/// its own right; evaluation reindexes into the base, (T_a)_b = T_{a+b}.
struct YosidaOracle {
    std::shared_ptr<const OperatorSpec> base;
    double index = 0.0;
};

/// Regularity claims attached to an operator. Claims are inputs, never
/// inferred; the check_* testers are the arbiters on sampled points.
struct OperatorTags {
    std::optional<double> cocoercive;         // beta
    std::optional<double> cohypomonotoneAlpha; // alpha: A_gamma is alpha-cocoercive
    std::optional<double> stronglyMonotone;   // rho
    bool maximalMonotone = false;
};

struct OperatorSpec {
    std::variant<AffineMap, InverseOfMatrix, SubdifferentialOf, PiecewiseScalar,
                 YosidaOracle>
        kind;
    OperatorTags tags;

    static OperatorSpec affine(Matrix linear, Vector offset);
    static OperatorSpec linear(Matrix m); // affine with zero offset
    static OperatorSpec inverse_of_matrix(Matrix n);
    static OperatorSpec subdifferential(FunctionSpec f);
    static OperatorSpec piecewise_scalar(std::vector<double> breakpoints,
                                         std::vector<ScalarPiece> pieces);
    static OperatorSpec yosida_of(OperatorSpec base, double index);
    static OperatorSpec zero(int dim);
    static OperatorSpec identity(int dim);

    /// Dimension when fixed by the data; -1 for dimension-agnostic kinds.
    int dim() const;
    std::string describe() const;
};

/// Direct evaluation where the operator is single-valued. Throws where it
/// is multivalued or undefined (e.g. a kink of a piecewise operator).
Vector apply(const OperatorSpec& op, const Vector& x);

/// Yosida approximation T_gamma = (T^{-1} + gamma I)^{-1} evaluated at x.
/// gamma = 0 degenerates to direct evaluation. Negative indices are
/// supported for kinds with a closed form (affine, matrix-inverse,
/// reindexed oracles).
Vector yosida(const OperatorSpec& op, double gamma, const Vector& x);

/// J_{gamma T}(x) = (I + gamma T)^{-1} x, solved per kind.
Vector resolvent_euclid(const OperatorSpec& op, double gamma, const Vector& x);

/// Metric resolvent under the chosen convention (see ResolventConvention):
/// Exact solves x in y + gamma M^{-1} T(y); YosidaForm evaluates
/// x - gamma M^{-1} T_gamma(x). These differ for M != I.
Vector resolvent_metric(const OperatorSpec& op, const Metric& m, double gamma,
                        const Vector& x, ResolventConvention conv);

/// J^M of the negatively-indexed Yosida operator B_{-gamma}, which
/// collapses to x - gamma M^{-1} B(x) without ever forming B_{-gamma}.
Vector negative_yosida_resolvent(const OperatorSpec& b, const Metric& m,
                                 double gamma, const Vector& x);

/// Closed-form affine representation of T_gamma, when one exists.
std::optional<AffineMap> yosida_as_affine(const OperatorSpec& op, double gamma);

/// Gap between the two metric-resolvent conventions at x; nullopt when the
/// exact form is unsupported for this operator/metric pairing.
std::optional<double> resolvent_convention_gap(const OperatorSpec& op,
                                               const Metric& m, double gamma,
                                               const Vector& x);

struct ReindexReport {
    int samples = 0;
    double maxDiscrepancy = 0.0;
    bool pass = false;
};

/// Checks (T_gamma)_delta = T_{gamma+delta} on the given points, computing
/// the left side through a genuinely separate route (materialized affine
/// map, or a scalar root solve).
ReindexReport yosida_reindex_check(const OperatorSpec& op, double gamma,
                                   double delta,
                                   const std::vector<Vector>& points,
                                   double tol = 1e-9);

/* ---- sampling-based property testers ---- */

using VectorMap = std::function<Vector(const Vector&)>;

VectorMap as_map(const OperatorSpec& op);
VectorMap yosida_map(const OperatorSpec& op, double gamma);

/// Seeded sample generator: uniform points in [-radius, radius]^dim.
struct SampleBox {
    int dim = 2;
    double radius = 10.0;
    std::uint64_t seed = 0x5eedu;
};

struct PropertyReport {
    std::string property; // names the inequality actually tested
    int samples = 0;
    int violations = 0;
    double maxViolation = 0.0;
    bool preconditionOk = true;
    std::string note;
    bool pass() const { return preconditionOk && violations == 0; }
};

/// <Tx - Ty, x - y> >= beta ||Tx - Ty||^2 on n sampled pairs.
PropertyReport check_cocoercive(const VectorMap& t, double beta,
                                const SampleBox& box, int n = 1000);

/// Cocoercivity of M^{-1}T in the M inner product, squared form:
/// <M^{-1}Tx - M^{-1}Ty, x - y>_M >= kappa ||M^{-1}Tx - M^{-1}Ty||_M^2,
/// guarded by the precondition ||M^{-1}|| <= min{alpha,beta}/kappa
/// (minAlphaBeta supplies min{alpha,beta}).
PropertyReport check_metric_cocoercive(const VectorMap& t, const Metric& m,
                                       double kappa, double minAlphaBeta,
                                       const SampleBox& box, int n = 1000);

/// a-averagedness in the given metric via the equivalent inequality
/// ||Tx-Ty||^2 <= ||x-y||^2 - ((1-a)/a)||(I-T)x-(I-T)y||^2.
PropertyReport check_averaged(const VectorMap& t, double a, const Metric& m,
                              const SampleBox& box, int n = 1000);

/// <x - y, Tx - Ty> >= rho ||x - y||^2 on n sampled pairs.
PropertyReport check_strongly_monotone(const VectorMap& t, double rho,
                                       const SampleBox& box, int n = 1000);

} // namespace vmflow
