#pragma once

#include "vmflow/linalg.hpp"

#include <optional>
#include <string>
#include <variant>

namespace vmflow {

/* Two ways to evaluate a resolvent (or prox) relative to a metric M:
 *
 *   Exact      solves x in y + gamma M^{-1} T(y) directly,
 *              i.e. (I + gamma M^{-1} T)^{-1} x.
 *   YosidaForm evaluates I - gamma M^{-1} T_gamma using the Euclidean
 *              Yosida approximation T_gamma = (T^{-1} + gamma I)^{-1}.
 *
 * The two coincide for M = I but differ for a general metric, so the
 * convention is an explicit input everywhere both could apply. */
enum class ResolventConvention { Exact, YosidaForm };

std::string to_string(ResolventConvention c);

struct L1 { double weight = 1.0; };                    // w * sum_i |x_i|
struct IndicatorBox { Vector lower, upper; };          // 0 on the box, +inf outside
struct Quadratic { Matrix q; Vector b; double c = 0; };// (1/2) x'Qx + b'x + c
struct PositivePartSum {};                             // sum_i max(x_i, 0)
struct ZeroFunction {};

/// A convex function given by one of a few closed-form families. Each
/// family has an exact proximal map, also under diagonal scaling.
struct FunctionSpec {
    std::variant<L1, IndicatorBox, Quadratic, PositivePartSum, ZeroFunction> kind;
    /// Cocoercivity constant of the gradient, when differentiable.
    std::optional<double> gradientCocoercivity;

    static FunctionSpec l1(double weight);
    static FunctionSpec box(Vector lower, Vector upper);
    static FunctionSpec quadratic(Matrix q, Vector b, double c = 0.0);
    static FunctionSpec positive_part();
    static FunctionSpec zero();

    bool differentiable() const;
    std::string describe() const;
};

/// f(x); +inf only for indicator functions evaluated outside their set.
double value(const FunctionSpec& f, const Vector& x);

/// Gradient of a differentiable f. Throws for nonsmooth variants.
Vector gradient(const FunctionSpec& f, const Vector& x);

/// argmin_v f(v) + ||v - x||^2 / (2 gamma), gamma > 0.
Vector prox_euclid(const FunctionSpec& f, double gamma, const Vector& x);

/// Proximal map in the metric M:
///   argmin_v f(v) + ||v - x||_M^2 / (2 gamma).
/// Exact supports (diagonal M, separable f) and (any M, quadratic f);
/// YosidaForm applies x - gamma M^{-1} (x - prox_euclid(f,gamma,x)) / gamma
/// for any pairing.
Vector prox_metric(const FunctionSpec& f, const Metric& m, double gamma,
                   const Vector& x, ResolventConvention conv);

/// Moreau envelope f_gamma(x) = inf_y f(y) + ||x - y||^2 / (2 gamma).
double moreau_value(const FunctionSpec& f, double gamma, const Vector& x);

/// grad f_gamma = (I - prox_{gamma f}) / gamma.
Vector moreau_gradient(const FunctionSpec& f, double gamma, const Vector& x);

/// Moreau envelope with negative parameter,
///   g_{-gamma}(u) = sup_eta { g(eta) - ||u - eta||^2 / (2 gamma) },
/// in closed form for quadratic (and zero) g with gamma in (0, beta].
double g_neg_value(const FunctionSpec& g, double gamma, const Vector& u);

/// prox^M of gamma g_{-gamma}, which reduces to I - gamma M^{-1} grad g.
Vector prox_g_neg_metric(const FunctionSpec& g, const Metric& m, double gamma,
                         const Vector& x);

} // namespace vmflow
