#include "vmflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace vmflow {

LambdaSchedule LambdaSchedule::constant(double v) {
    if (v < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    LambdaSchedule s;
    s.kind = Kind::Constant;
    s.constantValue = v;
    return s;
}

LambdaSchedule LambdaSchedule::piecewise(std::vector<double> breakpoints,
                                         std::vector<double> values) {
    if (values.size() != breakpoints.size() + 1)
        throw std::invalid_argument("lambda schedule: need breakpoints+1 values");
    for (size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw std::invalid_argument("lambda schedule: breakpoints must increase");
    for (double v : values)
        if (v < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    LambdaSchedule s;
    s.kind = Kind::PiecewiseConstant;
    s.breakpoints = std::move(breakpoints);
    s.values = std::move(values);
    return s;
}

LambdaSchedule LambdaSchedule::harmonic() {
    LambdaSchedule s;
    s.kind = Kind::HarmonicDiscrete;
    return s;
}

double LambdaSchedule::value(double t) const {
    switch (kind) {
    case Kind::Constant:
        return constantValue;
    case Kind::PiecewiseConstant: {
        size_t idx = 0;
        while (idx < breakpoints.size() && breakpoints[idx] < t) ++idx;
        return values[idx];
    }
    case Kind::HarmonicDiscrete:
        throw std::logic_error("harmonic schedule is defined for the discrete iteration only");
    }
    return 0.0;
}

double LambdaSchedule::discrete_value(int n) const {
    if (n < 1) throw std::invalid_argument("discrete schedule index starts at 1");
    if (kind == Kind::HarmonicDiscrete) return 1.0 / n;
    return value(static_cast<double>(n));
}

double LambdaSchedule::inf_value() const {
    switch (kind) {
    case Kind::Constant: return constantValue;
    case Kind::PiecewiseConstant: return *std::min_element(values.begin(), values.end());
    case Kind::HarmonicDiscrete: return 0.0; // 1/n -> 0
    }
    return 0.0;
}

double LambdaSchedule::sup_value() const {
    switch (kind) {
    case Kind::Constant: return constantValue;
    case Kind::PiecewiseConstant: return *std::max_element(values.begin(), values.end());
    case Kind::HarmonicDiscrete: return 1.0;
    }
    return 0.0;
}

bool LambdaSchedule::satisfies_lower_upper_bounds() const {
    return inf_value() > 0.0 && std::isfinite(sup_value());
}

std::string LambdaSchedule::describe() const {
    char buf[160];
    switch (kind) {
    case Kind::Constant:
        std::snprintf(buf, sizeof buf, "constant(%g)", constantValue);
        return buf;
    case Kind::PiecewiseConstant: {
        std::string s = "piecewise(values ";
        for (size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%g", values[i]);
            s += buf;
            if (i < breakpoints.size()) {
                std::snprintf(buf, sizeof buf, " |t=%g| ", breakpoints[i]);
                s += buf;
            }
        }
        return s + ")";
    }
    case Kind::HarmonicDiscrete:
        return "harmonic(1/n)";
    }
    return "";
}

std::string to_string(FlowKind k) {
    switch (k) {
    case FlowKind::BF: return "BF";
    case FlowKind::FB: return "FB";
    case FlowKind::Prox: return "PROX";
    }
    return "";
}

FlowSpec make_flow(FlowKind kind, OperatorSpec a, OperatorSpec b, Metric m,
                   double gamma, LambdaSchedule lambda,
                   ResolventConvention conv, FlowConstants constants) {
    if (!(gamma > 0.0)) throw std::invalid_argument("flow needs gamma > 0");
    int d = m.dim();
    if (a.dim() >= 0 && a.dim() != d)
        throw std::invalid_argument("backward operator dimension mismatch");
    if (b.dim() >= 0 && b.dim() != d)
        throw std::invalid_argument("forward operator dimension mismatch");
    FlowSpec spec{kind, std::move(a), std::move(b), std::nullopt, std::nullopt,
                  std::move(m), gamma, std::move(lambda), conv, constants};
    return spec;
}

FlowSpec make_prox_flow(FunctionSpec f, FunctionSpec g, Metric m, double gamma,
                        LambdaSchedule lambda, ResolventConvention conv,
                        double kappa) {
    if (!g.differentiable())
        throw std::invalid_argument("prox flow needs differentiable g");
    double beta = g.gradientCocoercivity.value_or(
        std::numeric_limits<double>::infinity());
    OperatorSpec a = OperatorSpec::subdifferential(f);
    a.tags.maximalMonotone = true;
    a.tags.cohypomonotoneAlpha = gamma; // A_gamma is gamma-cocoercive
    OperatorSpec b = OperatorSpec::subdifferential(g);
    b.tags.cocoercive = beta;
    FlowSpec spec = make_flow(FlowKind::Prox, std::move(a), std::move(b),
                              std::move(m), gamma, std::move(lambda), conv,
                              FlowConstants{gamma, beta, kappa, std::nullopt,
                                            std::nullopt});
    spec.f = std::move(f);
    spec.g = std::move(g);
    return spec;
}

Vector flow_map(const FlowSpec& spec, const Vector& u) {
    if (spec.kind == FlowKind::FB) {
        Vector w = u - spec.gamma * spec.metric.solve(apply(spec.forward, u));
        return resolvent_metric(spec.backward, spec.metric, spec.gamma, w,
                                spec.convention);
    }
    Vector w = resolvent_metric(spec.backward, spec.metric, spec.gamma, u,
                                spec.convention);
    return w - spec.gamma * spec.metric.solve(apply(spec.forward, w));
}

Vector field(const FlowSpec& spec, double t, const Vector& u) {
    double lam = spec.lambda.value(t);
    if (lam == 0.0) return Vector::Zero(u.size());
    return lam * (flow_map(spec, u) - u);
}

Residual residual(const FlowSpec& spec, const Vector& u) {
    Vector diff = flow_map(spec, u) - u;
    return {diff.norm(), spec.metric.norm(diff)};
}

FlowSpec swap_spec(const FlowSpec& spec) {
    if (spec.kind != FlowKind::BF && spec.kind != FlowKind::Prox)
        throw std::invalid_argument("swap_spec expects a BF-arranged flow");
    if (spec.convention != ResolventConvention::YosidaForm)
        throw std::invalid_argument(
            "swap_spec needs the YosidaForm convention; the exact metric "
            "resolvent does not satisfy the swap identities");
    OperatorSpec a = OperatorSpec::yosida_of(spec.backward, spec.gamma);
    a.tags.cocoercive = spec.constants.alpha;
    OperatorSpec b = OperatorSpec::yosida_of(spec.forward, -spec.gamma);
    b.tags.cohypomonotoneAlpha = spec.constants.beta;
    FlowConstants c = spec.constants;
    std::swap(c.alpha, c.beta);
    // FB over (B_{-gamma}, A_gamma): backward role is B_{-gamma}
    return make_flow(FlowKind::FB, std::move(b), std::move(a), spec.metric,
                     spec.gamma, spec.lambda, spec.convention, c);
}

bool ValidationReport::guarantees_apply() const {
    for (const auto& c : checks)
        if (c.applicable && !c.pass) return false;
    return true;
}

std::string ValidationReport::render() const {
    std::string out;
    char buf[256];
    for (const auto& c : checks) {
        const char* mark = !c.applicable ? " n/a" : (c.pass ? "pass" : "FAIL");
        std::snprintf(buf, sizeof buf, "  [%s] %s: %s", mark, c.name.c_str(),
                      c.detail.c_str());
        out += buf;
        if (c.applicable) {
            std::snprintf(buf, sizeof buf, " (slack %.6g)", c.slack);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

ValidationReport validate_parameters(const FlowSpec& spec) {
    ValidationReport rep;
    char buf[256];
    const double gamma = spec.gamma;
    const double alpha = spec.constants.alpha;
    const double beta = spec.constants.beta;
    const double kappa = spec.constants.kappa;
    const double opNorm = spec.metric.op_norm();
    const double minAB = std::min(alpha, beta);

    {
        ConditionCheck c;
        c.name = "gamma_range";
        c.pass = gamma > 0.0 && gamma < 2.0 * kappa;
        c.slack = 2.0 * kappa - gamma;
        std::snprintf(buf, sizeof buf, "gamma = %g in (0, 2 kappa) = (0, %g)",
                      gamma, 2.0 * kappa);
        c.detail = buf;
        rep.checks.push_back(c);
    }
    {
        ConditionCheck c;
        c.name = "kappa_bound";
        c.pass = kappa <= opNorm * minAB;
        c.slack = opNorm * minAB - kappa;
        std::snprintf(buf, sizeof buf,
                      "kappa = %g <= ||M|| min{alpha,beta} = %g", kappa,
                      opNorm * minAB);
        c.detail = buf;
        rep.checks.push_back(c);
    }
    {
        ConditionCheck c;
        c.name = "metric_inverse_bound";
        double inv = spec.metric.inverse_norm();
        c.pass = inv <= minAB / kappa;
        c.slack = minAB / kappa - inv;
        std::snprintf(buf, sizeof buf,
                      "||M^-1|| = %g <= min{alpha,beta}/kappa = %g", inv,
                      minAB / kappa);
        c.detail = buf;
        rep.checks.push_back(c);
    }
    {
        ConditionCheck c;
        c.name = "relaxation_bounds";
        c.pass = spec.lambda.satisfies_lower_upper_bounds();
        c.slack = spec.lambda.inf_value();
        std::snprintf(buf, sizeof buf,
                      "0 < inf lambda (= %g) and sup lambda (= %g) finite; %s",
                      spec.lambda.inf_value(), spec.lambda.sup_value(),
                      c.pass ? "guarantees apply"
                             : "guarantees not applicable under this schedule");
        c.detail = buf;
        rep.checks.push_back(c);
    }
    {
        ConditionCheck c;
        c.name = "exponential_rate_condition";
        if (spec.constants.rho && spec.constants.eta) {
            double rho = *spec.constants.rho;
            double eta = *spec.constants.eta;
            double lhs = 1.0 / (2.0 * alpha) +
                         eta * opNorm * opNorm / (2.0 * gamma * gamma);
            double rhs = rho + opNorm * spec.lambda.sup_value() / gamma;
            c.pass = lhs <= rhs;
            c.slack = rhs - lhs;
            std::snprintf(buf, sizeof buf,
                          "1/(2 alpha) + eta ||M||^2 / (2 gamma^2) = %g <= "
                          "rho + ||M|| sup(lambda) / gamma = %g",
                          lhs, rhs);
            c.detail = buf;
        } else {
            c.applicable = false;
            c.detail = "rho and eta not supplied";
        }
        rep.checks.push_back(c);
    }
    return rep;
}

/* ---- content hash ---- */

namespace {

struct Fnv {
    std::uint64_t h = 1469598103934665603ull;
    void bytes(const void* p, size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    }
    void add(double v) { bytes(&v, sizeof v); }
    void add(int v) { bytes(&v, sizeof v); }
    void add(const Vector& v) {
        add(static_cast<int>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) add(v[i]);
    }
    void add(const Matrix& m) {
        add(static_cast<int>(m.rows()));
        add(static_cast<int>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) add(m(i, j));
    }
};

void hash_function(Fnv& f, const FunctionSpec& fn) {
    f.add(static_cast<int>(fn.kind.index()));
    if (const auto* l = std::get_if<L1>(&fn.kind)) f.add(l->weight);
    if (const auto* b = std::get_if<IndicatorBox>(&fn.kind)) {
        f.add(b->lower);
        f.add(b->upper);
    }
    if (const auto* q = std::get_if<Quadratic>(&fn.kind)) {
        f.add(q->q);
        f.add(q->b);
        f.add(q->c);
    }
}

void hash_operator(Fnv& f, const OperatorSpec& op) {
    f.add(static_cast<int>(op.kind.index()));
    if (const auto* a = std::get_if<AffineMap>(&op.kind)) {
        f.add(a->linear);
        f.add(a->offset);
    }
    if (const auto* n = std::get_if<InverseOfMatrix>(&op.kind)) f.add(n->n);
    if (const auto* s = std::get_if<SubdifferentialOf>(&op.kind))
        hash_function(f, s->fn);
    if (const auto* p = std::get_if<PiecewiseScalar>(&op.kind)) {
        for (double b : p->breakpoints) f.add(b);
        for (const auto& piece : p->pieces) {
            f.add(piece.slope);
            f.add(piece.intercept);
        }
    }
    if (const auto* y = std::get_if<YosidaOracle>(&op.kind)) {
        f.add(y->index);
        hash_operator(f, *y->base);
    }
}

} // namespace

std::uint64_t spec_hash(const FlowSpec& spec) {
    Fnv f;
    f.add(static_cast<int>(spec.kind));
    f.add(static_cast<int>(spec.convention));
    f.add(spec.gamma);
    f.add(spec.metric.matrix());
    f.add(static_cast<int>(spec.lambda.kind));
    f.add(spec.lambda.constantValue);
    for (double b : spec.lambda.breakpoints) f.add(b);
    for (double v : spec.lambda.values) f.add(v);
    f.add(spec.constants.alpha);
    f.add(spec.constants.beta);
    f.add(spec.constants.kappa);
    f.add(spec.constants.rho.value_or(-1.0));
    f.add(spec.constants.eta.value_or(-1.0));
    hash_operator(f, spec.backward);
    hash_operator(f, spec.forward);
    if (spec.f) hash_function(f, *spec.f);
    if (spec.g) hash_function(f, *spec.g);
    return f.h;
}

} // namespace vmflow
