#include "vmflow/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vmflow {

LimitEstimate estimate_limit(const Trajectory& traj) {
    if (traj.states.empty())
        throw std::invalid_argument("estimate_limit: empty trajectory");
    LimitEstimate est;
    est.value = traj.states.back();
    est.finalResidual = traj.residuals.back();
    est.converged = traj.completed && est.finalResidual < 1e-6;
    return est;
}

RateFit fit_exponential_rate(const Trajectory& traj, const Vector& uStar) {
    double tEnd = traj.t_end();
    double lo = 0.1 * tEnd, hi = 0.9 * tEnd;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = 0;
    for (size_t i = 0; i < traj.size(); ++i) {
        double t = traj.times[i];
        if (t < lo || t > hi) continue;
        double d = (traj.states[i] - uStar).norm();
        if (d <= 1e-12) continue; // at the numeric floor
        double y = std::log(d);
        sx += t; sy += y; sxx += t * t; sxy += t * y; syy += y * y;
        ++n;
    }
    if (n < 10)
        throw std::runtime_error("fit_exponential_rate: degenerate fit window");
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double ybar = sy / n;
    double ssTot = syy - n * ybar * ybar;
    double intercept = (sy - slope * sx) / n;
    double ssRes = 0.0;
    // second pass for the residual sum
    for (size_t i = 0; i < traj.size(); ++i) {
        double t = traj.times[i];
        if (t < lo || t > hi) continue;
        double d = (traj.states[i] - uStar).norm();
        if (d <= 1e-12) continue;
        double r = std::log(d) - (intercept + slope * t);
        ssRes += r * r;
    }
    RateFit fit;
    fit.rate = -slope;
    fit.fitQuality = ssTot > 0 ? 1.0 - ssRes / ssTot : 1.0;
    fit.samples = n;
    return fit;
}

bool check_monotone_attractor(const Trajectory& traj, const Vector& uStar) {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& u : traj.states) {
        double d = (u - uStar).norm();
        if (d > prev + 1e-9) return false;
        prev = d;
    }
    return true;
}

RateClassification predicted_rate(double lambdaLower, double eta, double rho) {
    if (!(eta > 0.0) || !(rho > 0.0))
        throw std::invalid_argument("predicted_rate: eta and rho must be positive");
    if (1.0 / (eta * rho) >= 4.0)
        return {RateClassification::Kind::MonotoneAttractor, 0.0};
    return {RateClassification::Kind::ExponentialRate,
            lambdaLower * (1.0 - 1.0 / (4.0 * eta * rho))};
}

bool check_exponential_bound(const Trajectory& traj, const Vector& uStar,
                             double rateC) {
    if (traj.states.empty()) return false;
    double d0 = (traj.states.front() - uStar).norm();
    for (size_t i = 0; i < traj.size(); ++i) {
        double bound = (1.0 + 1e-6) * d0 * std::exp(-0.5 * rateC * traj.times[i]);
        if ((traj.states[i] - uStar).norm() > bound) return false;
    }
    return true;
}

std::vector<double> objective_trace(const Trajectory& traj,
                                    const FunctionSpec& f,
                                    const FunctionSpec& g,
                                    const FlowSpec& spec) {
    if (spec.kind != FlowKind::Prox)
        throw std::invalid_argument("objective_trace: not a prox flow");
    std::vector<double> out;
    out.reserve(traj.size());
    for (const auto& u : traj.states) {
        Vector v = prox_metric(f, spec.metric, spec.gamma, u, spec.convention);
        out.push_back(value(f, v) + value(g, v));
    }
    return out;
}

std::string ConvergenceReport::render() const {
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf, "  converged: %s\n", converged ? "yes" : "no");
    s += buf;
    std::snprintf(buf, sizeof buf, "  final residual: %.6g\n", finalResidual);
    s += buf;
    s += "  " + limitLabel + ": [";
    for (Eigen::Index i = 0; i < limitEstimate.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.9g", i ? ", " : "", limitEstimate[i]);
        s += buf;
    }
    s += "]\n";
    std::snprintf(buf, sizeof buf, "  monotone attractor: %s\n",
                  monotoneAttractor ? "yes" : "no");
    s += buf;
    if (rateEstimate) {
        std::snprintf(buf, sizeof buf, "  fitted rate: %.6g (R^2 = %.6g)\n",
                      *rateEstimate, fitQuality.value_or(0.0));
        s += buf;
    } else {
        s += "  fitted rate: n/a\n";
    }
    if (predictedRate) {
        std::snprintf(buf, sizeof buf,
                      "  predicted norm rate C/2: %.6g (bound %s)\n",
                      0.5 * *predictedRate,
                      exponentialBoundHolds.value_or(false) ? "holds" : "violated");
        s += buf;
    }
    s += "conditions:\n" + conditions.render();
    return s;
}

ConvergenceReport analyze(const FlowSpec& spec, const Trajectory& traj,
                          const std::optional<Vector>& uStar) {
    ConvergenceReport rep;
    LimitEstimate est = estimate_limit(traj);
    rep.limitEstimate = est.value;
    rep.finalResidual = est.finalResidual;
    rep.converged = est.converged;
    rep.conditions = validate_parameters(spec);

    std::optional<Vector> star = uStar;
    if (!star && est.converged) star = est.value;
    if (star) {
        rep.monotoneAttractor = check_monotone_attractor(traj, *star);
        try {
            RateFit fit = fit_exponential_rate(traj, *star);
            rep.rateEstimate = fit.rate;
            rep.fitQuality = fit.fitQuality;
        } catch (const std::exception&) {
            // degenerate window (e.g. started at the equilibrium)
        }
    }

    if (spec.constants.rho && spec.constants.eta) {
        bool condition_ok = false;
        for (const auto& c : rep.conditions.checks)
            if (c.name == "exponential_rate_condition")
                condition_ok = c.applicable && c.pass;
        if (condition_ok) {
            auto cls = predicted_rate(spec.lambda.inf_value(),
                                      *spec.constants.eta, *spec.constants.rho);
            if (cls.kind == RateClassification::Kind::ExponentialRate) {
                rep.predictedRate = cls.rate;
                if (star)
                    rep.exponentialBoundHolds =
                        check_exponential_bound(traj, *star, cls.rate);
            }
        }
    }
    return rep;
}

} // namespace vmflow
