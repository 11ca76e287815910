#include "vmflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vmflow {

void IntegratorConfig::validate() const {
    if (!(tEnd > 0.0)) throw std::invalid_argument("integrator: tEnd must be > 0");
    if (method != Method::RK45 && !(h > 0.0))
        throw std::invalid_argument("integrator: step size must be > 0");
    if (method == Method::RK45 && (!(relTol > 0.0) || !(absTol > 0.0)))
        throw std::invalid_argument("integrator: tolerances must be > 0");
    if (recordStride < 1)
        throw std::invalid_argument("integrator: recordStride must be >= 1");
}

std::string to_string(IntegratorConfig::Method m) {
    switch (m) {
    case IntegratorConfig::Method::Euler: return "euler";
    case IntegratorConfig::Method::RK4: return "rk4";
    case IntegratorConfig::Method::RK45: return "rk45";
    }
    return "";
}

namespace {

constexpr double kBlowupNorm = 1e12;

struct Recorder {
    const FlowSpec& spec;
    Trajectory& traj;
    bool prox;

    void record(double t, const Vector& u) {
        traj.times.push_back(t);
        traj.states.push_back(u);
        traj.residuals.push_back(residual(spec, u).euclid);
        if (prox) {
            Vector v = prox_metric(*spec.f, spec.metric, spec.gamma, u,
                                   spec.convention);
            traj.objective.push_back(value(*spec.f, v) + value(*spec.g, v));
        }
    }
};

bool state_ok(const Vector& u) {
    return u.allFinite() && u.norm() <= kBlowupNorm;
}

Vector rk4_step(const FlowSpec& spec, double lam, const Vector& u, double h) {
    Vector k1 = lam * (flow_map(spec, u) - u);
    Vector u2 = u + 0.5 * h * k1;
    Vector k2 = lam * (flow_map(spec, u2) - u2);
    Vector u3 = u + 0.5 * h * k2;
    Vector k3 = lam * (flow_map(spec, u3) - u3);
    Vector u4 = u + h * k3;
    Vector k4 = lam * (flow_map(spec, u4) - u4);
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) embedded pair; returns the 5th-order state and the
// scaled error estimate of the accompanying 4th-order solution.
std::pair<Vector, double> dopri_step(const FlowSpec& spec, double lam,
                                     const Vector& u, double h, double relTol,
                                     double absTol) {
    auto f = [&](const Vector& v) { return Vector(lam * (flow_map(spec, v) - v)); };
    Vector k1 = f(u);
    Vector k2 = f(u + h * (1.0 / 5.0) * k1);
    Vector k3 = f(u + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    Vector k4 = f(u + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
    Vector k5 = f(u + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                           64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
    Vector k6 = f(u + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                           46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                           5103.0 / 18656.0 * k5));
    Vector u5 = u + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 +
                         125.0 / 192.0 * k4 - 2187.0 / 6784.0 * k5 +
                         11.0 / 84.0 * k6);
    Vector k7 = f(u5);
    Vector err = h * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 +
                      71.0 / 1920.0 * k4 - 17253.0 / 339200.0 * k5 +
                      22.0 / 525.0 * k6 - 1.0 / 40.0 * k7);
    double scaled = 0.0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double sc = absTol + relTol * std::max(std::abs(u[i]), std::abs(u5[i]));
        double e = err[i] / sc;
        scaled += e * e;
    }
    scaled = std::sqrt(scaled / static_cast<double>(u.size()));
    return {std::move(u5), scaled};
}

} // namespace

Trajectory integrate(const FlowSpec& spec, const Vector& u0,
                     const IntegratorConfig& cfg) {
    cfg.validate();
    if (u0.size() != spec.dim())
        throw std::invalid_argument("integrate: initial state dimension mismatch");
    if (!is_finite(u0))
        throw std::invalid_argument("integrate: initial state is not finite");

    Trajectory traj;
    traj.specHash = spec_hash(spec);
    traj.config = cfg;
    for (double b : spec.lambda.breakpoints)
        if (b > 0.0 && b < cfg.tEnd) traj.lambdaBreakpoints.push_back(b);

    std::vector<double> bounds{0.0};
    bounds.insert(bounds.end(), traj.lambdaBreakpoints.begin(),
                  traj.lambdaBreakpoints.end());
    bounds.push_back(cfg.tEnd);

    bool prox = spec.kind == FlowKind::Prox && spec.f && spec.g;
    Recorder rec{spec, traj, prox};

    Vector u = u0;
    rec.record(0.0, u);
    long stepIndex = 0;

    for (size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double a = bounds[seg], b = bounds[seg + 1];
        const double lam = spec.lambda.value(0.5 * (a + b));

        if (cfg.method != IntegratorConfig::Method::RK45) {
            long n = std::max<long>(1, static_cast<long>(
                                           std::ceil((b - a) / cfg.h - 1e-9)));
            double hseg = (b - a) / static_cast<double>(n);
            for (long i = 0; i < n; ++i) {
                double t1 = (i + 1 == n) ? b : a + hseg * static_cast<double>(i + 1);
                if (lam != 0.0) {
                    if (cfg.method == IntegratorConfig::Method::Euler)
                        u = u + hseg * lam * (flow_map(spec, u) - u);
                    else
                        u = rk4_step(spec, lam, u, hseg);
                }
                if (!state_ok(u)) {
                    traj.completed = false;
                    traj.abortReason = "state blow-up at t = " + std::to_string(t1);
                    return traj;
                }
                ++stepIndex;
                if (stepIndex % cfg.recordStride == 0 || i + 1 == n)
                    rec.record(t1, u);
            }
        } else {
            double t = a;
            double h = std::min(cfg.h, b - a);
            const long maxSteps = 50'000'000;
            long taken = 0;
            while (t < b) {
                if (++taken > maxSteps) {
                    traj.completed = false;
                    traj.abortReason = "adaptive step limit reached";
                    return traj;
                }
                h = std::min(h, b - t);
                if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                    traj.completed = false;
                    traj.abortReason = "adaptive step underflow at t = " +
                                       std::to_string(t);
                    return traj;
                }
                if (lam == 0.0) {
                    t = b;
                    ++stepIndex;
                    rec.record(t, u);
                    break;
                }
                auto [unew, err] = dopri_step(spec, lam, u, h, cfg.relTol,
                                              cfg.absTol);
                if (err <= 1.0) {
                    t += h;
                    u = std::move(unew);
                    if (!state_ok(u)) {
                        traj.completed = false;
                        traj.abortReason = "state blow-up at t = " +
                                           std::to_string(t);
                        return traj;
                    }
                    ++stepIndex;
                    if (stepIndex % cfg.recordStride == 0 || t >= b)
                        rec.record(t, u);
                }
                double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
                h *= std::clamp(grow, 0.2, 5.0);
            }
        }
    }
    return traj;
}

DiscreteRun iterate_discrete(const FlowSpec& spec, const Vector& u0,
                             const LambdaSchedule& schedule, int nMax) {
    if (u0.size() != spec.dim())
        throw std::invalid_argument("iterate_discrete: dimension mismatch");
    DiscreteRun run;
    run.schedule = schedule;
    run.iterates.reserve(nMax + 1);
    run.norms.reserve(nMax + 1);
    Vector u = u0;
    run.iterates.push_back(u);
    run.norms.push_back(u.norm());
    for (int n = 1; n <= nMax; ++n) {
        double lam = schedule.discrete_value(n);
        u = u + lam * (flow_map(spec, u) - u);
        if (!u.allFinite())
            throw std::runtime_error("iterate_discrete: non-finite iterate at n = " +
                                     std::to_string(n));
        run.iterates.push_back(u);
        run.norms.push_back(u.norm());
    }
    return run;
}

Vector derivative_estimate(const Trajectory& traj, double t) {
    const auto& ts = traj.times;
    if (ts.size() < 2)
        throw std::invalid_argument("derivative_estimate: too few samples");
    if (t < ts.front() || t > ts.back())
        throw std::invalid_argument("derivative_estimate: t outside recorded range");

    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    size_t j = static_cast<size_t>(it - ts.begin());
    if (j > 0 && (j == ts.size() || t - ts[j - 1] < ts[j] - t)) --j;

    auto straddles_breakpoint = [&](double lo, double hi) {
        for (double b : traj.lambdaBreakpoints)
            if (b > lo && b < hi) return true;
        return false;
    };
    auto onesided = [&](size_t lo, size_t hi) {
        return Vector((traj.states[hi] - traj.states[lo]) / (ts[hi] - ts[lo]));
    };

    bool atBreakpoint = false;
    for (double b : traj.lambdaBreakpoints)
        if (ts[j] == b) atBreakpoint = true;

    if (atBreakpoint)
        return t > ts[j] ? onesided(j, j + 1) : onesided(j - 1, j);
    if (j == 0) return onesided(0, 1);
    if (j + 1 == ts.size()) return onesided(j - 1, j);
    if (straddles_breakpoint(ts[j - 1], ts[j + 1]))
        return t >= ts[j] ? onesided(j, j + 1) : onesided(j - 1, j);
    return onesided(j - 1, j + 1);
}

} // namespace vmflow
