#include "vmflow/functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace vmflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

// prox of max(., 0) at scale gamma, one coordinate
double positive_part_prox(double x, double gamma) {
    if (x > gamma) return x - gamma;
    if (x < 0.0) return x;
    return 0.0;
}

void require_positive(double gamma) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("prox/envelope parameter gamma must be positive");
}

} // namespace

std::string to_string(ResolventConvention c) {
    return c == ResolventConvention::Exact ? "exact" : "yosida";
}

FunctionSpec FunctionSpec::l1(double weight) {
    if (weight < 0.0) throw std::invalid_argument("l1 weight must be >= 0");
    return {L1{weight}, std::nullopt};
}

FunctionSpec FunctionSpec::box(Vector lower, Vector upper) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("box bounds dimension mismatch");
    if ((lower.array() > upper.array()).any())
        throw std::invalid_argument("box has lower > upper");
    return {IndicatorBox{std::move(lower), std::move(upper)}, std::nullopt};
}

FunctionSpec FunctionSpec::quadratic(Matrix q, Vector b, double c) {
    auto [lo, hi] = spectral_bounds(q);
    if (lo < -1e-12 * std::max(1.0, std::abs(hi)))
        throw std::invalid_argument("quadratic matrix must be positive semidefinite");
    double beta = hi > 0.0 ? 1.0 / hi : kInf;
    return {Quadratic{std::move(q), std::move(b), c}, beta};
}

FunctionSpec FunctionSpec::positive_part() { return {PositivePartSum{}, std::nullopt}; }

FunctionSpec FunctionSpec::zero() { return {ZeroFunction{}, kInf}; }

bool FunctionSpec::differentiable() const {
    return std::holds_alternative<Quadratic>(kind) ||
           std::holds_alternative<ZeroFunction>(kind);
}

std::string FunctionSpec::describe() const {
    struct V {
        std::string operator()(const L1& f) const { return "l1(w=" + std::to_string(f.weight) + ")"; }
        std::string operator()(const IndicatorBox&) const { return "indicator_box"; }
        std::string operator()(const Quadratic&) const { return "quadratic"; }
        std::string operator()(const PositivePartSum&) const { return "positive_part"; }
        std::string operator()(const ZeroFunction&) const { return "zero"; }
    };
    return std::visit(V{}, kind);
}

double value(const FunctionSpec& f, const Vector& x) {
    struct V {
        const Vector& x;
        double operator()(const L1& f) const { return f.weight * x.cwiseAbs().sum(); }
        double operator()(const IndicatorBox& f) const {
            if (x.size() != f.lower.size())
                throw std::invalid_argument("box dimension mismatch");
            for (Eigen::Index i = 0; i < x.size(); ++i)
                if (x[i] < f.lower[i] || x[i] > f.upper[i]) return kInf;
            return 0.0;
        }
        double operator()(const Quadratic& f) const {
            return 0.5 * x.dot(f.q * x) + f.b.dot(x) + f.c;
        }
        double operator()(const PositivePartSum&) const {
            return x.cwiseMax(0.0).sum();
        }
        double operator()(const ZeroFunction&) const { return 0.0; }
    };
    return std::visit(V{x}, f.kind);
}

Vector gradient(const FunctionSpec& f, const Vector& x) {
    if (const auto* q = std::get_if<Quadratic>(&f.kind))
        return q->q * x + q->b;
    if (std::holds_alternative<ZeroFunction>(f.kind))
        return Vector::Zero(x.size());
    throw std::invalid_argument("gradient of nonsmooth function " + f.describe());
}

Vector prox_euclid(const FunctionSpec& f, double gamma, const Vector& x) {
    require_positive(gamma);
    struct V {
        double gamma;
        const Vector& x;
        Vector operator()(const L1& f) const {
            double t = gamma * f.weight;
            return x.unaryExpr([t](double v) { return soft_threshold(v, t); });
        }
        Vector operator()(const IndicatorBox& f) const {
            return x.cwiseMax(f.lower).cwiseMin(f.upper);
        }
        Vector operator()(const Quadratic& f) const {
            Matrix sys = Matrix::Identity(x.size(), x.size()) + gamma * f.q;
            return sys.ldlt().solve(x - gamma * f.b);
        }
        Vector operator()(const PositivePartSum&) const {
            double g = gamma;
            return x.unaryExpr([g](double v) { return positive_part_prox(v, g); });
        }
        Vector operator()(const ZeroFunction&) const { return x; }
    };
    return std::visit(V{gamma, x}, f.kind);
}

Vector prox_metric(const FunctionSpec& f, const Metric& m, double gamma,
                   const Vector& x, ResolventConvention conv) {
    require_positive(gamma);
    if (x.size() != m.dim())
        throw std::invalid_argument("prox_metric dimension mismatch");

    if (conv == ResolventConvention::YosidaForm) {
        Vector env = moreau_gradient(f, gamma, x);
        return x - gamma * m.solve(env);
    }

    // Exact: minimize f(v) + ||v - x||_M^2 / (2 gamma).
    if (std::holds_alternative<ZeroFunction>(f.kind)) return x;
    if (const auto* q = std::get_if<Quadratic>(&f.kind)) {
        // stationarity: (M + gamma Q) v = M x - gamma b
        Matrix sys = m.matrix() + gamma * q->q;
        return sys.ldlt().solve(m.apply(x) - gamma * q->b);
    }
    if (!m.is_diagonal())
        throw std::invalid_argument(
            "exact metric prox of " + f.describe() + " needs a diagonal metric");
    const Vector d = m.matrix().diagonal();
    if (const auto* l = std::get_if<L1>(&f.kind)) {
        Vector out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out[i] = soft_threshold(x[i], gamma * l->weight / d[i]);
        return out;
    }
    if (const auto* b = std::get_if<IndicatorBox>(&f.kind))
        return x.cwiseMax(b->lower).cwiseMin(b->upper);
    if (std::holds_alternative<PositivePartSum>(f.kind)) {
        Vector out(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            out[i] = positive_part_prox(x[i], gamma / d[i]);
        return out;
    }
    throw std::invalid_argument("exact metric prox unsupported for " + f.describe());
}

double moreau_value(const FunctionSpec& f, double gamma, const Vector& x) {
    Vector p = prox_euclid(f, gamma, x);
    return value(f, p) + (x - p).squaredNorm() / (2.0 * gamma);
}

Vector moreau_gradient(const FunctionSpec& f, double gamma, const Vector& x) {
    Vector p = prox_euclid(f, gamma, x);
    return (x - p) / gamma;
}

double g_neg_value(const FunctionSpec& g, double gamma, const Vector& u) {
    require_positive(gamma);
    if (std::holds_alternative<ZeroFunction>(g.kind)) return 0.0;
    const auto* q = std::get_if<Quadratic>(&g.kind);
    if (!q)
        throw std::invalid_argument("g_neg_value supports quadratic (or zero) g only");
    double beta = g.gradientCocoercivity.value_or(kInf);
    if (gamma > beta + 1e-15)
        throw std::invalid_argument("g_neg_value requires gamma in (0, beta]");
    // sup_eta g(eta) - ||u - eta||^2/(2 gamma); stationary point solves
    // (I - gamma Q) eta = gamma b + u.
    Matrix sys = Matrix::Identity(u.size(), u.size()) - gamma * q->q;
    Eigen::FullPivLU<Matrix> lu(sys);
    if (!lu.isInvertible())
        throw std::runtime_error("g_neg_value degenerate at gamma = beta");
    Vector eta = lu.solve(gamma * q->b + u);
    return value(g, eta) - (u - eta).squaredNorm() / (2.0 * gamma);
}

Vector prox_g_neg_metric(const FunctionSpec& g, const Metric& m, double gamma,
                         const Vector& x) {
    require_positive(gamma);
    return x - gamma * m.solve(gradient(g, x));
}

} // namespace vmflow
