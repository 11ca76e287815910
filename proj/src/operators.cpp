#include "vmflow/operators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vmflow {

namespace {

Vector solve_full(const Matrix& a, const Vector& rhs, const char* what) {
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible())
        throw std::runtime_error(std::string(what) + ": system is singular");
    return lu.solve(rhs);
}

Matrix invert_full(const Matrix& a, const char* what) {
    Eigen::FullPivLU<Matrix> lu(a);
    if (!lu.isInvertible())
        throw std::runtime_error(std::string(what) + ": system is singular");
    return lu.inverse();
}

void check_dim(const OperatorSpec& op, const Vector& x) {
    int d = op.dim();
    if (d >= 0 && d != x.size())
        throw std::invalid_argument("operator/vector dimension mismatch");
}

// Euclidean resolvent of a monotone piecewise scalar operator by interval
// case analysis; gammaEff > 0. Exactly one case applies.
double resolve_piecewise(const PiecewiseScalar& pw, double gammaEff, double x) {
    const auto& bp = pw.breakpoints;
    const size_t k = bp.size();
    for (size_t i = 0; i <= k; ++i) {
        double lo = (i == 0) ? -std::numeric_limits<double>::infinity() : bp[i - 1];
        double hi = (i == k) ? std::numeric_limits<double>::infinity() : bp[i];
        const ScalarPiece& p = pw.pieces[i];
        double denom = 1.0 + gammaEff * p.slope;
        double y = (x - gammaEff * p.intercept) / denom;
        if (y > lo && y < hi) return y;
    }
    for (size_t i = 0; i < k; ++i) {
        double b = bp[i];
        double vl = pw.pieces[i].at(b);
        double vr = pw.pieces[i + 1].at(b);
        if (x >= b + gammaEff * vl && x <= b + gammaEff * vr) return b;
    }
    throw std::runtime_error("piecewise resolvent: no region matched");
}

double piecewise_apply(const PiecewiseScalar& pw, double x) {
    const auto& bp = pw.breakpoints;
    for (size_t i = 0; i < bp.size(); ++i) {
        if (x == bp[i]) {
            double vl = pw.pieces[i].at(x);
            double vr = pw.pieces[i + 1].at(x);
            if (vl == vr) return vl;
            throw std::runtime_error("piecewise operator is multivalued at x");
        }
        if (x < bp[i]) return pw.pieces[i].at(x);
    }
    return pw.pieces.back().at(x);
}

} // namespace

OperatorSpec OperatorSpec::affine(Matrix linear, Vector offset) {
    if (linear.rows() != linear.cols() || linear.rows() != offset.size())
        throw std::invalid_argument("affine operator: inconsistent dimensions");
    return {AffineMap{std::move(linear), std::move(offset)}, {}};
}

OperatorSpec OperatorSpec::linear(Matrix m) {
    Vector z = Vector::Zero(m.rows());
    return affine(std::move(m), std::move(z));
}

OperatorSpec OperatorSpec::inverse_of_matrix(Matrix n) {
    if (n.rows() != n.cols())
        throw std::invalid_argument("inverse_of_matrix: matrix must be square");
    return {InverseOfMatrix{std::move(n)}, {}};
}

OperatorSpec OperatorSpec::subdifferential(FunctionSpec f) {
    return {SubdifferentialOf{std::move(f)}, {}};
}

OperatorSpec OperatorSpec::piecewise_scalar(std::vector<double> breakpoints,
                                            std::vector<ScalarPiece> pieces) {
    if (pieces.size() != breakpoints.size() + 1)
        throw std::invalid_argument("piecewise_scalar: need breakpoints+1 pieces");
    for (size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw std::invalid_argument("piecewise_scalar: breakpoints must increase");
    for (const auto& p : pieces)
        if (p.slope < 0.0)
            throw std::invalid_argument("piecewise_scalar: negative slope (not monotone)");
    for (size_t i = 0; i < breakpoints.size(); ++i) {
        double b = breakpoints[i];
        if (pieces[i].at(b) > pieces[i + 1].at(b) + 1e-14)
            throw std::invalid_argument("piecewise_scalar: downward jump (not monotone)");
    }
    return {PiecewiseScalar{std::move(breakpoints), std::move(pieces)}, {}};
}

OperatorSpec OperatorSpec::yosida_of(OperatorSpec base, double index) {
    return {YosidaOracle{std::make_shared<OperatorSpec>(std::move(base)), index}, {}};
}

OperatorSpec OperatorSpec::zero(int dim) {
    return linear(Matrix::Zero(dim, dim));
}

OperatorSpec OperatorSpec::identity(int dim) {
    return linear(Matrix::Identity(dim, dim));
}

int OperatorSpec::dim() const {
    struct V {
        int operator()(const AffineMap& a) const { return static_cast<int>(a.linear.rows()); }
        int operator()(const InverseOfMatrix& a) const { return static_cast<int>(a.n.rows()); }
        int operator()(const SubdifferentialOf& s) const {
            if (const auto* b = std::get_if<IndicatorBox>(&s.fn.kind))
                return static_cast<int>(b->lower.size());
            if (const auto* q = std::get_if<Quadratic>(&s.fn.kind))
                return static_cast<int>(q->q.rows());
            return -1;
        }
        int operator()(const PiecewiseScalar&) const { return 1; }
        int operator()(const YosidaOracle& y) const { return y.base->dim(); }
    };
    return std::visit(V{}, kind);
}

std::string OperatorSpec::describe() const {
    struct V {
        std::string operator()(const AffineMap&) const { return "affine"; }
        std::string operator()(const InverseOfMatrix&) const { return "inverse_of_matrix"; }
        std::string operator()(const SubdifferentialOf& s) const {
            return "subdifferential(" + s.fn.describe() + ")";
        }
        std::string operator()(const PiecewiseScalar&) const { return "piecewise_scalar"; }
        std::string operator()(const YosidaOracle& y) const {
            return "yosida(" + y.base->describe() + ", " + std::to_string(y.index) + ")";
        }
    };
    return std::visit(V{}, kind);
}

Vector apply(const OperatorSpec& op, const Vector& x) {
    check_dim(op, x);
    struct V {
        const Vector& x;
        Vector operator()(const AffineMap& a) const { return a.linear * x + a.offset; }
        Vector operator()(const InverseOfMatrix& a) const {
            // single-valued only where N is invertible
            return solve_full(a.n, x, "inverse_of_matrix apply");
        }
        Vector operator()(const SubdifferentialOf& s) const { return gradient(s.fn, x); }
        Vector operator()(const PiecewiseScalar& pw) const {
            Vector out(1);
            out[0] = piecewise_apply(pw, x[0]);
            return out;
        }
        Vector operator()(const YosidaOracle& y) const {
            return yosida(*y.base, y.index, x);
        }
    };
    return std::visit(V{x}, op.kind);
}

Vector yosida(const OperatorSpec& op, double gamma, const Vector& x) {
    check_dim(op, x);
    if (gamma == 0.0) return apply(op, x);
    struct V {
        double gamma;
        const Vector& x;
        Vector operator()(const AffineMap& a) const {
            // z with x in A^{-1}z + gamma z, A affine: (I + gamma F) z = F x + c
            Matrix sys = Matrix::Identity(x.size(), x.size()) + gamma * a.linear;
            return solve_full(sys, a.linear * x + a.offset, "affine yosida");
        }
        Vector operator()(const InverseOfMatrix& a) const {
            Matrix sys = a.n + gamma * Matrix::Identity(x.size(), x.size());
            return solve_full(sys, x, "inverse_of_matrix yosida");
        }
        Vector operator()(const SubdifferentialOf& s) const {
            if (gamma < 0.0)
                throw std::invalid_argument("yosida of a subdifferential needs gamma > 0");
            return moreau_gradient(s.fn, gamma, x);
        }
        Vector operator()(const PiecewiseScalar& pw) const {
            if (gamma < 0.0)
                throw std::invalid_argument("yosida of a piecewise operator needs gamma > 0");
            Vector out(1);
            out[0] = (x[0] - resolve_piecewise(pw, gamma, x[0])) / gamma;
            return out;
        }
        Vector operator()(const YosidaOracle& y) const {
            // (T_a)_b = T_{a+b}
            return yosida(*y.base, y.index + gamma, x);
        }
    };
    return std::visit(V{gamma, x}, op.kind);
}

Vector resolvent_euclid(const OperatorSpec& op, double gamma, const Vector& x) {
    check_dim(op, x);
    if (gamma == 0.0) return x;
    struct V {
        double gamma;
        const Vector& x;
        Vector operator()(const AffineMap& a) const {
            Matrix sys = Matrix::Identity(x.size(), x.size()) + gamma * a.linear;
            return solve_full(sys, x - gamma * a.offset, "affine resolvent");
        }
        Vector operator()(const InverseOfMatrix& a) const {
            Matrix sys = a.n + gamma * Matrix::Identity(x.size(), x.size());
            return a.n * solve_full(sys, x, "inverse_of_matrix resolvent");
        }
        Vector operator()(const SubdifferentialOf& s) const {
            if (gamma < 0.0)
                throw std::invalid_argument("resolvent of a subdifferential needs gamma > 0");
            return prox_euclid(s.fn, gamma, x);
        }
        Vector operator()(const PiecewiseScalar& pw) const {
            if (gamma < 0.0)
                throw std::invalid_argument("resolvent of a piecewise operator needs gamma > 0");
            Vector out(1);
            out[0] = resolve_piecewise(pw, gamma, x[0]);
            return out;
        }
        Vector operator()(const YosidaOracle& y) const {
            if (auto aff = yosida_as_affine(*y.base, y.index)) {
                Matrix sys = Matrix::Identity(x.size(), x.size()) + gamma * aff->linear;
                return solve_full(sys, x - gamma * aff->offset, "yosida-oracle resolvent");
            }
            // J_{gamma T_a} = I - gamma T_{a+gamma}
            return x - gamma * yosida(*y.base, y.index + gamma, x);
        }
    };
    return std::visit(V{gamma, x}, op.kind);
}

Vector resolvent_metric(const OperatorSpec& op, const Metric& m, double gamma,
                        const Vector& x, ResolventConvention conv) {
    check_dim(op, x);
    if (x.size() != m.dim())
        throw std::invalid_argument("resolvent_metric: metric dimension mismatch");
    if (gamma == 0.0) return x;

    if (conv == ResolventConvention::YosidaForm)
        return x - gamma * m.solve(yosida(op, gamma, x));

    if (m.is_identity()) return resolvent_euclid(op, gamma, x);

    struct V {
        const Metric& m;
        double gamma;
        const Vector& x;
        Vector operator()(const AffineMap& a) const {
            // M x in M y + gamma (F y + c)
            Matrix sys = m.matrix() + gamma * a.linear;
            return solve_full(sys, m.apply(x) - gamma * a.offset, "affine metric resolvent");
        }
        Vector operator()(const InverseOfMatrix& a) const {
            // y = N z with (N + gamma M^{-1}) z = x
            Matrix minv = invert_full(m.matrix(), "metric inverse");
            Matrix sys = a.n + gamma * minv;
            return a.n * solve_full(sys, x, "inverse_of_matrix metric resolvent");
        }
        Vector operator()(const SubdifferentialOf& s) const {
            return prox_metric(s.fn, m, gamma, x, ResolventConvention::Exact);
        }
        Vector operator()(const PiecewiseScalar& pw) const {
            // scalar metric: x in y + (gamma/m0) A(y)
            double m0 = m.matrix()(0, 0);
            Vector out(1);
            out[0] = resolve_piecewise(pw, gamma / m0, x[0]);
            return out;
        }
        Vector operator()(const YosidaOracle& y) const {
            if (auto aff = yosida_as_affine(*y.base, y.index)) {
                Matrix sys = m.matrix() + gamma * aff->linear;
                return solve_full(sys, m.apply(x) - gamma * aff->offset,
                                  "yosida-oracle metric resolvent");
            }
            throw std::invalid_argument(
                "exact metric resolvent unsupported for non-affine yosida oracle");
        }
    };
    return std::visit(V{m, gamma, x}, op.kind);
}

Vector negative_yosida_resolvent(const OperatorSpec& b, const Metric& m,
                                 double gamma, const Vector& x) {
    return x - gamma * m.solve(apply(b, x));
}

std::optional<AffineMap> yosida_as_affine(const OperatorSpec& op, double gamma) {
    if (const auto* a = std::get_if<AffineMap>(&op.kind)) {
        if (gamma == 0.0) return *a;
        Matrix sys = Matrix::Identity(a->linear.rows(), a->linear.cols()) +
                     gamma * a->linear;
        Eigen::FullPivLU<Matrix> lu(sys);
        if (!lu.isInvertible()) return std::nullopt;
        return AffineMap{lu.solve(a->linear), lu.solve(a->offset)};
    }
    if (const auto* inv = std::get_if<InverseOfMatrix>(&op.kind)) {
        Matrix sys = inv->n;
        if (gamma != 0.0)
            sys += gamma * Matrix::Identity(inv->n.rows(), inv->n.cols());
        Eigen::FullPivLU<Matrix> lu(sys);
        if (!lu.isInvertible()) return std::nullopt;
        return AffineMap{lu.inverse(), Vector::Zero(inv->n.rows())};
    }
    if (const auto* y = std::get_if<YosidaOracle>(&op.kind))
        return yosida_as_affine(*y->base, y->index + gamma);
    return std::nullopt;
}

std::optional<double> resolvent_convention_gap(const OperatorSpec& op,
                                               const Metric& m, double gamma,
                                               const Vector& x) {
    Vector yos = resolvent_metric(op, m, gamma, x, ResolventConvention::YosidaForm);
    try {
        Vector ex = resolvent_metric(op, m, gamma, x, ResolventConvention::Exact);
        return (yos - ex).norm();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

ReindexReport yosida_reindex_check(const OperatorSpec& op, double gamma,
                                   double delta,
                                   const std::vector<Vector>& points,
                                   double tol) {
    ReindexReport rep;
    for (const Vector& x : points) {
        Vector rhs = yosida(op, gamma + delta, x);
        Vector lhs;
        if (delta == 0.0) {
            lhs = yosida(op, gamma, x);
        } else if (auto aff = yosida_as_affine(op, gamma)) {
            OperatorSpec mat = OperatorSpec::affine(aff->linear, aff->offset);
            lhs = yosida(mat, delta, x);
        } else if (x.size() == 1) {
            // solve z = T_gamma(x - delta z) by bisection; the left side is
            // increasing in z since T_gamma is monotone and delta > 0
            auto phi = [&](double z) {
                Vector arg(1);
                arg[0] = x[0] - delta * z;
                return z - yosida(op, gamma, arg)[0];
            };
            double w = std::abs(yosida(op, gamma, x)[0]) + 1.0;
            double lo = -w, hi = w;
            while (phi(lo) > 0) { lo *= 2; }
            while (phi(hi) < 0) { hi *= 2; }
            for (int it = 0; it < 200 && hi - lo > 1e-15 * (1 + std::abs(hi)); ++it) {
                double mid = 0.5 * (lo + hi);
                (phi(mid) < 0 ? lo : hi) = mid;
            }
            lhs = Vector::Constant(1, 0.5 * (lo + hi));
        } else {
            throw std::invalid_argument(
                "yosida_reindex_check: no independent route for this operator kind");
        }
        rep.maxDiscrepancy = std::max(rep.maxDiscrepancy, (lhs - rhs).norm());
        ++rep.samples;
    }
    rep.pass = rep.samples > 0 && rep.maxDiscrepancy <= tol;
    return rep;
}

/* ---- property testers ---- */

VectorMap as_map(const OperatorSpec& op) {
    return [op](const Vector& x) { return apply(op, x); };
}

VectorMap yosida_map(const OperatorSpec& op, double gamma) {
    return [op, gamma](const Vector& x) { return yosida(op, gamma, x); };
}

namespace {

std::vector<std::pair<Vector, Vector>> sample_pairs(const SampleBox& box, int n) {
    std::mt19937_64 rng(box.seed);
    std::uniform_real_distribution<double> uni(-box.radius, box.radius);
    std::vector<std::pair<Vector, Vector>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Vector x(box.dim), y(box.dim);
        for (int j = 0; j < box.dim; ++j) x[j] = uni(rng);
        for (int j = 0; j < box.dim; ++j) y[j] = uni(rng);
        out.emplace_back(std::move(x), std::move(y));
    }
    return out;
}

// Violations are measured against tol * max(1, scale) so that identities
// that hold exactly are not failed on rounding noise at radius ~10.
void record(PropertyReport& rep, double violation, double scale, double tol) {
    ++rep.samples;
    if (violation > tol * std::max(1.0, scale)) {
        ++rep.violations;
        rep.maxViolation = std::max(rep.maxViolation, violation);
    }
}

} // namespace

PropertyReport check_cocoercive(const VectorMap& t, double beta,
                                const SampleBox& box, int n) {
    PropertyReport rep;
    rep.property = "cocoercive: <Tx-Ty, x-y> >= beta ||Tx-Ty||^2";
    for (const auto& [x, y] : sample_pairs(box, n)) {
        Vector dt = t(x) - t(y);
        Vector dx = x - y;
        double lhs = dt.dot(dx);
        double rhs = beta * dt.squaredNorm();
        record(rep, rhs - lhs, std::abs(lhs) + std::abs(rhs), 1e-12);
    }
    return rep;
}

PropertyReport check_metric_cocoercive(const VectorMap& t, const Metric& m,
                                       double kappa, double minAlphaBeta,
                                       const SampleBox& box, int n) {
    PropertyReport rep;
    rep.property =
        "metric cocoercive (squared form): <M^-1Tx - M^-1Ty, x-y>_M >= "
        "kappa ||M^-1Tx - M^-1Ty||_M^2";
    if (m.inverse_norm() > minAlphaBeta / kappa) {
        rep.preconditionOk = false;
        rep.note = "precondition ||M^-1|| <= min{alpha,beta}/kappa fails";
        return rep;
    }
    for (const auto& [x, y] : sample_pairs(box, n)) {
        Vector w = m.solve(t(x) - t(y));
        double lhs = m.inner(w, x - y);
        double rhs = kappa * m.inner(w, w);
        record(rep, rhs - lhs, std::abs(lhs) + std::abs(rhs), 1e-12);
    }
    return rep;
}

PropertyReport check_averaged(const VectorMap& t, double a, const Metric& m,
                              const SampleBox& box, int n) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("averagedness parameter must lie in (0,1)");
    PropertyReport rep;
    rep.property = "averaged (metric norms): ||Tx-Ty||^2 <= ||x-y||^2 - "
                   "((1-a)/a)||(I-T)x-(I-T)y||^2";
    double factor = (1.0 - a) / a;
    for (const auto& [x, y] : sample_pairs(box, n)) {
        Vector dt = t(x) - t(y);
        Vector dx = x - y;
        Vector dres = dx - dt;
        double lhs = m.inner(dt, dt);
        double rhs = m.inner(dx, dx) - factor * m.inner(dres, dres);
        record(rep, lhs - rhs, m.inner(dx, dx), 1e-10);
    }
    return rep;
}

PropertyReport check_strongly_monotone(const VectorMap& t, double rho,
                                       const SampleBox& box, int n) {
    PropertyReport rep;
    rep.property = "strongly monotone: <x-y, Tx-Ty> >= rho ||x-y||^2";
    for (const auto& [x, y] : sample_pairs(box, n)) {
        Vector dt = t(x) - t(y);
        Vector dx = x - y;
        double lhs = dx.dot(dt);
        double rhs = rho * dx.squaredNorm();
        record(rep, rhs - lhs, std::abs(lhs) + std::abs(rhs), 1e-12);
    }
    return rep;
}

} // namespace vmflow
