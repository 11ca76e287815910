#include "vmflow/problems.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vmflow {

namespace {

Vector flow_fixed_point(const FlowSpec& spec, const Vector& solution) {
    if (spec.kind == FlowKind::FB) return solution;
    return solution - spec.gamma * spec.metric.solve(apply(spec.forward, solution));
}

void check_instance(ProblemInstance& p) {
    p.flowFixedPoint = flow_fixed_point(p.spec, p.solution);
    double r = residual(p.spec, p.flowFixedPoint).euclid;
    if (r > 1e-10)
        throw std::runtime_error("problem '" + p.name +
                                 "': stored solution fails the fixed-point check");
}

} // namespace

ProblemInstance scalar_piecewise_problem() {
    ProblemInstance p;
    p.name = "scalar_piecewise";

    OperatorSpec a = OperatorSpec::piecewise_scalar(
        {0.0}, {ScalarPiece{0.0, 0.0}, ScalarPiece{0.0, 1.0}});
    a.tags.maximalMonotone = true;
    a.tags.cohypomonotoneAlpha = 0.25;
    OperatorSpec b = OperatorSpec::linear(Matrix::Constant(1, 1, 0.5));
    b.tags.cocoercive = 1.0;

    p.spec = make_flow(FlowKind::BF, std::move(a), std::move(b),
                       Metric::scalar(1, 3.0), 0.5,
                       LambdaSchedule::piecewise({50.0}, {1.0, 0.0}),
                       ResolventConvention::Exact,
                       FlowConstants{0.25, 1.0, 0.5, std::nullopt, std::nullopt});

    p.u0Default = Vector::Constant(1, 0.5);
    p.solution = Vector::Zero(1);
    p.solutionProvenance = "0 lies in A(0) + B(0) = [0,1]";
    p.notes = "relaxation switches off at t = 50, freezing the state";
    p.defaultConfig.method = IntegratorConfig::Method::RK4;
    p.defaultConfig.h = 1e-2;
    p.defaultConfig.tEnd = 60.0;
    check_instance(p);
    return p;
}

ProblemInstance cohypo_diag_problem() {
    ProblemInstance p;
    p.name = "cohypo_diag";

    Matrix n = Matrix::Zero(2, 2);
    n(0, 0) = -2.0;
    OperatorSpec a = OperatorSpec::inverse_of_matrix(n);
    a.tags.cohypomonotoneAlpha = 1.0;

    Matrix bm = Matrix::Zero(2, 2);
    bm(0, 0) = 0.5;
    bm(1, 1) = 1.0 / 3.0;
    OperatorSpec b = OperatorSpec::linear(bm);
    b.tags.cocoercive = 1.0;

    Vector md(2);
    md << 4.0, 8.0;
    p.spec = make_flow(FlowKind::BF, std::move(a), std::move(b),
                       Metric::diagonal(md), 4.0, LambdaSchedule::constant(1.0),
                       ResolventConvention::YosidaForm,
                       FlowConstants{1.0, 1.0, 3.0, std::nullopt, std::nullopt});

    p.u0Default = Vector(2);
    p.u0Default << -0.4, 0.5;
    p.solution = Vector::Zero(2);
    p.solutionProvenance =
        "flow map is diag(1/4, 35/48); the origin is its unique fixed point "
        "and a zero of A + B since N maps 0 to 0";
    p.notes = "assembled map diag(1/4, 35/48); slow mode decays at rate 13/48";
    p.defaultConfig.method = IntegratorConfig::Method::RK4;
    p.defaultConfig.h = 1e-2;
    p.defaultConfig.tEnd = 70.0;
    check_instance(p);
    return p;
}

ProblemInstance lasso_small(int d, unsigned seed) {
    if (d < 1 || d > 4)
        throw std::invalid_argument("lasso_small supports 1 <= d <= 4");
    ProblemInstance p;
    p.name = "lasso_small";

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Matrix k(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) k(i, j) = uni(rng);
    Vector xtrue(d);
    for (int i = 0; i < d; ++i)
        xtrue[i] = (i % 3 == 0) ? 1.0 : (i % 3 == 1 ? 0.0 : -0.5);
    Vector b = k * xtrue;
    for (int i = 0; i < d; ++i) b[i] += 0.05 * uni(rng);

    double w = 0.2 * (k.transpose() * b).cwiseAbs().maxCoeff();
    Matrix q = k.transpose() * k;
    double betaG = 1.0 / spectral_bounds(q).second;
    double gamma = 0.9 * betaG;
    double kappa = 0.75 * gamma;

    FunctionSpec f = FunctionSpec::l1(w);
    FunctionSpec g = FunctionSpec::quadratic(q, -k.transpose() * b,
                                             0.5 * b.squaredNorm());
    p.spec = make_prox_flow(std::move(f), std::move(g), Metric::identity(d),
                            gamma, LambdaSchedule::constant(1.0),
                            ResolventConvention::Exact, kappa);

    p.u0Default = Vector::Zero(d);
    p.solution = lasso_sign_pattern_solution(k, b, w);
    p.solutionProvenance = "exhaustive sign-pattern enumeration over 3^d "
                           "stationarity systems";
    p.defaultConfig.method = IntegratorConfig::Method::RK4;
    p.defaultConfig.h = 1e-2;
    p.defaultConfig.tEnd = 80.0;
    check_instance(p);
    return p;
}

ProblemInstance strongly_monotone_problem() {
    ProblemInstance p;
    p.name = "strongly_monotone";

    OperatorSpec a = OperatorSpec::zero(1);
    a.tags.maximalMonotone = true;
    a.tags.cohypomonotoneAlpha = 4.0;
    OperatorSpec b = OperatorSpec::linear(Matrix::Constant(1, 1, 0.25));
    b.tags.cocoercive = 4.0;

    // With gamma = 1, B_{-gamma} has slope (1/4)/(1 - 1/4) = 1/3 = rho.
    FlowConstants c{4.0, 4.0, 2.0, 1.0 / 3.0, 0.9};
    p.spec = make_flow(FlowKind::BF, std::move(a), std::move(b),
                       Metric::scalar(1, 2.0), 1.0,
                       LambdaSchedule::constant(1.0),
                       ResolventConvention::YosidaForm, c);

    p.u0Default = Vector::Constant(1, 1.5);
    p.solution = Vector::Zero(1);
    p.solutionProvenance = "A + B reduces to x/4, whose unique zero is 0";
    p.notes = "flow map is 7/8; true decay rate 1/8 vs predicted C/2 = 1/12";
    p.defaultConfig.method = IntegratorConfig::Method::RK4;
    p.defaultConfig.h = 1e-2;
    p.defaultConfig.tEnd = 150.0;
    check_instance(p);
    return p;
}

std::vector<std::string> builtin_names() {
    return {"scalar_piecewise", "cohypo_diag", "lasso_small", "strongly_monotone"};
}

ProblemInstance builtin(const std::string& name) {
    if (name == "scalar_piecewise") return scalar_piecewise_problem();
    if (name == "cohypo_diag") return cohypo_diag_problem();
    if (name == "lasso_small") return lasso_small();
    if (name == "strongly_monotone") return strongly_monotone_problem();
    throw std::invalid_argument("unknown builtin problem: " + name);
}

Vector lasso_sign_pattern_solution(const Matrix& k, const Vector& b, double w) {
    const int d = static_cast<int>(k.cols());
    long total = 1;
    for (int i = 0; i < d; ++i) total *= 3;

    Vector best;
    double bestVal = std::numeric_limits<double>::infinity();

    for (long code = 0; code < total; ++code) {
        long c = code;
        std::vector<int> sign(d);
        std::vector<int> free;
        for (int i = 0; i < d; ++i) {
            sign[i] = static_cast<int>(c % 3) - 1;
            c /= 3;
            if (sign[i] != 0) free.push_back(i);
        }

        Vector x = Vector::Zero(d);
        if (!free.empty()) {
            const int m = static_cast<int>(free.size());
            Matrix kf(k.rows(), m);
            Vector sf(m);
            for (int j = 0; j < m; ++j) {
                kf.col(j) = k.col(free[j]);
                sf[j] = sign[free[j]];
            }
            Matrix gram = kf.transpose() * kf;
            Vector rhs = kf.transpose() * b - w * sf;
            Vector xf = gram.ldlt().solve(rhs);
            if ((gram * xf - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm()))
                continue; // inconsistent (singular) pattern
            bool ok = true;
            for (int j = 0; j < m; ++j)
                if (xf[j] * sf[j] < -1e-12) { ok = false; break; }
            if (!ok) continue;
            for (int j = 0; j < m; ++j) x[free[j]] = xf[j];
        }

        // zero coordinates must satisfy the subgradient bound
        Vector grad = k.transpose() * (k * x - b);
        bool ok = true;
        for (int i = 0; i < d; ++i)
            if (sign[i] == 0 && std::abs(grad[i]) > w * (1.0 + 1e-10)) {
                ok = false;
                break;
            }
        if (!ok) continue;

        double val = w * x.cwiseAbs().sum() + 0.5 * (k * x - b).squaredNorm();
        if (val < bestVal) {
            bestVal = val;
            best = x;
        }
    }
    if (best.size() == 0)
        throw std::runtime_error("sign-pattern enumeration found no admissible pattern");
    return best;
}

} // namespace vmflow
