#include "vmflow/flows.hpp"
#include "vmflow/problems.hpp"

#include <doctest.h>

#include <random>

using namespace vmflow;

namespace {

Vector vec1(double a) { return Vector::Constant(1, a); }

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_SUITE("flows") {

TEST_CASE("lambda schedules") {
    LambdaSchedule s = LambdaSchedule::piecewise({50.0}, {1.0, 0.0});
    CHECK(s.value(0.0) == 1.0);
    CHECK(s.value(49.9) == 1.0);
    CHECK(s.value(50.0) == 1.0); // pieces are closed on the right
    CHECK(s.value(50.1) == 0.0);
    CHECK(s.inf_value() == 0.0);
    CHECK(s.sup_value() == 1.0);
    CHECK(!s.satisfies_lower_upper_bounds());

    LambdaSchedule c = LambdaSchedule::constant(1.0);
    CHECK(c.satisfies_lower_upper_bounds());
    CHECK(c.discrete_value(17) == 1.0);

    LambdaSchedule h = LambdaSchedule::harmonic();
    CHECK(h.discrete_value(1) == 1.0);
    CHECK(h.discrete_value(4) == doctest::Approx(0.25));
    CHECK(!h.satisfies_lower_upper_bounds());
    CHECK_THROWS_AS(h.value(1.0), std::logic_error);
    CHECK_THROWS_AS(h.discrete_value(0), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::constant(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(LambdaSchedule::piecewise({1.0, 1.0}, {1, 2, 3}),
                    std::invalid_argument);
}

TEST_CASE("assembled map and field on the 2-D instance") {
    ProblemInstance p = cohypo_diag_problem();

    Vector t = flow_map(p.spec, vec2(1, 1));
    CHECK(t[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t[1] == doctest::Approx(35.0 / 48.0).epsilon(1e-12));

    Vector f = field(p.spec, 0.0, vec2(1, 1));
    CHECK(f[0] == doctest::Approx(-0.75));
    CHECK(f[1] == doctest::Approx(-13.0 / 48.0));

    // equilibrium: zero field for any lambda
    CHECK(field(p.spec, 0.0, p.flowFixedPoint).norm() == 0.0);

    Residual r = residual(p.spec, vec2(1, 1));
    CHECK(r.euclid == doctest::Approx(vec2(-0.75, -13.0 / 48.0).norm()));
    CHECK(r.metric == doctest::Approx(p.spec.metric.norm(vec2(-0.75, -13.0 / 48.0))));
    CHECK(residual(p.spec, p.flowFixedPoint).euclid == 0.0);
}

TEST_CASE("piecewise scalar instance: region structure of the field") {
    ProblemInstance p = scalar_piecewise_problem();

    // flat-region states map to 0, so the field is -u there
    CHECK(flow_map(p.spec, vec1(0.1))[0] == doctest::Approx(0.0));
    CHECK(field(p.spec, 0.0, vec1(0.1))[0] == doctest::Approx(-0.1));
    // after the relaxation switches off the field vanishes
    CHECK(field(p.spec, 55.0, vec1(0.1)).norm() == 0.0);

    // above the region boundary the map is (11/12)(u - 1/6)
    CHECK(flow_map(p.spec, vec1(0.5))[0] == doctest::Approx(11.0 / 36.0));
    // below zero it is (11/12) u
    CHECK(flow_map(p.spec, vec1(-1.0))[0] == doctest::Approx(-11.0 / 12.0));

    CHECK(residual(p.spec, vec1(0.1)).euclid == doctest::Approx(0.1));
    CHECK(residual(p.spec, vec1(0.1)).metric ==
          doctest::Approx(std::sqrt(3.0) * 0.1));
}

TEST_CASE("swap equivalence") {
    SUBCASE("2-D instance") {
        ProblemInstance p = cohypo_diag_problem();
        FlowSpec swapped = swap_spec(p.spec);
        CHECK(swapped.kind == FlowKind::FB);
        Vector gap = field(p.spec, 0.0, vec2(1, 1)) - field(swapped, 0.0, vec2(1, 1));
        CHECK(gap.norm() <= 1e-12);
    }
    SUBCASE("zero operators") {
        FlowSpec spec = make_flow(
            FlowKind::BF, OperatorSpec::zero(2), OperatorSpec::zero(2),
            Metric::identity(2), 1.0, LambdaSchedule::constant(1.0),
            ResolventConvention::YosidaForm, FlowConstants{1, 1, 1, {}, {}});
        FlowSpec swapped = swap_spec(spec);
        Vector x = vec2(3, -1);
        CHECK(field(spec, 0.0, x).norm() == 0.0);
        CHECK(field(swapped, 0.0, x).norm() == 0.0);
    }
    SUBCASE("random affine pairs agree pointwise") {
        std::mt19937_64 rng(63);
        std::uniform_real_distribution<double> uni(-5.0, 5.0);
        for (int trial = 0; trial < 10; ++trial) {
            int d = 1 + static_cast<int>(rng() % 3);
            Matrix fa = Matrix::Random(d, d);
            fa = (fa.transpose() * fa).eval();
            Matrix fb = Matrix::Random(d, d);
            fb = (0.1 * fb.transpose() * fb).eval();
            Matrix ms = Matrix::Random(d, d);
            ms = (ms.transpose() * ms + Matrix::Identity(d, d)).eval();
            FlowSpec spec = make_flow(
                FlowKind::BF, OperatorSpec::affine(fa, Vector::Random(d)),
                OperatorSpec::affine(fb, Vector::Random(d)), Metric(ms), 0.5,
                LambdaSchedule::constant(1.0), ResolventConvention::YosidaForm,
                FlowConstants{1, 1, 1, {}, {}});
            FlowSpec swapped = swap_spec(spec);
            for (int i = 0; i < 100; ++i) {
                Vector x(d);
                for (int k = 0; k < d; ++k) x[k] = uni(rng);
                CHECK((field(spec, 0.0, x) - field(swapped, 0.0, x)).norm() <=
                      1e-12);
            }
        }
    }
    SUBCASE("exact convention is rejected") {
        ProblemInstance p = scalar_piecewise_problem();
        CHECK_THROWS_AS(swap_spec(p.spec), std::invalid_argument);
    }
}

TEST_CASE("parameter validation") {
    SUBCASE("2-D instance satisfies every structural condition") {
        ProblemInstance p = cohypo_diag_problem();
        ValidationReport rep = validate_parameters(p.spec);
        CHECK(rep.guarantees_apply());
        for (const auto& c : rep.checks) {
            if (c.name == "gamma_range") CHECK(c.slack == doctest::Approx(2.0));
            if (c.name == "kappa_bound") CHECK(c.slack == doctest::Approx(5.0));
            if (c.name == "metric_inverse_bound")
                CHECK(c.slack == doctest::Approx(1.0 / 3.0 - 0.25));
            if (c.name == "exponential_rate_condition") CHECK(!c.applicable);
        }
    }
    SUBCASE("scalar instance passes structure but not the relaxation bound") {
        ProblemInstance p = scalar_piecewise_problem();
        ValidationReport rep = validate_parameters(p.spec);
        CHECK(!rep.guarantees_apply()); // inf lambda = 0 under this schedule
        for (const auto& c : rep.checks) {
            if (c.name == "gamma_range") CHECK(c.pass);
            if (c.name == "kappa_bound") {
                CHECK(c.pass);
                CHECK(c.slack == doctest::Approx(0.75 - 0.5));
            }
            if (c.name == "metric_inverse_bound") {
                CHECK(c.pass);
                CHECK(c.slack == doctest::Approx(0.5 - 1.0 / 3.0));
            }
            if (c.name == "relaxation_bounds") CHECK(!c.pass);
        }
        CHECK(rep.render().find("not applicable") != std::string::npos);
    }
    SUBCASE("exponential-rate condition by direct substitution") {
        FlowSpec spec = make_flow(
            FlowKind::BF, OperatorSpec::zero(1),
            OperatorSpec::linear(Matrix::Constant(1, 1, 0.5)),
            Metric::identity(1), 1.0, LambdaSchedule::constant(1.0),
            ResolventConvention::YosidaForm,
            FlowConstants{1.0, 1.0, 1.0, 1.0, 1.0});
        ValidationReport rep = validate_parameters(spec);
        for (const auto& c : rep.checks)
            if (c.name == "exponential_rate_condition") {
                CHECK(c.applicable);
                CHECK(c.pass); // 1/2 + 1/2 <= 1 + 1
                CHECK(c.slack == doctest::Approx(1.0));
            }
    }
}

TEST_CASE("spec hash distinguishes flow data") {
    ProblemInstance p = cohypo_diag_problem();
    std::uint64_t h1 = spec_hash(p.spec);
    CHECK(h1 == spec_hash(cohypo_diag_problem().spec));
    FlowSpec other = p.spec;
    other.gamma = 3.9;
    CHECK(spec_hash(other) != h1);
    CHECK(spec_hash(scalar_piecewise_problem().spec) != h1);
}

TEST_CASE("prox flows share the BF assembly") {
    // f = 0 and quadratic g reduce the map to I - gamma M^{-1} grad g
    Metric m = Metric::diagonal(vec2(4, 8));
    Matrix q(2, 2);
    q << 0.5, 0, 0, 1.0 / 3.0;
    FlowSpec spec = make_prox_flow(
        FunctionSpec::zero(), FunctionSpec::quadratic(q, Vector::Zero(2)), m,
        4.0, LambdaSchedule::constant(1.0), ResolventConvention::Exact, 3.0);
    Vector t = flow_map(spec, vec2(1, 1));
    CHECK(t[0] == doctest::Approx(0.5));
    CHECK(t[1] == doctest::Approx(5.0 / 6.0));
    CHECK(spec.constants.alpha == doctest::Approx(4.0)); // alpha = gamma
    CHECK_THROWS_AS(make_prox_flow(FunctionSpec::zero(), FunctionSpec::l1(1.0),
                                   m, 1.0, LambdaSchedule::constant(1.0),
                                   ResolventConvention::Exact, 1.0),
                    std::invalid_argument);
}

TEST_CASE("flow construction guards") {
    CHECK_THROWS_AS(
        make_flow(FlowKind::BF, OperatorSpec::zero(2), OperatorSpec::zero(2),
                  Metric::identity(2), -1.0, LambdaSchedule::constant(1.0),
                  ResolventConvention::Exact, FlowConstants{}),
        std::invalid_argument);
    CHECK_THROWS_AS(
        make_flow(FlowKind::BF, OperatorSpec::zero(3), OperatorSpec::zero(2),
                  Metric::identity(2), 1.0, LambdaSchedule::constant(1.0),
                  ResolventConvention::Exact, FlowConstants{}),
        std::invalid_argument);
}

} // TEST_SUITE
