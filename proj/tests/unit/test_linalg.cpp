#include "vmflow/linalg.hpp"

#include <doctest.h>

#include <random>

using namespace vmflow;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

Matrix random_spd(int d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Matrix r(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) r(i, j) = uni(rng);
    return Matrix(r.transpose() * r + 0.1 * Matrix::Identity(d, d));
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("metric inner product") {
    Metric m = Metric::diagonal(vec2(4, 8));
    CHECK(m.inner(vec2(1, 0), vec2(1, 0)) == doctest::Approx(4.0));
    CHECK(m.inner(vec2(1, 1), vec2(1, -1)) == doctest::Approx(-4.0));

    Metric id = Metric::identity(2);
    Vector x = vec2(0.3, -2.0), y = vec2(1.5, 0.25);
    CHECK(id.inner(x, y) == doctest::Approx(x.dot(y)));
    // symmetry
    CHECK(m.inner(x, y) == doctest::Approx(m.inner(y, x)));
}

TEST_CASE("metric norm") {
    Metric m = Metric::diagonal(vec2(4, 8));
    CHECK(m.norm(vec2(1, 0)) == doctest::Approx(2.0));
    CHECK(m.norm(Vector::Zero(2)) == 0.0);
    CHECK(m.norm(vec2(1, 1)) == doctest::Approx(std::sqrt(12.0)));
}

TEST_CASE("metric solve") {
    Metric m = Metric::diagonal(vec2(4, 8));
    CHECK((m.solve(vec2(4, 8)) - vec2(1, 1)).norm() == doctest::Approx(0.0));
    Metric id = Metric::identity(2);
    Vector b = vec2(0.7, -0.2);
    CHECK((id.solve(b) - b).norm() == 0.0);

    Matrix full(2, 2);
    full << 2, 1, 1, 2;
    Metric mf(full);
    CHECK((mf.solve(vec2(3, 3)) - vec2(1, 1)).norm() < 1e-12);
    CHECK((mf.apply(mf.solve(b)) - b).norm() < 1e-10 * b.norm());
}

TEST_CASE("spectral bounds") {
    auto [lo1, hi1] = spectral_bounds(Matrix(vec2(4, 8).asDiagonal()));
    CHECK(lo1 == doctest::Approx(4.0));
    CHECK(hi1 == doctest::Approx(8.0));

    auto [lo2, hi2] = spectral_bounds(Matrix::Identity(3, 3));
    CHECK(lo2 == doctest::Approx(1.0));
    CHECK(hi2 == doctest::Approx(1.0));

    Matrix a(2, 2);
    a << 2, 1, 1, 2; // eigenvalues 1 and 3 by its characteristic polynomial
    auto [lo3, hi3] = spectral_bounds(a);
    CHECK(lo3 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(hi3 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("construction failures") {
    Matrix asym(2, 2);
    asym << 1, 2, 3, 1;
    CHECK_THROWS_AS(spectral_bounds(asym), std::invalid_argument);
    CHECK_THROWS_AS(Metric(asym), std::invalid_argument);

    Matrix indef(2, 2);
    indef << 1, 0, 0, -1;
    CHECK_THROWS_AS(Metric(indef), std::invalid_argument);

    Metric m = Metric::identity(2);
    CHECK_THROWS_AS(m.inner(Vector::Zero(3), Vector::Zero(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(m.solve(Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("norm equivalence on random metrics") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        int d = 1 + static_cast<int>(rng() % 6);
        Metric m{random_spd(d, rng)};
        Vector x(d);
        for (int i = 0; i < d; ++i) x[i] = uni(rng);
        double n2 = x.squaredNorm();
        double mn2 = m.inner(x, x);
        double slack = 1e-9 * std::max(1.0, mn2);
        CHECK(m.strong_positivity() * n2 <= mn2 + slack);
        CHECK(mn2 <= m.op_norm() * n2 + slack);
    }
}

TEST_CASE("solve then apply is the identity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        int d = 2 + static_cast<int>(rng() % 49);
        Metric m{random_spd(d, rng)};
        Vector b(d);
        for (int i = 0; i < d; ++i) b[i] = uni(rng);
        CHECK((m.apply(m.solve(b)) - b).norm() <= 1e-9 * std::max(1.0, b.norm()));
    }
}

} // TEST_SUITE
