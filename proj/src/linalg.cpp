#include "vmflow/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace vmflow {

bool is_finite(const Vector& v) { return v.allFinite(); }

static void check_symmetric(const Matrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("matrix is not square");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
            double tol = 1e-12 * std::max(1.0, std::abs(m(i, j)));
            if (std::abs(m(i, j) - m(j, i)) > tol)
                throw std::invalid_argument("matrix is not symmetric");
        }
}

std::pair<double, double> spectral_bounds(const Matrix& m) {
    check_symmetric(m);
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue computation failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

Metric::Metric(Matrix m) : mat_(std::move(m)) { validate_and_prepare(); }

Metric Metric::diagonal(const Vector& d) {
    return Metric(Matrix(d.asDiagonal()));
}

Metric Metric::identity(int d) {
    return Metric(Matrix::Identity(d, d));
}

Metric Metric::scalar(int d, double m0) {
    return Metric(Matrix(m0 * Matrix::Identity(d, d)));
}

void Metric::validate_and_prepare() {
    if (!mat_.allFinite())
        throw std::invalid_argument("metric has non-finite entries");
    auto [lo, hi] = spectral_bounds(mat_);
    if (lo <= 0.0)
        throw std::invalid_argument("metric is not strongly positive");
    lambdaMin_ = lo;
    lambdaMax_ = hi;

    diagonal_ = true;
    for (Eigen::Index i = 0; i < mat_.rows() && diagonal_; ++i)
        for (Eigen::Index j = 0; j < mat_.cols(); ++j)
            if (i != j && mat_(i, j) != 0.0) { diagonal_ = false; break; }
    if (diagonal_) {
        diag_ = mat_.diagonal();
        identity_ = (diag_.array() == 1.0).all();
    } else {
        llt_.compute(mat_);
        if (llt_.info() != Eigen::Success)
            throw std::invalid_argument("metric factorization failed (not SPD)");
    }
}

Vector Metric::apply(const Vector& x) const {
    if (x.size() != mat_.rows())
        throw std::invalid_argument("metric/vector dimension mismatch");
    if (identity_) return x;
    if (diagonal_) return diag_.cwiseProduct(x);
    return mat_ * x;
}

double Metric::inner(const Vector& x, const Vector& y) const {
    if (y.size() != mat_.rows())
        throw std::invalid_argument("metric/vector dimension mismatch");
    return apply(x).dot(y);
}

double Metric::norm(const Vector& x) const {
    double s = inner(x, x);
    return std::sqrt(std::max(s, 0.0));
}

Vector Metric::solve(const Vector& b) const {
    if (b.size() != mat_.rows())
        throw std::invalid_argument("metric/vector dimension mismatch");
    if (identity_) return b;
    if (diagonal_) return b.cwiseQuotient(diag_);
    return llt_.solve(b);
}

} // namespace vmflow
