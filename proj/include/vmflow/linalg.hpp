#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

namespace vmflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest and largest eigenvalue of a symmetric matrix.
/// Throws std::invalid_argument if the matrix is not (numerically) symmetric.
std::pair<double, double> spectral_bounds(const Matrix& m);

bool is_finite(const Vector& v);

/* A symmetric strongly positive operator M defining the inner product
 * <x,y>_M = <Mx,y> and norm ||x||_M = sqrt(<Mx,x>). Strong positivity
 * means the smallest eigenvalue m is positive, which gives the norm
 * equivalence m||x||^2 <= ||x||_M^2 <= ||M|| ||x||^2.
 *
 * Validated at construction (symmetry + positive spectrum); immutable
 * afterwards, so instances can be shared across threads. Diagonal
 * matrices are detected and applied/solved coordinate-wise. */
class Metric {
public:
    /// Dense SPD matrix.
    explicit Metric(Matrix m);
    /// Diagonal metric from its diagonal entries.
    static Metric diagonal(const Vector& d);
    /// Identity metric of dimension d.
    static Metric identity(int d);
    /// Scalar metric m0*I of dimension d.
    static Metric scalar(int d, double m0);

    int dim() const { return static_cast<int>(mat_.rows()); }
    const Matrix& matrix() const { return mat_; }
    bool is_diagonal() const { return diagonal_; }
    bool is_identity() const { return identity_; }

    /// Strong positivity constant (smallest eigenvalue).
    double strong_positivity() const { return lambdaMin_; }
    /// Operator norm ||M|| (largest eigenvalue).
    double op_norm() const { return lambdaMax_; }
    /// ||M^{-1}|| = 1/m.
    double inverse_norm() const { return 1.0 / lambdaMin_; }

    Vector apply(const Vector& x) const;
    /// <x,y>_M = <Mx,y>
    double inner(const Vector& x, const Vector& y) const;
    /// ||x||_M
    double norm(const Vector& x) const;
    /// Solve M y = b. Residual is bounded by ~1e-10 relative on
    /// well-conditioned input; the factorization is prepared once.
    Vector solve(const Vector& b) const;

private:
    Matrix mat_;
    Vector diag_;
    Eigen::LLT<Matrix> llt_;
    double lambdaMin_ = 0.0;
    double lambdaMax_ = 0.0;
    bool diagonal_ = false;
    bool identity_ = false;

    void validate_and_prepare();
};

} // namespace vmflow
