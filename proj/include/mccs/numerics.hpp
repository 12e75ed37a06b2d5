#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>

namespace mccs::numerics {

/// Largest singular value by power iteration on A^T A with a deterministic
/// start vector. Stops when the Rayleigh quotient changes by less than `tol`
/// relative, capped at `max_iter` sweeps.
double sigma_max(const Eigen::MatrixXd& a, double tol = 1e-10,
                 int max_iter = 10000);

/// Extreme singular values of the column submatrix selected by `support`.
std::pair<double, double> sigma_minmax_submatrix(const Eigen::MatrixXd& a,
                                                 std::span<const int> support);

/// Minimum-norm least-squares solution of a x = b.
Eigen::VectorXd lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// Largest singular value of pinv(a0) * da, computed by power iteration on
/// the implicitly applied operator; every pseudoinverse application goes
/// through a least-squares solve, the product is never materialised.
/// Requires a0 of full row rank.
double sigma_max_pinv_product(const Eigen::MatrixXd& a0,
                              const Eigen::MatrixXd& da, double tol = 1e-9,
                              int max_iter = 10000);

}  // namespace mccs::numerics
