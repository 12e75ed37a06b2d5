#include "mccs/numerics.hpp"

#include <cmath>
#include <stdexcept>

#include "mccs/keystream.hpp"
#include "mccs/signals.hpp"

namespace mccs::numerics {

namespace {

// Fixed-seed start vector; power iteration stays a pure function of its input.
Eigen::VectorXd power_start(Eigen::Index n) {
  keystream::BitStream stream(keystream::Seed{0x51906A50D2CA1F4DULL ^
                                              static_cast<std::uint64_t>(n)});
  Eigen::VectorXd v = signals::gaussian_vector(stream, static_cast<int>(n));
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(n, 0);
}

}  // namespace

double sigma_max(const Eigen::MatrixXd& a, double tol, int max_iter) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw std::invalid_argument("sigma_max: empty matrix");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("sigma_max: non-finite entries");
  }
  Eigen::VectorXd v = power_start(a.cols());
  double lambda_prev = 0.0;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd w = a * v;
    lambda = w.squaredNorm();
    if (lambda == 0.0) {
      return 0.0;
    }
    v.noalias() = a.transpose() * w;
    const double norm = v.norm();
    if (norm == 0.0) {
      return std::sqrt(lambda);
    }
    v /= norm;
    if (it > 0 && std::abs(lambda - lambda_prev) <= tol * lambda) {
      break;
    }
    lambda_prev = lambda;
  }
  return std::sqrt(lambda);
}

std::pair<double, double> sigma_minmax_submatrix(const Eigen::MatrixXd& a,
                                                 std::span<const int> support) {
  if (support.empty()) {
    throw std::invalid_argument("sigma_minmax_submatrix: empty support");
  }
  const Eigen::Index k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd sub(a.rows(), k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const int col = support[static_cast<std::size_t>(j)];
    if (col < 0 || col >= a.cols()) {
      throw std::invalid_argument("sigma_minmax_submatrix: column out of range");
    }
    sub.col(j) = a.col(col);
  }
  const Eigen::MatrixXd gram = sub.transpose() * sub;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("sigma_minmax_submatrix: eigensolver failed");
  }
  const double lo = std::max(0.0, eig.eigenvalues().minCoeff());
  const double hi = std::max(0.0, eig.eigenvalues().maxCoeff());
  return {std::sqrt(lo), std::sqrt(hi)};
}

Eigen::VectorXd lstsq(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  if (a.rows() != b.size()) {
    throw std::invalid_argument("lstsq: dimension mismatch");
  }
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("lstsq: non-finite input");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  return cod.solve(b);
}

double sigma_max_pinv_product(const Eigen::MatrixXd& a0,
                              const Eigen::MatrixXd& da, double tol,
                              int max_iter) {
  if (a0.rows() != da.rows() || a0.cols() != da.cols()) {
    throw std::invalid_argument("sigma_max_pinv_product: shape mismatch");
  }
  if (da.isZero(0.0)) {
    return 0.0;
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> pinv(a0);
  if (pinv.rank() < a0.rows()) {
    throw std::runtime_error("sigma_max_pinv_product: a0 is rank deficient");
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> pinv_t(
      a0.transpose());

  // Power iteration on B^T B with B = pinv(a0) * da.
  Eigen::VectorXd v = power_start(a0.cols());
  double lambda_prev = 0.0;
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd bv = pinv.solve(da * v);
    lambda = bv.squaredNorm();
    if (lambda == 0.0) {
      return 0.0;
    }
    v.noalias() = da.transpose() * pinv_t.solve(bv);
    const double norm = v.norm();
    if (norm == 0.0) {
      return std::sqrt(lambda);
    }
    v /= norm;
    if (it > 0 && std::abs(lambda - lambda_prev) <= tol * lambda) {
      break;
    }
    lambda_prev = lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace mccs::numerics
