#include "mccs/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mccs/numerics.hpp"

namespace mccs::recovery {

namespace {

constexpr double kRsnrCapDb = 300.0;
constexpr double kRatioCap = 1e30;

Eigen::MatrixXd effective_dictionary(const Eigen::MatrixXd& a,
                                     const signals::OrthonormalBasis& basis) {
  if (a.cols() != basis.n) {
    throw std::invalid_argument("recovery: matrix/basis dimension mismatch");
  }
  if (basis.kind == signals::BasisKind::identity) {
    return a;
  }
  return a * basis.d;
}

void soft_threshold_inplace(Eigen::VectorXd& v, double t) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]) - t;
    v[i] = m > 0 ? (v[i] > 0 ? m : -m) : 0.0;
  }
}

// Accelerated proximal gradient for 0.5||y - G s||^2 + lambda ||s||_1,
// warm-started from `s`. Returns the iteration count.
int fista(const Eigen::MatrixXd& g, const Eigen::VectorXd& y, double lambda,
          double step, double inner_tol, int max_inner, Eigen::VectorXd& s) {
  Eigen::VectorXd z = s;
  double t = 1.0;
  int iterations = 0;
  for (int it = 0; it < max_inner; ++it) {
    const Eigen::VectorXd grad = g.transpose() * (g * z - y);
    Eigen::VectorXd s_next = z - step * grad;
    soft_threshold_inplace(s_next, step * lambda);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = s_next + ((t - 1.0) / t_next) * (s_next - s);
    t = t_next;

    const double change = (s_next - s).norm();
    const double scale = std::max(s_next.norm(), 1e-300);
    s = std::move(s_next);
    ++iterations;
    if (change <= inner_tol * scale) {
      break;
    }
  }
  return iterations;
}

std::vector<int> top_indices_by_magnitude(const Eigen::VectorXd& v, int count) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(v[a]) > std::abs(v[b]);
  });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(count)));
  return idx;
}

}  // namespace

RecoveryResult solve_bpdn(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                          const signals::OrthonormalBasis& basis, double gamma,
                          const BpdnOptions& opts) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("solve_bpdn: gamma must be finite and >= 0");
  }
  if (y.size() != a.rows()) {
    throw std::invalid_argument("solve_bpdn: measurement length mismatch");
  }
  const Eigen::MatrixXd g = effective_dictionary(a, basis);
  const Eigen::Index n = g.cols();

  RecoveryResult result;
  result.s_hat = Eigen::VectorXd::Zero(n);

  const double y_norm = y.norm();
  if (y_norm == 0.0) {
    result.x_hat = Eigen::VectorXd::Zero(n);
    result.converged = true;
    return result;
  }

  const double floor = opts.gamma_floor_rel * y_norm;
  const double target = std::max(gamma, floor);
  const double accept_hi = target * (1.0 + opts.fit_tol_rel) + floor;
  const double accept_lo = target - opts.fit_tol_rel * y_norm;

  if (target >= y_norm) {  // zero is already feasible, and it is l1-minimal
    result.x_hat = Eigen::VectorXd::Zero(n);
    result.residual = y_norm;
    result.converged = true;
    return result;
  }

  const double sigma = numerics::sigma_max(g);
  const double step = 1.0 / (sigma * sigma);
  const double lambda_hi = (g.transpose() * y).cwiseAbs().maxCoeff();
  const double lambda_lo = 1e-12 * lambda_hi;

  // Warm-started continuation from lambda_hi down until the residual falls
  // to the target, then bisection inside the bracketing interval. The warm
  // starts keep the iterates on the sparse solution path; a cold start at a
  // tiny lambda would drift to a dense near-interpolator instead.
  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  double residual = y_norm;
  int outer = 0;
  double hi = lambda_hi;
  double lo = 0.0;
  for (; outer < opts.max_outer; ++outer) {
    const double lambda = hi * 0.3;
    result.iterations +=
        fista(g, y, lambda, step, opts.inner_tol, opts.max_inner, s);
    residual = (y - g * s).norm();
    if (residual <= accept_hi && residual >= accept_lo) {
      result.converged = true;
      break;
    }
    if (residual <= target) {
      lo = lambda;  // bracketed: residual(lo) below target, residual(hi) above
      break;
    }
    hi = lambda;
    if (lambda <= lambda_lo) {
      break;
    }
  }
  if (!result.converged && lo > 0.0) {
    for (; outer < opts.max_outer; ++outer) {
      const double lambda = 0.5 * (lo + hi);
      result.iterations +=
          fista(g, y, lambda, step, opts.inner_tol, opts.max_inner, s);
      residual = (y - g * s).norm();
      if (residual <= accept_hi && residual >= accept_lo) {
        result.converged = true;
        break;
      }
      if (residual > target) {
        hi = lambda;
      } else {
        lo = lambda;
      }
    }
  }

  result.s_hat = s;
  result.x_hat = basis.synthesize(s);
  result.residual = residual;
  return result;
}

RecoveryResult solve_cosamp(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                            const signals::OrthonormalBasis& basis,
                            std::optional<int> k, const CosampOptions& opts) {
  if (!k.has_value()) {
    throw std::invalid_argument("solve_cosamp: sparsity level k is required");
  }
  const int m = static_cast<int>(a.rows());
  if (*k < 1 || 3 * (*k) > m) {
    throw std::invalid_argument("solve_cosamp: need 1 <= k <= m/3");
  }
  if (y.size() != a.rows()) {
    throw std::invalid_argument("solve_cosamp: measurement length mismatch");
  }
  const Eigen::MatrixXd g = effective_dictionary(a, basis);
  const Eigen::Index n = g.cols();

  RecoveryResult result;
  result.s_hat = Eigen::VectorXd::Zero(n);

  const double y_norm = y.norm();
  Eigen::VectorXd residual_vec = y;
  double residual_prev = y_norm;
  std::vector<int> support;

  for (int it = 0; it < opts.max_iter; ++it) {
    ++result.iterations;
    const Eigen::VectorXd proxy = g.transpose() * residual_vec;
    std::vector<int> merged = top_indices_by_magnitude(proxy, 2 * (*k));
    merged.insert(merged.end(), support.begin(), support.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    Eigen::MatrixXd sub(g.rows(), static_cast<Eigen::Index>(merged.size()));
    for (std::size_t j = 0; j < merged.size(); ++j) {
      sub.col(static_cast<Eigen::Index>(j)) = g.col(merged[j]);
    }
    const Eigen::VectorXd coeff = numerics::lstsq(sub, y);

    Eigen::VectorXd dense = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < merged.size(); ++j) {
      dense[merged[j]] = coeff[static_cast<Eigen::Index>(j)];
    }
    support = top_indices_by_magnitude(dense, *k);
    std::sort(support.begin(), support.end());

    result.s_hat.setZero();
    for (const int idx : support) {
      result.s_hat[idx] = dense[idx];
    }
    residual_vec = y - g * result.s_hat;
    const double residual = residual_vec.norm();
    if (std::abs(residual_prev - residual) < opts.residual_tol_rel * y_norm ||
        residual == 0.0) {
      result.converged = true;
      residual_prev = residual;
      break;
    }
    residual_prev = residual;
  }

  result.residual = residual_prev;
  result.x_hat = basis.synthesize(result.s_hat);
  return result;
}

double rsnr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) {
    throw std::invalid_argument("rsnr: length mismatch");
  }
  const double ref = x.squaredNorm();
  if (ref == 0.0) {
    throw std::invalid_argument("rsnr: zero reference signal");
  }
  const double err = (x - x_hat).squaredNorm();
  if (err == 0.0) {
    return kRsnrCapDb;
  }
  return std::min(kRsnrCapDb, 10.0 * std::log10(ref / err));
}

double arsnr_from_ratios(std::span<const double> ratios) {
  if (ratios.empty()) {
    throw std::invalid_argument("arsnr: empty sample");
  }
  double sum = 0;
  for (const double r : ratios) {
    sum += std::min(r, kRatioCap);
  }
  const double mean = sum / static_cast<double>(ratios.size());
  return std::min(kRsnrCapDb, 10.0 * std::log10(mean));
}

double arsnr(
    std::span<const std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs) {
  if (pairs.empty()) {
    throw std::invalid_argument("arsnr: empty sample");
  }
  std::vector<double> ratios;
  ratios.reserve(pairs.size());
  for (const auto& [x, x_hat] : pairs) {
    const double ref = x.squaredNorm();
    if (ref == 0.0) {
      throw std::invalid_argument("arsnr: zero reference signal");
    }
    const double err = (x - x_hat).squaredNorm();
    ratios.push_back(err == 0.0 ? kRatioCap : ref / err);
  }
  return arsnr_from_ratios(ratios);
}

}  // namespace mccs::recovery
