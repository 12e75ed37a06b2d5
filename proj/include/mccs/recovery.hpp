#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "mccs/signals.hpp"

namespace mccs::recovery {

struct RecoveryResult {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd s_hat;
  int iterations = 0;
  double residual = 0;
  bool converged = false;
};

struct BpdnOptions {
  double fit_tol_rel = 1e-3;      // |residual - target| band, relative to ||y||
  double gamma_floor_rel = 1e-6;  // residual target floor when gamma = 0
  double inner_tol = 1e-8;        // relative iterate change stop
  int max_inner = 5000;
  int max_outer = 60;  // bisection steps on the l1 weight
};

/// Basis pursuit denoising, min ||s||_1 s.t. ||y - A D s||_2 <= gamma,
/// realised as FISTA on the penalised form with an outer bisection on the
/// l1 weight until the residual meets max(gamma, floor). gamma = 0 requests
/// the equality-constrained basis pursuit limit.
RecoveryResult solve_bpdn(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                          const signals::OrthonormalBasis& basis, double gamma,
                          const BpdnOptions& opts = {});

struct CosampOptions {
  double residual_tol_rel = 1e-6;  // stop when the residual change drops below
  int max_iter = 200;
};

/// CoSaMP with exact sparsity k: proxy correlation, merge of the 2k largest
/// with the current support, least squares on the merged support, prune to k.
/// Ties in the magnitude selections resolve to the lowest index.
RecoveryResult solve_cosamp(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                            const signals::OrthonormalBasis& basis,
                            std::optional<int> k,
                            const CosampOptions& opts = {});

/// Recovery SNR in dB, 10 log10(||x||^2 / ||x - x_hat||^2), capped at 300.
double rsnr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

/// Average RSNR: 10 log10 of the sample mean of the per-pair energy ratios
/// (the average sits inside the logarithm).
double arsnr(
    std::span<const std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs);
double arsnr_from_ratios(std::span<const double> ratios);

}  // namespace mccs::recovery
