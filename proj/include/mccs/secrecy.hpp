#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mccs/keystream.hpp"

namespace mccs::secrecy {

/// Scalar ciphertext entries pooled across frames, each from a fresh
/// single-row Bernoulli encoding of the same plaintext, 1/sqrt(n) scaled.
struct CiphertextSample {
  std::vector<double> values;
  double e_x = 0;
  int n = 0;
};

struct KsOutcome {
  double statistic = 0;
  double p_value = 0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

struct AttackReport {
  double e1 = 0;
  double e2 = 0;
  int n = 0;
  long chi = 0;
  int repetitions = 0;
  std::vector<double> p_values;
  double second_level_p = 0;
  bool distinguishable = false;
};

struct ConvergencePoint {
  int n = 0;
  int plaintext_id = 0;
  double deviation = 0;
};

struct ConvergenceReport {
  std::vector<int> n_grid;
  long rows_per_plaintext = 0;
  int plaintexts_per_n = 0;
  std::vector<ConvergencePoint> deviations;
  std::vector<double> median_deviation;          // one per grid entry
  double loglog_slope = 0;                       // of median deviation vs n
  std::vector<std::pair<double, double>> c_rho;  // (rho, C(rho))
};

/// Asymptotic Kolmogorov tail Q(lambda) = 2 sum_{j>=1} (-1)^(j-1)
/// exp(-2 j^2 lambda^2), truncated when terms drop below 1e-10.
double kolmogorov_q(double lambda);

double normal_cdf(double x);
/// Inverse standard normal CDF (rational approximation polished by Newton).
double normal_quantile(double p);

CiphertextSample collect_ciphertexts(const Eigen::VectorXd& x, long chi,
                                     keystream::Seed seed);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
/// lambda = D sqrt(na nb / (na + nb)).
KsOutcome ks_two_sample(std::span<const double> a, std::span<const double> b);
KsOutcome ks_two_sample(const CiphertextSample& a, const CiphertextSample& b);

/// One-sample KS of p-values against U[0, 1]; the second testing level.
KsOutcome ks_uniformity(std::span<const double> p_values);

/// Ciphertext distinguishing attack over `repetitions` fresh orthogonal
/// plaintext pairs with energies (e1, e2): per-pair two-sample KS, then a
/// uniformity test on the collected p-values. Distinguishable iff the
/// second-level p-value drops below 5%.
AttackReport distinguishing_attack(double e1, double e2, int n, long chi,
                                   int repetitions, keystream::Seed seed);

/// One-sample KS of collected ciphertexts against N(0, e_x / n).
KsOutcome gaussianity_check(const Eigen::VectorXd& x, long chi,
                            keystream::Seed seed);

/// Gaussian-convergence deviation per plaintext: unscaled measurements of a
/// unit-energy sphere plaintext are binned into min(4096, R/100) equiprobable
/// Gaussian bins; the deviation is the largest bin-mass gap
/// max_b |p_hat_b - 1/B|. C(rho) is the (1-rho)-quantile over plaintexts of
/// n * deviation, maximised over the grid.
ConvergenceReport estimate_convergence_constant(std::span<const int> n_grid,
                                                int plaintexts_per_n,
                                                long rows_per_plaintext,
                                                std::span<const double> rho_list,
                                                keystream::Seed seed);

}  // namespace mccs::secrecy
