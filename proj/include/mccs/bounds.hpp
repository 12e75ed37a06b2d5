#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <utility>

#include "mccs/keystream.hpp"
#include "mccs/sensing.hpp"
#include "mccs/signals.hpp"

namespace mccs::bounds {

/// Thrown when the hypotheses of the RIP-based upper bound fail. A distinct
/// type because an inapplicable bound is a reportable outcome, not a numeric
/// failure.
class InapplicableBound : public std::runtime_error {
 public:
  explicit InapplicableBound(const std::string& what)
      : std::runtime_error(what) {}
};

struct PerturbationRegime {
  int m = 0;
  int n = 0;
  double eta = 0;    // perturbation density, must be <= 1/2
  double theta = 0;  // Chebyshev parameter in (0, 1)

  double q() const { return static_cast<double>(m) / n; }
};

struct Theorem1Result {
  double bound = 0;  // lower bound on ||x_hat - x||^2
  double zeta = 0;   // probability with which the bound holds
};

/// Second-class recovery error lower bound: 4 eta m E_x theta / sigma_max^2,
/// holding with probability zeta = 1 / (1 + (1-theta)^-2 ((1 + (3/(2 eta) - 1)
/// / m) F_x/E_x^2 - 1)).
Theorem1Result theorem1_lb(const PerturbationRegime& regime, double e_x,
                           double f_over_e2, double sigma_max_a0);

/// Asymptotic recovery error power bound 4 eta q W_x theta / (1 + sqrt(q))^2.
/// theta = 1 recovers the closed-form ARSNR upper bound exactly.
double corollary1_lb(double q, double eta, double w_x, double theta);

/// E[(||dA xi||^2)^2] = 16 m eta (eta (m-1) F + 3 eta (F - G) + G); exists as
/// an independent oracle for the Monte Carlo moment checks.
double lemma1_second_moment_oracle(int m, double eta, double f_xi, double g_xi);

struct Lemma1Check {
  double exceed_rate = 0;   // fraction of trials with ||dA xi||^2 >= threshold
  double zeta = 0;          // closed-form lower bound on that probability
  double mean = 0;          // sample mean of ||dA xi||^2
  double mean_expected = 0; // 4 m eta E_xi
  double second_moment = 0; // sample mean of (||dA xi||^2)^2
  double fourth_moment = 0; // sample mean of (||dA xi||^2)^4, for std errors
  long trials = 0;

  double mean_stderr() const;
  double second_moment_stderr() const;
};

/// Monte Carlo check of the Lemma 1 tail bound over fresh (dA, xi) pairs; dA
/// has i.i.d. entries (0 w.p. 1-eta, +-2 w.p. eta/2 each) matching the
/// lemma's model. The xi sampler receives a per-trial stream.
Lemma1Check lemma1_probability_check(
    const PerturbationRegime& regime,
    const std::function<Eigen::VectorXd(keystream::BitStream&)>& sample_xi,
    double e_xi, double f_over_e2_xi, long trials, keystream::Seed seed);

struct RicEstimate {
  int k = 0;
  double sigma_min = 0;  // over sampled k-column submatrices of A1 D / sqrt(m)
  double sigma_max = 0;
  double delta = 0;      // RIC: max(sigma_max^2 - 1, 1 - sigma_min^2)
  double eps = 0;        // sigma_max(-dA D) / sigma_max(A1 D), same supports
  int trials = 0;
};

/// Monte Carlo estimate of the perturbation constants at sparsity k and 2k.
/// Both matrices are column-normalised by 1/sqrt(m) so that the restricted
/// isometry constant is measured against the unit isometry.
std::pair<RicEstimate, RicEstimate> estimate_ric_constants(
    const sensing::EncodingMatrix& a1, const sensing::PerturbationMatrix& da,
    const signals::OrthonormalBasis& basis, int k, int trials,
    keystream::Seed seed);

struct Prop1Bound {
  double gamma = 0;
  double cbar = 0;
  double ub = 0;  // cbar * gamma
};

/// RIP-based recovery error upper bound; throws InapplicableBound when
/// eps^(2k) >= 2^(1/4) - 1 or delta^(2k) >= sqrt(2) (1 + eps^(2k))^-2 - 1.
Prop1Bound proposition1_ub(const RicEstimate& at_k, const RicEstimate& at_2k,
                           double y_norm);

/// Practical ARSNR lower bound, -10 log10 of the Monte Carlo mean of
/// sigma_max(pinv(A0) dA)^2 over fresh matrix pairs. Capped at 300 dB when
/// eta = 0.
double practical_lb_arsnr(int m, int n, double eta, int trials,
                          keystream::Seed seed);

/// Closed-form ARSNR upper bound -10 log10(4 eta m / (sqrt(m) + sqrt(n))^2).
double practical_ub_arsnr(int m, int n, double eta);

struct NaiveError {
  Eigen::VectorXd dx;
  double rsnr_proxy_db = 0;
};

/// Naive second-class error model dx = pinv(a0) (dA x) and its RSNR proxy.
NaiveError naive_second_class_error(const Eigen::MatrixXd& a0,
                                    const Eigen::MatrixXd& da,
                                    const Eigen::VectorXd& x);

/// Fresh Bernoulli matrix for Monte Carlo loops (not tied to the key chain).
sensing::RowMatrixXd random_bernoulli(keystream::BitStream& stream, int m,
                                      int n);
/// Exactly round(eta m n) flipped positions, uniform without replacement.
Eigen::MatrixXd random_perturbation_exact(keystream::BitStream& stream,
                                          const sensing::RowMatrixXd& a0,
                                          double eta);

}  // namespace mccs::bounds
