#include "mccs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mccs/numerics.hpp"

namespace mccs::bounds {

namespace {

constexpr double kDbCap = 300.0;

void check_regime(const PerturbationRegime& regime, bool need_theta) {
  if (regime.m < 1 || regime.n < 1) {
    throw std::invalid_argument("regime: dimensions must be >= 1");
  }
  if (!(regime.eta > 0.0) || regime.eta > 0.5) {
    throw std::invalid_argument("regime: eta must be in (0, 1/2]");
  }
  if (need_theta && !(regime.theta > 0.0 && regime.theta < 1.0)) {
    throw std::invalid_argument("regime: theta must be in (0, 1)");
  }
}

double zeta_value(int m, double eta, double theta, double f_over_e2) {
  const double inflate = 1.0 + (3.0 / (2.0 * eta) - 1.0) / m;
  const double spread = inflate * f_over_e2 - 1.0;
  const double one_minus = 1.0 - theta;
  return 1.0 / (1.0 + spread / (one_minus * one_minus));
}

}  // namespace

Theorem1Result theorem1_lb(const PerturbationRegime& regime, double e_x,
                           double f_over_e2, double sigma_max_a0) {
  check_regime(regime, true);
  if (!(e_x > 0.0)) {
    throw std::invalid_argument("theorem1_lb: E_x must be positive");
  }
  if (!(sigma_max_a0 > 0.0)) {
    throw std::invalid_argument("theorem1_lb: sigma_max must be positive");
  }
  Theorem1Result out;
  out.bound = 4.0 * regime.eta * regime.m * e_x * regime.theta /
              (sigma_max_a0 * sigma_max_a0);
  out.zeta = zeta_value(regime.m, regime.eta, regime.theta, f_over_e2);
  return out;
}

double corollary1_lb(double q, double eta, double w_x, double theta) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("corollary1_lb: q must be in (0, 1]");
  }
  if (!(eta >= 0.0) || eta > 0.5) {
    throw std::invalid_argument("corollary1_lb: eta must be in [0, 1/2]");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("corollary1_lb: theta must be in (0, 1]");
  }
  if (!(w_x >= 0.0)) {
    throw std::invalid_argument("corollary1_lb: W_x must be >= 0");
  }
  const double root = 1.0 + std::sqrt(q);
  return 4.0 * eta * q * w_x * theta / (root * root);
}

double lemma1_second_moment_oracle(int m, double eta, double f_xi,
                                   double g_xi) {
  if (m < 1) {
    throw std::invalid_argument("lemma1_second_moment_oracle: m must be >= 1");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("lemma1_second_moment_oracle: eta must be > 0");
  }
  return 16.0 * m * eta *
         (eta * (m - 1) * f_xi + 3.0 * eta * (f_xi - g_xi) + g_xi);
}

Lemma1Check lemma1_probability_check(
    const PerturbationRegime& regime,
    const std::function<Eigen::VectorXd(keystream::BitStream&)>& sample_xi,
    double e_xi, double f_over_e2_xi, long trials, keystream::Seed seed) {
  check_regime(regime, true);
  if (trials < 100) {
    throw std::invalid_argument("lemma1_probability_check: trials must be >= 100");
  }

  const auto seeds = keystream::derive_seeds(seed, static_cast<std::size_t>(trials));
  const double threshold = 4.0 * regime.m * regime.eta * e_xi * regime.theta;

  std::vector<double> norms(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 16)
  for (long t = 0; t < trials; ++t) {
    keystream::BitStream stream(seeds[static_cast<std::size_t>(t)]);
    const Eigen::VectorXd xi = sample_xi(stream);
    // dA with i.i.d. entries: 0 w.p. 1-eta, +-2 w.p. eta/2, applied row-wise.
    double norm_sq = 0;
    for (int j = 0; j < regime.m; ++j) {
      double dot = 0;
      for (int l = 0; l < regime.n; ++l) {
        if (stream.next_unit() <= regime.eta) {
          dot += (stream.draw_sign() > 0 ? 2.0 : -2.0) * xi[l];
        }
      }
      norm_sq += dot * dot;
    }
    norms[static_cast<std::size_t>(t)] = norm_sq;
  }

  Lemma1Check out;
  out.trials = trials;
  out.zeta = zeta_value(regime.m, regime.eta, regime.theta, f_over_e2_xi);
  out.mean_expected = 4.0 * regime.m * regime.eta * e_xi;
  long exceed = 0;
  double sum = 0, sum_sq = 0, sum_q = 0;
  for (const double v : norms) {
    if (v >= threshold) ++exceed;
    const double sq = v * v;
    sum += v;
    sum_sq += sq;
    sum_q += sq * sq;
  }
  out.exceed_rate = static_cast<double>(exceed) / static_cast<double>(trials);
  out.mean = sum / static_cast<double>(trials);
  out.second_moment = sum_sq / static_cast<double>(trials);
  out.fourth_moment = sum_q / static_cast<double>(trials);
  return out;
}

double Lemma1Check::mean_stderr() const {
  const double var = std::max(0.0, second_moment - mean * mean);
  return std::sqrt(var / static_cast<double>(trials));
}

double Lemma1Check::second_moment_stderr() const {
  const double var =
      std::max(0.0, fourth_moment - second_moment * second_moment);
  return std::sqrt(var / static_cast<double>(trials));
}

std::pair<RicEstimate, RicEstimate> estimate_ric_constants(
    const sensing::EncodingMatrix& a1, const sensing::PerturbationMatrix& da,
    const signals::OrthonormalBasis& basis, int k, int trials,
    keystream::Seed seed) {
  if (2 * k > a1.rows) {
    throw std::invalid_argument("estimate_ric_constants: need 2k <= m");
  }
  if (k < 1 || trials < 1) {
    throw std::invalid_argument("estimate_ric_constants: bad k or trials");
  }
  const int n = a1.cols;
  const double scale = 1.0 / std::sqrt(static_cast<double>(a1.rows));
  const Eigen::MatrixXd m1 = (a1.entries * basis.d) * scale;
  const Eigen::MatrixXd md = (-da.dense() * basis.d) * scale;

  auto estimate = [&](int kk, keystream::Seed sub_seed) {
    keystream::BitStream stream(sub_seed);
    double max_a = 0, min_a = std::numeric_limits<double>::infinity();
    double max_d = 0;
    std::vector<int> support(static_cast<std::size_t>(kk));
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int t = 0; t < trials; ++t) {
      std::fill(used.begin(), used.end(), false);
      for (int filled = 0; filled < kk;) {
        const auto idx = static_cast<int>(
            stream.draw_index(static_cast<std::uint64_t>(n)));
        if (!used[idx]) {
          used[idx] = true;
          support[filled++] = idx;
        }
      }
      const auto [lo_a, hi_a] = numerics::sigma_minmax_submatrix(m1, support);
      const auto [lo_d, hi_d] = numerics::sigma_minmax_submatrix(md, support);
      max_a = std::max(max_a, hi_a);
      min_a = std::min(min_a, lo_a);
      max_d = std::max(max_d, hi_d);
    }
    RicEstimate est;
    est.k = kk;
    est.sigma_min = min_a;
    est.sigma_max = max_a;
    est.delta = std::max(max_a * max_a - 1.0, 1.0 - min_a * min_a);
    est.eps = max_a > 0 ? max_d / max_a : 0.0;
    est.trials = trials;
    return est;
  };

  const auto seeds = keystream::derive_seeds(seed, 2);
  return {estimate(k, seeds[0]), estimate(2 * k, seeds[1])};
}

Prop1Bound proposition1_ub(const RicEstimate& at_k, const RicEstimate& at_2k,
                           double y_norm) {
  const double eps_limit = std::pow(2.0, 0.25) - 1.0;
  if (!(at_2k.eps < eps_limit)) {
    throw InapplicableBound("proposition1_ub: eps^(2k) >= 2^(1/4) - 1");
  }
  const double one_eps = 1.0 + at_2k.eps;
  const double delta_max = std::sqrt(2.0) / (one_eps * one_eps) - 1.0;
  if (!(at_2k.delta < delta_max)) {
    throw InapplicableBound("proposition1_ub: delta^(2k) >= delta_max");
  }
  if (!(at_k.delta < 1.0)) {
    throw InapplicableBound("proposition1_ub: delta^(k) >= 1");
  }

  Prop1Bound out;
  out.gamma = at_k.eps *
              std::sqrt((1.0 + at_k.delta) / (1.0 - at_k.delta)) * y_norm;
  const double denom =
      1.0 - (std::sqrt(2.0) + 1.0) *
                ((1.0 + at_2k.delta) * one_eps * one_eps - 1.0);
  out.cbar = 4.0 * std::sqrt(1.0 + at_2k.delta) * one_eps / denom;
  out.ub = out.cbar * out.gamma;
  return out;
}

sensing::RowMatrixXd random_bernoulli(keystream::BitStream& stream, int m,
                                      int n) {
  sensing::RowMatrixXd a(m, n);
  double* data = a.data();
  const std::int64_t total = static_cast<std::int64_t>(m) * n;
  for (std::int64_t i = 0; i < total; ++i) {
    data[i] = static_cast<double>(stream.draw_sign());
  }
  return a;
}

Eigen::MatrixXd random_perturbation_exact(keystream::BitStream& stream,
                                          const sensing::RowMatrixXd& a0,
                                          double eta) {
  const int m = static_cast<int>(a0.rows());
  const int n = static_cast<int>(a0.cols());
  const std::int64_t total = static_cast<std::int64_t>(m) * n;
  const std::int64_t c = sensing::flip_cardinality(eta, m, n);
  if (c > total) {
    throw std::invalid_argument("random_perturbation_exact: eta too large");
  }
  Eigen::MatrixXd da = Eigen::MatrixXd::Zero(m, n);
  std::vector<bool> taken(static_cast<std::size_t>(total), false);
  std::int64_t placed = 0;
  while (placed < c) {
    const auto idx = stream.draw_index(static_cast<std::uint64_t>(total));
    if (!taken[idx]) {
      taken[idx] = true;
      const int row = static_cast<int>(idx / n);
      const int col = static_cast<int>(idx % n);
      da(row, col) = -2.0 * a0(row, col);
      ++placed;
    }
  }
  return da;
}

double practical_lb_arsnr(int m, int n, double eta, int trials,
                          keystream::Seed seed) {
  if (m < 1 || n < 1 || trials < 1) {
    throw std::invalid_argument("practical_lb_arsnr: bad arguments");
  }
  if (!(eta >= 0.0) || eta > 0.5) {
    throw std::invalid_argument("practical_lb_arsnr: eta must be in [0, 1/2]");
  }
  if (sensing::flip_cardinality(eta, m, n) == 0) {
    return kDbCap;  // no perturbation, no noise floor
  }

  const auto seeds = keystream::derive_seeds(seed, static_cast<std::size_t>(trials));
  std::vector<double> gains(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < trials; ++t) {
    keystream::BitStream stream(seeds[static_cast<std::size_t>(t)]);
    const sensing::RowMatrixXd a0 = random_bernoulli(stream, m, n);
    const Eigen::MatrixXd da = random_perturbation_exact(stream, a0, eta);
    const double s = numerics::sigma_max_pinv_product(a0, da);
    gains[static_cast<std::size_t>(t)] = s * s;
  }
  const double mean =
      std::accumulate(gains.begin(), gains.end(), 0.0) / trials;
  if (mean == 0.0) {
    return kDbCap;
  }
  return std::min(kDbCap, -10.0 * std::log10(mean));
}

double practical_ub_arsnr(int m, int n, double eta) {
  if (m < 1 || n < 1) {
    throw std::invalid_argument("practical_ub_arsnr: bad dimensions");
  }
  if (!(eta > 0.0)) {
    throw std::invalid_argument("practical_ub_arsnr: eta must be positive");
  }
  const double root = std::sqrt(static_cast<double>(m)) +
                      std::sqrt(static_cast<double>(n));
  return -10.0 * std::log10(4.0 * eta * m / (root * root));
}

NaiveError naive_second_class_error(const Eigen::MatrixXd& a0,
                                    const Eigen::MatrixXd& da,
                                    const Eigen::VectorXd& x) {
  if (a0.rows() != da.rows() || a0.cols() != da.cols() ||
      x.size() != a0.cols()) {
    throw std::invalid_argument("naive_second_class_error: shape mismatch");
  }
  NaiveError out;
  out.dx = numerics::lstsq(a0, da * x);
  const double ratio = out.dx.squaredNorm() / x.squaredNorm();
  out.rsnr_proxy_db =
      ratio == 0.0 ? kDbCap : std::min(kDbCap, -10.0 * std::log10(ratio));
  return out;
}

}  // namespace mccs::bounds
