#include "mccs/secrecy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "mccs/signals.hpp"

namespace mccs::secrecy {

namespace {

constexpr double kSecondLevelSignificance = 0.05;

double ks_p_value(double d, double effective_n) {
  return kolmogorov_q(d * std::sqrt(effective_n));
}

// One measurement scalar: a fresh +-1 row applied to x, 1/sqrt(n) scaled.
double one_row_measurement(keystream::BitStream& stream,
                           const Eigen::VectorXd& x) {
  double dot = 0;
  for (Eigen::Index l = 0; l < x.size(); ++l) {
    dot += stream.draw_sign() > 0 ? x[l] : -x[l];
  }
  return dot;
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  const std::size_t count = sorted.size();
  const auto rank = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(count)));
  return sorted[std::min(count - 1, std::max<std::size_t>(rank, 1) - 1)];
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t count = values.size();
  return count % 2 == 1
             ? values[count / 2]
             : 0.5 * (values[count / 2 - 1] + values[count / 2]);
}

}  // namespace

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) {
    return 1.0;
  }
  if (lambda < 0.5) {
    // Jacobi-theta dual of the same series; the direct form loses all
    // precision to cancellation at small lambda.
    const double factor = std::sqrt(2.0 * std::numbers::pi) / lambda;
    double cdf = 0.0;
    for (int j = 1; j <= 1000; j += 2) {
      const double term = std::exp(-j * j * std::numbers::pi *
                                   std::numbers::pi / (8.0 * lambda * lambda));
      if (factor * term < 1e-12) break;
      cdf += factor * term;
    }
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100000; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    if (term < 1e-10) {
      break;
    }
    sum += sign * term;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  }
  // Acklam's rational approximation, then two Newton polish steps.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) {
    const double err = normal_cdf(x) - p;
    const double pdf =
        std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (pdf == 0.0) break;
    x -= err / pdf;
  }
  return x;
}

CiphertextSample collect_ciphertexts(const Eigen::VectorXd& x, long chi,
                                     keystream::Seed seed) {
  if (chi < 1) {
    throw std::invalid_argument("collect_ciphertexts: chi must be >= 1");
  }
  const int n = static_cast<int>(x.size());
  CiphertextSample sample;
  sample.e_x = x.squaredNorm();
  sample.n = n;
  sample.values.resize(static_cast<std::size_t>(chi));
  keystream::BitStream stream(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (long i = 0; i < chi; ++i) {
    sample.values[static_cast<std::size_t>(i)] =
        scale * one_row_measurement(stream, x);
  }
  return sample;
}

KsOutcome ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("ks_two_sample: empty sample");
  }
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());

  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  KsOutcome out;
  out.statistic = d;
  out.n_a = sa.size();
  out.n_b = sb.size();
  out.p_value = ks_p_value(d, na * nb / (na + nb));
  return out;
}

KsOutcome ks_two_sample(const CiphertextSample& a, const CiphertextSample& b) {
  return ks_two_sample(std::span<const double>(a.values),
                       std::span<const double>(b.values));
}

KsOutcome ks_uniformity(std::span<const double> p_values) {
  if (p_values.size() < 20) {
    throw std::invalid_argument("ks_uniformity: need at least 20 p-values");
  }
  std::vector<double> sorted(p_values.begin(), p_values.end());
  for (const double p : sorted) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("ks_uniformity: p-value outside [0, 1]");
    }
  }
  std::sort(sorted.begin(), sorted.end());
  const double count = static_cast<double>(sorted.size());
  double d = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / count - sorted[i];
    const double lo = sorted[i] - static_cast<double>(i) / count;
    d = std::max({d, hi, lo});
  }
  KsOutcome out;
  out.statistic = d;
  out.n_a = sorted.size();
  out.n_b = 0;
  out.p_value = ks_p_value(d, count);
  return out;
}

AttackReport distinguishing_attack(double e1, double e2, int n, long chi,
                                   int repetitions, keystream::Seed seed) {
  if (n < 2) {
    throw std::invalid_argument("distinguishing_attack: n must be >= 2");
  }
  if (!(e1 > 0.0) || !(e2 > 0.0)) {
    throw std::invalid_argument("distinguishing_attack: energies must be positive");
  }
  if (chi < 1 || repetitions < 20) {
    throw std::invalid_argument("distinguishing_attack: bad chi or repetitions");
  }

  AttackReport report;
  report.e1 = e1;
  report.e2 = e2;
  report.n = n;
  report.chi = chi;
  report.repetitions = repetitions;
  report.p_values.resize(static_cast<std::size_t>(repetitions));

  const auto seeds =
      keystream::derive_seeds(seed, static_cast<std::size_t>(repetitions));
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < repetitions; ++r) {
    keystream::BitStream stream(seeds[static_cast<std::size_t>(r)]);
    // Fresh orthogonal pair: sphere-uniform x1, x2 orthonormalised against it.
    Eigen::VectorXd x1 = signals::sphere_uniform(stream, n, 1.0);
    Eigen::VectorXd x2 = signals::sphere_uniform(stream, n, 1.0);
    x2 -= x1.dot(x2) * x1;
    while (x2.norm() == 0.0) {
      x2 = signals::sphere_uniform(stream, n, 1.0);
      x2 -= x1.dot(x2) * x1;
    }
    x2 /= x2.norm();
    x1 *= std::sqrt(e1);
    x2 *= std::sqrt(e2);

    const keystream::Seed seed1{stream.next_word()};
    const keystream::Seed seed2{stream.next_word()};
    const CiphertextSample set1 = collect_ciphertexts(x1, chi, seed1);
    const CiphertextSample set2 = collect_ciphertexts(x2, chi, seed2);
    report.p_values[static_cast<std::size_t>(r)] =
        ks_two_sample(set1, set2).p_value;
  }

  report.second_level_p = ks_uniformity(report.p_values).p_value;
  report.distinguishable = report.second_level_p < kSecondLevelSignificance;
  return report;
}

KsOutcome gaussianity_check(const Eigen::VectorXd& x, long chi,
                            keystream::Seed seed) {
  const CiphertextSample sample = collect_ciphertexts(x, chi, seed);
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const double sigma = std::sqrt(sample.e_x / sample.n);
  const double count = static_cast<double>(sorted.size());
  double d = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double ref = normal_cdf(sorted[i] / sigma);
    const double hi = (static_cast<double>(i) + 1.0) / count - ref;
    const double lo = ref - static_cast<double>(i) / count;
    d = std::max({d, hi, lo});
  }
  KsOutcome out;
  out.statistic = d;
  out.n_a = sorted.size();
  out.n_b = 0;
  out.p_value = ks_p_value(d, count);
  return out;
}

ConvergenceReport estimate_convergence_constant(std::span<const int> n_grid,
                                                int plaintexts_per_n,
                                                long rows_per_plaintext,
                                                std::span<const double> rho_list,
                                                keystream::Seed seed) {
  if (n_grid.empty()) {
    throw std::invalid_argument("estimate_convergence_constant: empty grid");
  }
  if (plaintexts_per_n < 1 || rows_per_plaintext < 100) {
    throw std::invalid_argument("estimate_convergence_constant: too few samples");
  }

  ConvergenceReport report;
  report.n_grid.assign(n_grid.begin(), n_grid.end());
  report.rows_per_plaintext = rows_per_plaintext;
  report.plaintexts_per_n = plaintexts_per_n;

  const long bins =
      std::min<long>(4096, std::max<long>(1, rows_per_plaintext / 100));
  std::vector<double> edges(static_cast<std::size_t>(bins) - 1);
  for (long b = 1; b < bins; ++b) {
    edges[static_cast<std::size_t>(b - 1)] =
        normal_quantile(static_cast<double>(b) / static_cast<double>(bins));
  }

  const auto seeds = keystream::derive_seeds(
      seed, n_grid.size() * static_cast<std::size_t>(plaintexts_per_n));
  report.deviations.resize(seeds.size());

  const long grid_size = static_cast<long>(n_grid.size());
#pragma omp parallel for schedule(dynamic) collapse(2)
  for (long gi = 0; gi < grid_size; ++gi) {
    for (int p = 0; p < plaintexts_per_n; ++p) {
      const int n = n_grid[static_cast<std::size_t>(gi)];
      keystream::BitStream stream(
          seeds[static_cast<std::size_t>(gi) *
                    static_cast<std::size_t>(plaintexts_per_n) +
                static_cast<std::size_t>(p)]);
      const Eigen::VectorXd x = signals::sphere_uniform(stream, n, 1.0);
      std::vector<long> counts(static_cast<std::size_t>(bins), 0);
      for (long r = 0; r < rows_per_plaintext; ++r) {
        const double y = one_row_measurement(stream, x);  // reference N(0, 1)
        const auto bin = static_cast<std::size_t>(
            std::upper_bound(edges.begin(), edges.end(), y) - edges.begin());
        ++counts[bin];
      }
      double dev = 0;
      const double expected = 1.0 / static_cast<double>(bins);
      for (const long count : counts) {
        dev = std::max(dev, std::abs(static_cast<double>(count) /
                                         static_cast<double>(rows_per_plaintext) -
                                     expected));
      }
      report.deviations[static_cast<std::size_t>(gi) *
                            static_cast<std::size_t>(plaintexts_per_n) +
                        static_cast<std::size_t>(p)] = {n, p, dev};
    }
  }

  // Median per grid point and the log-log regression slope.
  double sum_lx = 0, sum_ly = 0, sum_lxly = 0, sum_lx2 = 0;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    std::vector<double> devs;
    devs.reserve(static_cast<std::size_t>(plaintexts_per_n));
    for (int p = 0; p < plaintexts_per_n; ++p) {
      devs.push_back(
          report.deviations[gi * static_cast<std::size_t>(plaintexts_per_n) +
                            static_cast<std::size_t>(p)]
              .deviation);
    }
    report.median_deviation.push_back(median(devs));
    const double lx = std::log(static_cast<double>(n_grid[gi]));
    const double ly = std::log(std::max(report.median_deviation.back(), 1e-300));
    sum_lx += lx;
    sum_ly += ly;
    sum_lxly += lx * ly;
    sum_lx2 += lx * lx;
  }
  const double points = static_cast<double>(n_grid.size());
  const double denom = points * sum_lx2 - sum_lx * sum_lx;
  report.loglog_slope =
      denom != 0.0 ? (points * sum_lxly - sum_lx * sum_ly) / denom : 0.0;

  // C(rho): (1-rho)-quantile over plaintexts of n * deviation, max over grid.
  for (const double rho : rho_list) {
    if (!(rho > 0.0 && rho < 1.0)) {
      throw std::invalid_argument("estimate_convergence_constant: rho in (0,1)");
    }
    double c_rho = 0;
    for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
      std::vector<double> scaled;
      scaled.reserve(static_cast<std::size_t>(plaintexts_per_n));
      for (int p = 0; p < plaintexts_per_n; ++p) {
        const auto& point =
            report.deviations[gi * static_cast<std::size_t>(plaintexts_per_n) +
                              static_cast<std::size_t>(p)];
        scaled.push_back(point.n * point.deviation);
      }
      std::sort(scaled.begin(), scaled.end());
      c_rho = std::max(c_rho, quantile_sorted(scaled, 1.0 - rho));
    }
    report.c_rho.emplace_back(rho, c_rho);
  }
  return report;
}

}  // namespace mccs::secrecy
