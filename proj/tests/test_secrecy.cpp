#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mccs/secrecy.hpp"
#include "mccs/signals.hpp"

using namespace mccs;

TEST_CASE("kolmogorov tail and normal quantile basics") {
  CHECK(secrecy::kolmogorov_q(0.0) == 1.0);
  CHECK(secrecy::kolmogorov_q(1e-6) == doctest::Approx(1.0).epsilon(1e-6));
  // Classical table value: Q(1.36) is about 0.049.
  CHECK(secrecy::kolmogorov_q(1.36) == doctest::Approx(0.049).epsilon(0.02));
  CHECK(secrecy::kolmogorov_q(3.0) < 1e-7);

  CHECK(secrecy::normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  for (const double p : {0.001, 0.1, 0.25, 0.7, 0.975, 0.9999}) {
    CHECK(secrecy::normal_cdf(secrecy::normal_quantile(p)) ==
          doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(secrecy::normal_quantile(0.0), std::invalid_argument);
}

TEST_CASE("ciphertext collection statistics") {
  const int n = 16;
  const double energy = 2.0;
  Eigen::VectorXd one_hot = Eigen::VectorXd::Zero(n);
  one_hot[0] = std::sqrt(energy);
  const auto atoms = secrecy::collect_ciphertexts(one_hot, 5000, keystream::Seed{4});
  const double atom = std::sqrt(energy / n);
  for (const double v : atoms.values) {
    CHECK(std::abs(std::abs(v) - atom) < 1e-12);
  }

  keystream::BitStream stream(keystream::Seed{5});
  const Eigen::VectorXd x = signals::sphere_uniform(stream, 64, energy);
  const long chi = 100000;
  const auto sample = secrecy::collect_ciphertexts(x, chi, keystream::Seed{6});
  double sum_sq = 0;
  for (const double v : sample.values) sum_sq += v * v;
  const double var = sum_sq / chi;
  const double expected = energy / 64;
  const double se = std::sqrt(2.0 / chi) * expected;
  CHECK(std::abs(var - expected) <= 4.0 * se);

  // Sign symmetry: x and -x give the same ciphertext distribution.
  const auto plus = secrecy::collect_ciphertexts(x, 20000, keystream::Seed{7});
  const auto minus = secrecy::collect_ciphertexts(-x, 20000, keystream::Seed{8});
  CHECK(secrecy::ks_two_sample(plus, minus).p_value > 0.001);
}

TEST_CASE("two-sample KS statistic and p-value") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const auto same = secrecy::ks_two_sample(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);

  std::vector<double> lo(100), hi(100);
  for (int i = 0; i < 100; ++i) {
    lo[i] = i;
    hi[i] = 1000 + i;
  }
  const auto disjoint = secrecy::ks_two_sample(lo, hi);
  CHECK(disjoint.statistic == 1.0);
  CHECK(disjoint.p_value < 1e-12);

  CHECK_THROWS_AS(secrecy::ks_two_sample(std::vector<double>{}, a),
                  std::invalid_argument);

  // Ties across samples are handled by advancing both sides.
  const std::vector<double> t1{0, 0, 1, 1}, t2{0, 1, 1, 1};
  const auto tied = secrecy::ks_two_sample(t1, t2);
  CHECK(tied.statistic == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("ks_uniformity accepts uniform and rejects degenerate p-values") {
  std::vector<double> flat(50, 0.5);
  CHECK(secrecy::ks_uniformity(flat).p_value < 1e-6);

  keystream::BitStream stream(keystream::Seed{9});
  std::vector<double> uniform(5000);
  for (auto& v : uniform) v = stream.next_unit();
  CHECK(secrecy::ks_uniformity(uniform).p_value > 0.05);

  CHECK_THROWS_AS(secrecy::ks_uniformity(std::vector<double>(5, 0.5)),
                  std::invalid_argument);
  std::vector<double> bad(30, 0.5);
  bad[0] = 1.5;
  CHECK_THROWS_AS(secrecy::ks_uniformity(bad), std::invalid_argument);
}

TEST_CASE("first-level p-values are uniform under the null") {
  // Two-sample KS on samples from one distribution: p-values pass the
  // second-level uniformity test.
  keystream::BitStream stream(keystream::Seed{10});
  std::vector<double> p_values;
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> a(2000), b(2000);
    signals::GaussianSampler gauss(stream);
    for (auto& v : a) v = gauss();
    for (auto& v : b) v = gauss();
    p_values.push_back(secrecy::ks_two_sample(a, b).p_value);
  }
  CHECK(secrecy::ks_uniformity(p_values).p_value > 0.01);
}

TEST_CASE("attack harness calibration on the null") {
  // Under identical generating processes the verdict stays indistinguishable
  // in at least 90% of self-runs.
  const auto seeds = keystream::derive_seeds(keystream::Seed{2468}, 50);
  int indistinguishable = 0;
  for (int run = 0; run < 50; ++run) {
    const auto report =
        secrecy::distinguishing_attack(1.0, 1.0, 64, 1000, 50, seeds[run]);
    if (!report.distinguishable) ++indistinguishable;
  }
  CHECK(indistinguishable >= 45);
}

TEST_CASE("gross energy gaps are always detected") {
  const auto report =
      secrecy::distinguishing_attack(1.0, 4.0, 64, 5000, 50, keystream::Seed{97});
  CHECK(report.distinguishable);
  for (const double p : report.p_values) {
    CHECK(p < 1e-3);
  }
  CHECK(report.p_values.size() == 50);
}

TEST_CASE("gaussianity check behaviour across n") {
  // Spiky plaintext at tiny n: the two-point law is rejected outright.
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(4);
  spike[2] = 1.0;
  const auto spiky = secrecy::gaussianity_check(spike, 20000, keystream::Seed{12});
  CHECK(spiky.p_value < 1e-6);

  // Smooth high-dimensional plaintext: D sqrt(chi) below the 1% critical value.
  keystream::BitStream stream(keystream::Seed{13});
  const Eigen::VectorXd smooth = signals::sphere_uniform(stream, 1024, 1.0);
  const long chi = 20000;
  const auto ok = secrecy::gaussianity_check(smooth, chi, keystream::Seed{14});
  CHECK(ok.statistic * std::sqrt(static_cast<double>(chi)) < 1.628);

  // Deviation trends down along the dimension grid.
  std::vector<double> deviation;
  for (const int n : {16, 64, 256, 1024}) {
    keystream::BitStream sstream(keystream::Seed{static_cast<std::uint64_t>(n)});
    const Eigen::VectorXd x = signals::sphere_uniform(sstream, n, 1.0);
    deviation.push_back(
        secrecy::gaussianity_check(x, 50000, keystream::Seed{15}).statistic);
  }
  CHECK(deviation.front() > deviation.back());
  CHECK(deviation[1] <= deviation[0]);
}

TEST_CASE("convergence constant report shape and quantile monotonicity") {
  const std::vector<int> grid{16, 64};
  const std::vector<double> rhos{0.5, 0.1, 0.01};
  const auto report = secrecy::estimate_convergence_constant(
      grid, 10, 100000, rhos, keystream::Seed{31415});

  CHECK(report.deviations.size() == 20);
  for (const auto& point : report.deviations) {
    CHECK(point.deviation >= 0.0);
    CHECK(point.deviation <= 1.0);
  }
  CHECK(report.median_deviation.size() == 2);
  CHECK(report.median_deviation[0] > 0.0);

  // C(rho) non-increasing in rho.
  CHECK(report.c_rho.size() == 3);
  CHECK(report.c_rho[0].second <= report.c_rho[1].second + 1e-12);
  CHECK(report.c_rho[1].second <= report.c_rho[2].second + 1e-12);

  // Small-n deviations carry real signal: the n = 16 median clearly exceeds
  // the n = 64 one at this sample size.
  CHECK(report.median_deviation[0] > report.median_deviation[1]);

  CHECK_THROWS_AS(secrecy::estimate_convergence_constant(
                      std::vector<int>{}, 10, 20000, rhos, keystream::Seed{1}),
                  std::invalid_argument);
}
