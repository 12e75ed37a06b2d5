#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "mccs/errors.hpp"
#include "mccs/signals.hpp"

using namespace mccs;

TEST_CASE("identity and dct2 bases are orthonormal") {
  const auto id = signals::make_identity_basis(4);
  CHECK(id.d == Eigen::MatrixXd::Identity(4, 4));

  const auto dct = signals::make_dct2_basis(8);
  const Eigen::MatrixXd gram = dct.d.transpose() * dct.d;
  CHECK((gram - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

  for (const int n : {3, 17, 64}) {
    CHECK(signals::orthonormality_defect(signals::make_dct2_basis(n).d) <
          1e-10);
  }
}

TEST_CASE("daubechies4 basis preserves energy") {
  CHECK_THROWS_AS(signals::make_daubechies4_basis(12), std::invalid_argument);
  CHECK_THROWS_AS(signals::make_daubechies4_basis(2), std::invalid_argument);

  for (const int n : {4, 8, 32, 256}) {
    const auto basis = signals::make_daubechies4_basis(n);
    CHECK(signals::orthonormality_defect(basis.d) < 1e-10);
  }

  const auto basis = signals::make_daubechies4_basis(8);
  keystream::BitStream stream(keystream::Seed{5});
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd x = signals::gaussian_vector(stream, 8);
    CHECK(basis.analyze(x).norm() == doctest::Approx(x.norm()).epsilon(1e-12));
  }
}

TEST_CASE("random ONB is orthonormal and seed deterministic") {
  const auto b1 = signals::make_random_onb(32, keystream::Seed{11});
  const auto b2 = signals::make_random_onb(32, keystream::Seed{11});
  const auto b3 = signals::make_random_onb(32, keystream::Seed{12});
  CHECK(signals::orthonormality_defect(b1.d) < 1e-10);
  CHECK(b1.d == b2.d);
  CHECK(b1.d != b3.d);
}

TEST_CASE("basis files load through the orthonormality gate") {
  const auto dir = std::filesystem::temp_directory_path() / "mccs_basis";
  std::filesystem::create_directories(dir);
  const auto good = (dir / "good.csv").string();
  const auto bad = (dir / "bad.csv").string();

  const auto basis = signals::make_random_onb(6, keystream::Seed{3});
  {
    std::ofstream out(good);
    for (int j = 0; j < 6; ++j) {
      for (int l = 0; l < 6; ++l) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", basis.d(j, l));
        out << (l ? "," : "") << buf;
      }
      out << "\n";
    }
  }
  const auto loaded = signals::load_basis_csv(good);
  CHECK((loaded.d - basis.d).cwiseAbs().maxCoeff() == 0.0);

  {
    std::ofstream out(bad);
    out << "1,0\n1,1\n";  // not orthonormal
  }
  CHECK_THROWS_AS(signals::load_basis_csv(bad), std::invalid_argument);
  CHECK_THROWS_AS(signals::load_basis_csv((dir / "missing.csv").string()),
                  IoError);
}

TEST_CASE("sample_signal respects sparsity, energy and support") {
  keystream::BitStream stream(keystream::Seed{21});

  const auto id64 = signals::make_identity_basis(64);
  const auto zero =
      signals::sample_signal({64, 0, signals::CoefficientLaw::gaussian_on_support, 1.0},
                             id64, stream);
  CHECK(zero.x.isZero(0.0));

  const auto dense =
      signals::sample_signal({64, 64, signals::CoefficientLaw::gaussian_on_support, 2.5},
                             id64, stream);
  CHECK(dense.x.squaredNorm() == doctest::Approx(2.5).epsilon(1e-12));

  const auto basis = signals::make_dct2_basis(64);
  const auto sig =
      signals::sample_signal({64, 4, signals::CoefficientLaw::gaussian_on_support, 1.0},
                             basis, stream);
  CHECK(sig.support.size() == 4);
  // The top-4 analysis coefficients recover the generated support.
  const Eigen::VectorXd coeff = basis.analyze(sig.x).cwiseAbs();
  std::vector<int> order(64);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + 4, order.end(),
                    [&](int a, int b) { return coeff[a] > coeff[b]; });
  std::vector<int> top(order.begin(), order.begin() + 4);
  std::sort(top.begin(), top.end());
  CHECK(top == sig.support);

  const auto pm =
      signals::sample_signal({8, 3, signals::CoefficientLaw::uniform_sign_unit, 0.0},
                             signals::make_identity_basis(8), stream);
  for (const int idx : pm.support) {
    CHECK(std::abs(pm.s[idx]) == 1.0);
  }
}

TEST_CASE("estimate_stats on degenerate and sphere-uniform signals") {
  keystream::BitStream stream(keystream::Seed{99});

  Eigen::VectorXd fixed = signals::sphere_uniform(stream, 16, 1.0);
  const auto degenerate =
      signals::estimate_stats([&] { return fixed; }, 16, 100);
  CHECK(degenerate.e_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(degenerate.f_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(degenerate.f_over_e2() == doctest::Approx(1.0).epsilon(1e-12));

  const auto sphere = signals::estimate_stats(
      [&] { return signals::sphere_uniform(stream, 32, 1.0); }, 32, 500);
  CHECK(sphere.e_x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sphere.f_x == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(signals::estimate_stats([&] { return fixed; }, 16, 1),
                  std::invalid_argument);
}

TEST_CASE("estimate_stats recovers the chi-square moment identity") {
  // i.i.d. N(0,1) entries: F/E^2 = 1 + 2/n.
  const int n = 256;
  keystream::BitStream stream(keystream::Seed{512});
  const auto stats = signals::estimate_stats(
      [&] { return signals::gaussian_vector(stream, n); }, n, 20000);
  const double expected = 1.0 + 2.0 / n;
  const double se_ratio = stats.f_stderr / (stats.e_x * stats.e_x);
  CHECK(std::abs(stats.f_over_e2() - expected) <= 3.0 * se_ratio + 1e-4);
  // Jensen bound with Monte Carlo slack.
  CHECK(stats.f_x >= stats.e_x * stats.e_x - 3.0 * stats.f_stderr);
}

TEST_CASE("AR(1) signals approach the f/e^2 = 1 limit as n grows") {
  keystream::BitStream stream(keystream::Seed{888});
  signals::GaussianSampler gauss(stream);
  const double pole = 0.9;
  auto ar1 = [&](int n) {
    Eigen::VectorXd x(n);
    double state = gauss() / std::sqrt(1.0 - pole * pole);
    for (int i = 0; i < n; ++i) {
      x[i] = state;
      state = pole * state + gauss();
    }
    return x;
  };

  std::vector<double> ratios;
  std::vector<double> errs;
  for (const int n : {64, 256, 1024}) {
    const auto stats =
        signals::estimate_stats([&] { return ar1(n); }, n, 4000);
    ratios.push_back(stats.f_over_e2());
    errs.push_back(stats.f_stderr / (stats.e_x * stats.e_x));
  }
  CHECK(ratios[1] <= ratios[0] + errs[0] + errs[1]);
  CHECK(ratios[2] <= ratios[1] + errs[1] + errs[2]);
  CHECK(ratios[2] < ratios[0]);
  CHECK(ratios[2] >= 1.0 - 3.0 * errs[2]);
}

TEST_CASE("ingest_csv windows and errors") {
  const auto dir = std::filesystem::temp_directory_path() / "mccs_ingest";
  std::filesystem::create_directories(dir);

  auto write_samples = [&](const std::string& name, int count) {
    const auto path = (dir / name).string();
    std::ofstream out(path);
    for (int i = 0; i < count; ++i) {
      out << std::sin(0.1 * i) << "\n";
    }
    return path;
  };

  CHECK(signals::ingest_csv(write_samples("a.csv", 1024), 512).size() == 2);
  CHECK(signals::ingest_csv(write_samples("b.csv", 1023), 512).size() == 1);

  const auto path = write_samples("sine.csv", 256);
  const auto windows = signals::ingest_csv(path, 64);
  CHECK(windows.size() == 4);
  for (int w = 0; w < 4; ++w) {
    for (int i = 0; i < 64; ++i) {
      CHECK(windows[w][i] == doctest::Approx(std::sin(0.1 * (64 * w + i))));
    }
  }

  const auto empty = (dir / "empty.csv").string();
  std::ofstream(empty).close();
  CHECK_THROWS_AS(signals::ingest_csv(empty, 8), IoError);
  CHECK_THROWS_AS(signals::ingest_csv((dir / "nope.csv").string(), 8), IoError);

  const auto junk = (dir / "junk.csv").string();
  std::ofstream(junk) << "1.0\nnot-a-number\n";
  CHECK_THROWS_AS(signals::ingest_csv(junk, 1), IoError);
}
