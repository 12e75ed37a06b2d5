#include "mccs/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mccs/errors.hpp"

namespace mccs::signals {

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "identity") return BasisKind::identity;
  if (name == "dct2") return BasisKind::dct2;
  if (name == "daubechies4") return BasisKind::daubechies4;
  if (name == "random-onb") return BasisKind::random_onb;
  if (name == "file") return BasisKind::file_loaded;
  throw std::invalid_argument("unknown basis kind: " + name);
}

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::identity: return "identity";
    case BasisKind::dct2: return "dct2";
    case BasisKind::daubechies4: return "daubechies4";
    case BasisKind::random_onb: return "random-onb";
    case BasisKind::file_loaded: return "file";
  }
  return "?";
}

double orthonormality_defect(const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd gram = d.transpose() * d;
  const int n = static_cast<int>(d.cols());
  return (gram - Eigen::MatrixXd::Identity(n, n)).norm() /
         std::sqrt(static_cast<double>(n));
}

OrthonormalBasis make_identity_basis(int n) {
  if (n < 1) throw std::invalid_argument("basis dimension must be >= 1");
  return {BasisKind::identity, n, Eigen::MatrixXd::Identity(n, n)};
}

OrthonormalBasis make_dct2_basis(int n) {
  if (n < 1) throw std::invalid_argument("basis dimension must be >= 1");
  Eigen::MatrixXd d(n, n);
  const double c0 = std::sqrt(1.0 / n);
  const double c = std::sqrt(2.0 / n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      const double angle =
          std::numbers::pi * (2.0 * j + 1.0) * l / (2.0 * n);
      d(j, l) = (l == 0 ? c0 : c) * std::cos(angle);
    }
  }
  return {BasisKind::dct2, n, std::move(d)};
}

OrthonormalBasis make_daubechies4_basis(int n) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw std::invalid_argument(
        "daubechies4 basis requires n a power of two >= 4");
  }
  const double s3 = std::sqrt(3.0);
  const double norm = 4.0 * std::numbers::sqrt2;
  const double h[4] = {(1 + s3) / norm, (3 + s3) / norm, (3 - s3) / norm,
                       (1 - s3) / norm};
  const double g[4] = {h[3], -h[2], h[1], -h[0]};

  // Full analysis transform: cascade the periodic filter pair on the
  // approximation coefficients down to length 1.
  Eigen::MatrixXd analysis = Eigen::MatrixXd::Identity(n, n);
  for (int len = n; len >= 2; len /= 2) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(len, len);
    const int half = len / 2;
    for (int i = 0; i < half; ++i) {
      for (int t = 0; t < 4; ++t) {
        const int col = (2 * i + t) % len;
        block(i, col) += h[t];
        block(half + i, col) += g[t];
      }
    }
    const Eigen::MatrixXd top = analysis.topRows(len);
    analysis.topRows(len) = block * top;
  }
  OrthonormalBasis basis;
  basis.kind = BasisKind::daubechies4;
  basis.n = n;
  basis.d = analysis.transpose();  // synthesis = inverse of analysis
  return basis;
}

OrthonormalBasis make_random_onb(int n, keystream::Seed seed) {
  if (n < 1) throw std::invalid_argument("basis dimension must be >= 1");
  keystream::BitStream stream(seed);
  GaussianSampler gauss(stream);
  Eigen::MatrixXd raw(n, n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) {
      raw(j, l) = gauss();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int l = 0; l < n; ++l) {
    if (r(l, l) < 0) {
      q.col(l) = -q.col(l);
    }
  }
  return {BasisKind::random_onb, n, std::move(q)};
}

OrthonormalBasis load_basis_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open basis file: " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw IoError("basis file " + path + ": bad number '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n == 0) throw IoError("basis file is empty: " + path);
  Eigen::MatrixXd d(n, n);
  for (int j = 0; j < n; ++j) {
    if (static_cast<int>(rows[j].size()) != n) {
      throw IoError("basis file is not square: " + path);
    }
    for (int l = 0; l < n; ++l) d(j, l) = rows[j][l];
  }
  if (orthonormality_defect(d) > 1e-10) {
    throw std::invalid_argument("basis file fails orthonormality check: " +
                                path);
  }
  return {BasisKind::file_loaded, n, std::move(d)};
}

OrthonormalBasis make_basis(BasisKind kind, int n, keystream::Seed seed,
                            const std::string& path) {
  switch (kind) {
    case BasisKind::identity: return make_identity_basis(n);
    case BasisKind::dct2: return make_dct2_basis(n);
    case BasisKind::daubechies4: return make_daubechies4_basis(n);
    case BasisKind::random_onb: return make_random_onb(n, seed);
    case BasisKind::file_loaded: return load_basis_csv(path);
  }
  throw std::invalid_argument("make_basis: unknown kind");
}

double GaussianSampler::operator()() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = stream_->next_unit();
  const double u2 = stream_->next_unit();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

Eigen::VectorXd gaussian_vector(keystream::BitStream& stream, int n) {
  GaussianSampler gauss(stream);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = gauss();
  return v;
}

Eigen::VectorXd sphere_uniform(keystream::BitStream& stream, int n,
                               double energy) {
  Eigen::VectorXd v = gaussian_vector(stream, n);
  double norm = v.norm();
  while (norm == 0.0) {  // probability ~0, but keep the contract total
    v = gaussian_vector(stream, n);
    norm = v.norm();
  }
  return v * (std::sqrt(energy) / norm);
}

SampledSignal sample_signal(const SignalModel& model,
                            const OrthonormalBasis& basis,
                            keystream::BitStream& stream) {
  if (model.n != basis.n) {
    throw std::invalid_argument("sample_signal: model/basis dimension mismatch");
  }
  if (model.k < 0 || model.k > model.n) {
    throw std::invalid_argument("sample_signal: sparsity k must be in [0, n]");
  }
  if (!(model.energy >= 0.0)) {
    throw std::invalid_argument("sample_signal: energy must be >= 0");
  }

  SampledSignal out;
  out.s = Eigen::VectorXd::Zero(model.n);
  out.support.reserve(model.k);
  std::vector<bool> used(model.n, false);
  while (static_cast<int>(out.support.size()) < model.k) {
    const auto idx = static_cast<int>(
        stream.draw_index(static_cast<std::uint64_t>(model.n)));
    if (!used[idx]) {
      used[idx] = true;
      out.support.push_back(idx);
    }
  }
  std::sort(out.support.begin(), out.support.end());

  GaussianSampler gauss(stream);
  for (const int idx : out.support) {
    out.s[idx] = model.law == CoefficientLaw::gaussian_on_support
                     ? gauss()
                     : static_cast<double>(stream.draw_sign());
  }

  if (model.energy > 0.0 && out.s.norm() > 0.0) {
    out.s *= std::sqrt(model.energy) / out.s.norm();
  }
  out.x = basis.synthesize(out.s);
  return out;
}

SignalStats estimate_stats(const std::function<Eigen::VectorXd()>& sampler,
                           int n, long trials) {
  if (trials < 2) {
    throw std::invalid_argument("estimate_stats: need at least 2 trials");
  }
  double sum_e = 0, sum_e2 = 0;
  double sum_f = 0, sum_f2 = 0;
  double sum_g = 0, sum_g2 = 0;
  for (long t = 0; t < trials; ++t) {
    const Eigen::VectorXd x = sampler();
    const double energy = x.squaredNorm();
    const double f = energy * energy;
    const double fourth = x.array().square().square().sum();
    sum_e += energy;
    sum_e2 += f;
    sum_f += f;
    sum_f2 += f * f;
    sum_g += fourth;
    sum_g2 += fourth * fourth;
  }
  const double inv = 1.0 / static_cast<double>(trials);
  SignalStats stats;
  stats.trials = trials;
  stats.e_x = sum_e * inv;
  stats.f_x = sum_f * inv;
  stats.g_x = sum_g * inv;
  stats.w_x = stats.e_x / n;
  auto stderr_of = [&](double sum_sq, double mean) {
    const double var = std::max(0.0, sum_sq * inv - mean * mean);
    return std::sqrt(var * inv);
  };
  stats.e_stderr = stderr_of(sum_e2, stats.e_x);
  stats.f_stderr = stderr_of(sum_f2, stats.f_x);
  stats.g_stderr = stderr_of(sum_g2, stats.g_x);
  return stats;
}

std::vector<Eigen::VectorXd> ingest_csv(const std::string& path, int n) {
  if (n < 1) throw std::invalid_argument("ingest_csv: window length must be >= 1");
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open signal file: " + path);
  }
  std::vector<double> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    try {
      samples.push_back(std::stod(line));
    } catch (const std::logic_error&) {
      throw IoError("signal file " + path + ": bad sample '" + line + "'");
    }
  }
  if (samples.empty()) {
    throw IoError("signal file is empty: " + path);
  }
  std::vector<Eigen::VectorXd> windows;
  const std::size_t count = samples.size() / static_cast<std::size_t>(n);
  windows.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    Eigen::VectorXd window(n);
    for (int i = 0; i < n; ++i) {
      window[i] = samples[w * n + i];
    }
    windows.push_back(std::move(window));
  }
  return windows;
}

}  // namespace mccs::signals
