#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mccs/keystream.hpp"

namespace mccs::signals {

enum class BasisKind { identity, dct2, daubechies4, random_onb, file_loaded };

BasisKind basis_kind_from_string(const std::string& name);
std::string to_string(BasisKind kind);

/// Orthonormal synthesis basis: x = D s with D^T D = I. Always materialised
/// as a dense matrix; desk-scale dimensions keep this cheap.
struct OrthonormalBasis {
  BasisKind kind = BasisKind::identity;
  int n = 0;
  Eigen::MatrixXd d;

  Eigen::VectorXd synthesize(const Eigen::VectorXd& s) const { return d * s; }
  Eigen::VectorXd analyze(const Eigen::VectorXd& x) const {
    return d.transpose() * x;
  }
};

/// ||D^T D - I||_F / ||I||_F, the orthonormality defect checked on all bases.
double orthonormality_defect(const Eigen::MatrixXd& d);

OrthonormalBasis make_identity_basis(int n);
OrthonormalBasis make_dct2_basis(int n);
/// Full 1-D orthonormal wavelet transform with the four-tap Daubechies
/// analysis filter, cascaded to depth log2(n). Requires n a power of two >= 4.
OrthonormalBasis make_daubechies4_basis(int n);
/// Orthonormalises an i.i.d. Gaussian matrix drawn from the keystream.
OrthonormalBasis make_random_onb(int n, keystream::Seed seed);
/// Loads an n x n CSV matrix and rejects it if the orthonormality defect
/// exceeds 1e-10.
OrthonormalBasis load_basis_csv(const std::string& path);

/// Dispatch used by the CLI: seed_or_path is a seed for random-onb and a file
/// path for file-loaded, ignored otherwise.
OrthonormalBasis make_basis(BasisKind kind, int n, keystream::Seed seed = {},
                            const std::string& path = {});

enum class CoefficientLaw { gaussian_on_support, uniform_sign_unit };

/// Sparse synthesis model: s has exactly k nonzeros on a uniform random
/// support; x = D s is rescaled to energy `energy` when energy > 0.
struct SignalModel {
  int n = 0;
  int k = 0;
  CoefficientLaw law = CoefficientLaw::gaussian_on_support;
  double energy = 1.0;
};

struct SampledSignal {
  Eigen::VectorXd x;
  Eigen::VectorXd s;
  std::vector<int> support;
};

SampledSignal sample_signal(const SignalModel& model,
                            const OrthonormalBasis& basis,
                            keystream::BitStream& stream);

/// Moment statistics of a signal distribution, estimated by Monte Carlo:
/// e_x = E[sum X^2], f_x = E[(sum X^2)^2], g_x = E[sum X^4], w_x = e_x / n.
struct SignalStats {
  double e_x = 0;
  double f_x = 0;
  double g_x = 0;
  double w_x = 0;
  double e_stderr = 0;
  double f_stderr = 0;
  double g_stderr = 0;
  long trials = 0;

  double f_over_e2() const { return f_x / (e_x * e_x); }
};

SignalStats estimate_stats(const std::function<Eigen::VectorXd()>& sampler,
                           int n, long trials);

/// Standard normal deviate by Box-Muller on stream words (spare cached).
class GaussianSampler {
 public:
  explicit GaussianSampler(keystream::BitStream& stream) : stream_(&stream) {}
  double operator()();

 private:
  keystream::BitStream* stream_;
  double spare_ = 0;
  bool have_spare_ = false;
};

Eigen::VectorXd gaussian_vector(keystream::BitStream& stream, int n);
/// Uniform on the sphere of radius sqrt(energy).
Eigen::VectorXd sphere_uniform(keystream::BitStream& stream, int n,
                               double energy = 1.0);

/// Splits a single-column CSV of samples into consecutive non-overlapping
/// windows of length n; an incomplete tail is discarded.
std::vector<Eigen::VectorXd> ingest_csv(const std::string& path, int n);

}  // namespace mccs::signals
