#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mccs/keystream.hpp"

namespace mccs::sensing {

using RowMatrixXd =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense +-1 encoding matrix for one frame. Class-u matrices differ from the
/// class-0 matrix only on the union of the flip sets of levels below u.
struct EncodingMatrix {
  int rows = 0;
  int cols = 0;
  int class_level = 0;
  std::uint64_t frame_index = 0;
  RowMatrixXd entries;
};

/// Positions flipped at one class boundary, stored as sorted row-major linear
/// indices. Flip sets of different levels for the same frame are disjoint.
struct FlipSet {
  int level = 0;
  std::vector<std::uint32_t> positions;

  std::int64_t cardinality() const noexcept {
    return static_cast<std::int64_t>(positions.size());
  }
  double density(int m, int n) const noexcept {
    return static_cast<double>(positions.size()) /
           (static_cast<double>(m) * static_cast<double>(n));
  }
};

/// Sparse difference A^(1) - A^(0): entries -2*A^(0) on the flip positions,
/// zero elsewhere.
struct PerturbationMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint32_t> positions;
  std::vector<double> values;  // each +-2

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const;
  RowMatrixXd dense() const;
};

struct MeasurementFrame {
  Eigen::VectorXd y;
  std::uint64_t frame_index = 0;
  bool scaled = false;  // true = 1/sqrt(n) normalisation
};

/// Flip-set cardinality for a density: round(eta * m * n), half away from zero.
std::int64_t flip_cardinality(double eta, int m, int n);

/// Draws `cardinality` distinct positions uniformly over [0, m*n), rejecting
/// duplicates and positions already claimed by lower levels.
FlipSet gen_flipset(keystream::Seed flip_seed, int level, int m, int n,
                    std::int64_t cardinality,
                    const std::vector<std::uint32_t>& forbidden);

/// Class-u encoding matrix for one frame: A^(0) filled row-major from the
/// frame stream of the matrix seed, then sign-flipped at levels 0..u-1 using
/// the frame streams of the corresponding flip seeds. `etas[v]` is the flip
/// density of level v.
EncodingMatrix gen_matrix(const keystream::KeyChain& keys, int u, int m, int n,
                          std::uint64_t frame_index,
                          std::span<const double> etas);

PerturbationMatrix perturbation_of(const EncodingMatrix& a0,
                                   const FlipSet& flips);

MeasurementFrame encode(const EncodingMatrix& a, const Eigen::VectorXd& x,
                        bool scaled);

/// Golden matrix files: binary header (m, n, u, frame_index as 32-bit
/// little-endian) followed by packed sign bits row-major, MSB first within
/// each byte, 1 = -1.
void write_golden(const std::string& path, const EncodingMatrix& a);
EncodingMatrix read_golden(const std::string& path);

}  // namespace mccs::sensing
