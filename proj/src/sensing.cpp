#include "mccs/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mccs/errors.hpp"

namespace mccs::sensing {

Eigen::VectorXd PerturbationMatrix::apply(const Eigen::VectorXd& v) const {
  if (v.size() != cols) {
    throw std::invalid_argument("PerturbationMatrix::apply: length mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rows);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::uint32_t p = positions[i];
    out[p / cols] += values[i] * v[p % cols];
  }
  return out;
}

Eigen::VectorXd PerturbationMatrix::apply_transpose(
    const Eigen::VectorXd& v) const {
  if (v.size() != rows) {
    throw std::invalid_argument(
        "PerturbationMatrix::apply_transpose: length mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cols);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const std::uint32_t p = positions[i];
    out[p % cols] += values[i] * v[p / cols];
  }
  return out;
}

RowMatrixXd PerturbationMatrix::dense() const {
  RowMatrixXd out = RowMatrixXd::Zero(rows, cols);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.data()[positions[i]] = values[i];
  }
  return out;
}

std::int64_t flip_cardinality(double eta, int m, int n) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("flip_cardinality: eta must be >= 0");
  }
  return std::llround(eta * static_cast<double>(m) * static_cast<double>(n));
}

FlipSet gen_flipset(keystream::Seed flip_seed, int level, int m, int n,
                    std::int64_t cardinality,
                    const std::vector<std::uint32_t>& forbidden) {
  if (m < 1 || n < 1) {
    throw std::invalid_argument("gen_flipset: matrix dimensions must be >= 1");
  }
  const std::int64_t total = static_cast<std::int64_t>(m) * n;
  if (cardinality < 0 ||
      cardinality + static_cast<std::int64_t>(forbidden.size()) > total) {
    throw std::invalid_argument("gen_flipset: infeasible cardinality");
  }

  std::vector<bool> taken(static_cast<std::size_t>(total), false);
  for (const std::uint32_t p : forbidden) {
    if (p >= total) {
      throw std::invalid_argument("gen_flipset: forbidden position out of range");
    }
    taken[p] = true;
  }

  FlipSet out;
  out.level = level;
  out.positions.reserve(static_cast<std::size_t>(cardinality));
  keystream::BitStream stream(flip_seed);
  while (static_cast<std::int64_t>(out.positions.size()) < cardinality) {
    const auto idx = static_cast<std::uint32_t>(
        stream.draw_index(static_cast<std::uint64_t>(total)));
    if (!taken[idx]) {
      taken[idx] = true;
      out.positions.push_back(idx);
    }
  }
  std::sort(out.positions.begin(), out.positions.end());
  return out;
}

EncodingMatrix gen_matrix(const keystream::KeyChain& keys, int u, int m, int n,
                          std::uint64_t frame_index,
                          std::span<const double> etas) {
  if (u < 0 || u >= keys.class_count()) {
    throw std::invalid_argument("gen_matrix: key deficit for class " +
                                std::to_string(u));
  }
  if (static_cast<int>(etas.size()) < u) {
    throw std::invalid_argument("gen_matrix: flip density list shorter than class level");
  }
  if (m < 1 || n < 1) {
    throw std::invalid_argument("gen_matrix: matrix dimensions must be >= 1");
  }

  EncodingMatrix a;
  a.rows = m;
  a.cols = n;
  a.class_level = u;
  a.frame_index = frame_index;
  a.entries.resize(m, n);

  keystream::BitStream stream(keystream::frame_seed(keys.matrix_seed, frame_index));
  double* data = a.entries.data();
  const std::int64_t total = static_cast<std::int64_t>(m) * n;
  for (std::int64_t i = 0; i < total; ++i) {
    data[i] = static_cast<double>(stream.draw_sign());
  }

  std::vector<std::uint32_t> forbidden;
  for (int v = 0; v < u; ++v) {
    const std::int64_t c = flip_cardinality(etas[v], m, n);
    const FlipSet flips =
        gen_flipset(keystream::frame_seed(keys.flip_seeds[v], frame_index), v,
                    m, n, c, forbidden);
    for (const std::uint32_t p : flips.positions) {
      data[p] = -data[p];
    }
    std::vector<std::uint32_t> merged;
    merged.reserve(forbidden.size() + flips.positions.size());
    std::merge(forbidden.begin(), forbidden.end(), flips.positions.begin(),
               flips.positions.end(), std::back_inserter(merged));
    forbidden = std::move(merged);
  }
  return a;
}

PerturbationMatrix perturbation_of(const EncodingMatrix& a0,
                                   const FlipSet& flips) {
  const std::int64_t total = static_cast<std::int64_t>(a0.rows) * a0.cols;
  PerturbationMatrix da;
  da.rows = a0.rows;
  da.cols = a0.cols;
  da.positions = flips.positions;
  da.values.reserve(flips.positions.size());
  for (const std::uint32_t p : flips.positions) {
    if (p >= total) {
      throw std::invalid_argument("perturbation_of: flip position outside matrix");
    }
    da.values.push_back(-2.0 * a0.entries.data()[p]);
  }
  return da;
}

MeasurementFrame encode(const EncodingMatrix& a, const Eigen::VectorXd& x,
                        bool scaled) {
  if (x.size() != a.cols) {
    throw std::invalid_argument("encode: plaintext length mismatch");
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("encode: plaintext has non-finite entries");
  }
  MeasurementFrame frame;
  frame.frame_index = a.frame_index;
  frame.scaled = scaled;
  frame.y = a.entries * x;
  if (scaled) {
    frame.y /= std::sqrt(static_cast<double>(a.cols));
  }
  return frame;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                        static_cast<unsigned char>((v >> 8) & 0xFF),
                        static_cast<unsigned char>((v >> 16) & 0xFF),
                        static_cast<unsigned char>((v >> 24) & 0xFF)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_golden(const std::string& path, const EncodingMatrix& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open golden file for writing: " + path);
  }
  put_u32(out, static_cast<std::uint32_t>(a.rows));
  put_u32(out, static_cast<std::uint32_t>(a.cols));
  put_u32(out, static_cast<std::uint32_t>(a.class_level));
  put_u32(out, static_cast<std::uint32_t>(a.frame_index));

  const std::int64_t total = static_cast<std::int64_t>(a.rows) * a.cols;
  const double* data = a.entries.data();
  unsigned char byte = 0;
  int filled = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    byte = static_cast<unsigned char>(byte << 1);
    if (data[i] < 0) {
      byte |= 1;  // 1 = -1
    }
    if (++filled == 8) {
      out.put(static_cast<char>(byte));
      byte = 0;
      filled = 0;
    }
  }
  if (filled > 0) {
    byte = static_cast<unsigned char>(byte << (8 - filled));
    out.put(static_cast<char>(byte));
  }
  if (!out) {
    throw IoError("failed writing golden file: " + path);
  }
}

EncodingMatrix read_golden(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open golden file: " + path);
  }
  EncodingMatrix a;
  a.rows = static_cast<int>(get_u32(in));
  a.cols = static_cast<int>(get_u32(in));
  a.class_level = static_cast<int>(get_u32(in));
  a.frame_index = get_u32(in);
  if (!in || a.rows < 1 || a.cols < 1) {
    throw IoError("malformed golden file header: " + path);
  }
  a.entries.resize(a.rows, a.cols);
  const std::int64_t total = static_cast<std::int64_t>(a.rows) * a.cols;
  double* data = a.entries.data();
  int avail = 0;
  unsigned char byte = 0;
  for (std::int64_t i = 0; i < total; ++i) {
    if (avail == 0) {
      int c = in.get();
      if (c == EOF) {
        throw IoError("golden file truncated: " + path);
      }
      byte = static_cast<unsigned char>(c);
      avail = 8;
    }
    data[i] = (byte & 0x80) ? -1.0 : 1.0;
    byte = static_cast<unsigned char>(byte << 1);
    --avail;
  }
  return a;
}

}  // namespace mccs::sensing
