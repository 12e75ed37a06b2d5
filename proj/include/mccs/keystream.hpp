#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mccs::keystream {

inline constexpr std::uint64_t kSplitMixIncrement = 0x9E3779B97F4A7C15ULL;

/// One SplitMix64 step: advances `state` and returns the next output word.
/// The generator is fixed (constants included) so that key files, golden
/// matrices and Monte Carlo runs are bit-exact across platforms.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += kSplitMixIncrement;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(const Seed&, const Seed&) = default;
};

/// Per-frame stream derivation: the stream feeding frame `frame_index` is the
/// SplitMix64 expansion of (seed XOR frame_index). Frame 0 therefore expands
/// the seed itself.
inline Seed frame_seed(Seed base, std::uint64_t frame_index) noexcept {
  return Seed{base.value ^ frame_index};
}

/// Deterministic bit source: the SplitMix64 expansion of one seed, with bits
/// consumed most-significant-first within each 64-bit word. Restarting a
/// stream from its seed replays the identical bit sequence. Single consumer;
/// use distinct seeds for concurrent streams.
class BitStream {
 public:
  explicit BitStream(Seed seed) noexcept : seed_(seed), state_(seed.value) {}

  Seed seed() const noexcept { return seed_; }
  std::uint64_t bits_consumed() const noexcept { return bits_consumed_; }

  int next_bit() noexcept {
    if (bits_left_ == 0) {
      buffer_ = splitmix64(state_);
      bits_left_ = 64;
    }
    const int bit = static_cast<int>(buffer_ >> 63);
    buffer_ <<= 1;
    --bits_left_;
    ++bits_consumed_;
    return bit;
  }

  /// Next 64 bits of the stream as one word (MSB of the word = next bit).
  std::uint64_t next_word() noexcept {
    bits_consumed_ += 64;
    if (bits_left_ == 0) {
      return splitmix64(state_);
    }
    const int keep = bits_left_;
    const std::uint64_t head = buffer_;
    const std::uint64_t fresh = splitmix64(state_);
    buffer_ = fresh << (64 - keep);
    // bits_left_ unchanged: we consumed `keep` old bits plus 64-keep fresh ones.
    return head | (fresh >> keep);
  }

  /// bit 0 -> +1, bit 1 -> -1.
  int draw_sign() noexcept { return next_bit() ? -1 : +1; }

  /// Unbiased uniform integer in [0, bound) by 64-bit rejection sampling:
  /// words >= floor(2^64 / bound) * bound are discarded, the rest reduced
  /// modulo bound.
  std::uint64_t draw_index(std::uint64_t bound) {
    if (bound == 0) {
      throw std::invalid_argument("draw_index: bound must be positive");
    }
    const std::uint64_t remainder = (0 - bound) % bound;  // 2^64 mod bound
    const std::uint64_t accept_max =
        std::numeric_limits<std::uint64_t>::max() - remainder;
    for (;;) {
      const std::uint64_t word = next_word();
      if (word <= accept_max) {
        return word % bound;
      }
    }
  }

  /// Uniform double in (0, 1] built from the top 53 bits of one word.
  double next_unit() noexcept {
    const std::uint64_t mantissa = next_word() >> 11;
    return static_cast<double>(mantissa + 1) * 0x1.0p-53;
  }

 private:
  Seed seed_;
  std::uint64_t state_ = 0;
  std::uint64_t buffer_ = 0;
  int bits_left_ = 0;
  std::uint64_t bits_consumed_ = 0;
};

/// Multiclass key material: Key(A^(0)) plus one flip seed per class boundary,
/// Key(C^(0)) ... Key(C^(w-2)). A chain with w-1 flip seeds serves w classes.
struct KeyChain {
  Seed matrix_seed;
  std::vector<Seed> flip_seeds;

  int class_count() const noexcept {
    return static_cast<int>(flip_seeds.size()) + 1;
  }

  /// Class-u view: matrix seed plus the first u flip seeds. Truncation is the
  /// whole key-distribution mechanism, so it must be an exact prefix.
  KeyChain truncated(int u) const {
    if (u < 0 || u >= class_count()) {
      throw std::invalid_argument("KeyChain::truncated: class out of range");
    }
    KeyChain out;
    out.matrix_seed = matrix_seed;
    out.flip_seeds.assign(flip_seeds.begin(), flip_seeds.begin() + u);
    return out;
  }
};

/// Derives the w seeds of a key chain from one master seed by expanding it:
/// word 0 becomes the matrix seed, words 1..w-1 the flip seeds.
KeyChain make_keychain(int class_count, Seed master);

/// Deterministic per-trial seeds for Monte Carlo loops: the first `count`
/// words of the master expansion. Trials seeded this way may run on any
/// number of threads without changing results.
std::vector<Seed> derive_seeds(Seed master, std::size_t count);

/// Key file format: JSON {"w": int, "matrix_seed": "<u64>", "flip_seeds":
/// ["<u64>", ...]} with seeds as decimal strings. Truncating the list yields
/// the lower-class key file.
void save_keychain(const std::string& path, const KeyChain& keys);
KeyChain load_keychain(const std::string& path);

}  // namespace mccs::keystream
