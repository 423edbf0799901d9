#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gwsnake {

inline constexpr const char* kGeneratorName = "xoshiro256**";
inline constexpr const char* kGeneratorVersion = "1.0 (splitmix64 seeding, stream key mixing v1)";

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// Replica i of a run uses stream i. The pair itself is the key, so the map is
// injective; streams are separated by hashing the key into the generator state.
inline SeedSpec derive_stream(std::uint64_t master_seed, std::uint64_t replica_index) {
  return {master_seed, replica_index};
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// xoshiro256** (Blackman and Vigna). Satisfies UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(SeedSpec seed) {
    // Two rounds of splitmix64: one keyed by the master seed, one by the
    // stream index folded into the first output.
    std::uint64_t a = seed.master_seed;
    std::uint64_t key = splitmix64(a);
    std::uint64_t b = seed.stream_index ^ 0xD1B54A32D192ED03ULL;
    key ^= splitmix64(b) * 0xA0761D6478BD642FULL;
    std::uint64_t sm = key;
    for (auto& word : s_) word = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on [0, bound), Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = -bound % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace gwsnake
