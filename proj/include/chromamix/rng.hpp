#ifndef CHROMAMIX_RNG_HPP
#define CHROMAMIX_RNG_HPP

#include <array>
#include <cstdint>

namespace chromamix {

// Counter-based generator (philox4x32-10). Every random decision in the
// toolkit flows through one of these, so a (seed, stream) pair pins an
// entire run bit-for-bit regardless of thread count or platform.
//
// Layout: key = (seed lo, seed hi), counter = (pos lo, pos hi, stream lo,
// stream hi). Each block yields four 32-bit words consumed in order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  }

  // Child stream for a named sub-task. Mixing keeps sibling streams
  // statistically independent of the parent and of each other.
  RandomStream derive(std::uint64_t substream) const {
    return RandomStream(seed_, splitmix(stream_ * 0x9E3779B97F4A7C15ull + substream + 1));
  }

  std::uint32_t next_u32() {
    if (buf_pos_ == 4) refill();
    return buf_[buf_pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    std::uint64_t hi = next_u32();
    return lo | (hi << 32);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased uniform integer in [0, n); n >= 1.
  std::uint64_t uniform_index(std::uint64_t n) {
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // One keyed block; exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * ctr[0];
      std::uint64_t p1 = 0xCD9E8D57ull * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
      if (round < 9) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
    }
    return ctr;
  }

 private:
  void refill() {
    buf_ = block(ctr_, key_);
    buf_pos_ = 0;
    if (++ctr_[0] == 0) ++ctr_[1]; // 64-bit position, never touches the stream words
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int buf_pos_ = 4;
};

} // namespace chromamix

#endif
