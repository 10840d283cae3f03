#pragma once

#include <cstdint>
#include <limits>

namespace ajcir {

// Counter-based pseudo-random stream (Philox-4x32-10).
//
// A stream is fully identified by (master_seed, stream_id): equal pairs
// replay bit-identical sequences, distinct stream_ids index disjoint
// counter blocks. Ensembles derive one stream per path (stream_id = path
// index), so results do not depend on how paths are scheduled onto
// threads.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
      : key0_(static_cast<std::uint32_t>(master_seed)),
        key1_(static_cast<std::uint32_t>(master_seed >> 32)),
        stream_lo_(static_cast<std::uint32_t>(stream_id)),
        stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  std::uint64_t master_seed() const noexcept {
    return (static_cast<std::uint64_t>(key1_) << 32) | key0_;
  }
  std::uint64_t stream_id() const noexcept {
    return (static_cast<std::uint64_t>(stream_hi_) << 32) | stream_lo_;
  }

  // Next 64 random bits.
  std::uint64_t next_u64() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
    std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
    ++counter_;
    std::uint32_t x0 = c0, x1 = c1, x2 = stream_lo_, x3 = stream_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = kMul0 * static_cast<std::uint64_t>(x0);
      const std::uint64_t p1 = kMul1 * static_cast<std::uint64_t>(x2);
      const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t y0 = hi1 ^ x1 ^ k0;
      const std::uint32_t y1 = lo1;
      const std::uint32_t y2 = hi0 ^ x3 ^ k1;
      const std::uint32_t y3 = lo0;
      x0 = y0;
      x1 = y1;
      x2 = y2;
      x3 = y3;
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    spare_ = (static_cast<std::uint64_t>(x2) << 32) | x3;
    have_spare_ = true;
    return (static_cast<std::uint64_t>(x0) << 32) | x1;
  }

  // Uniform draw on the open interval (0,1).
  double uniform() noexcept {
    // 53 significant bits, offset by half an ulp so 0 is never returned.
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard exponential (rate 1).
  double exponential() noexcept;

  // Poisson count with the given mean.
  std::uint64_t poisson(double mean);

  // UniformRandomBitGenerator interface, usable with <random> distributions.
  std::uint64_t operator()() noexcept { return next_u64(); }
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept {
    return std::numeric_limits<std::uint64_t>::max();
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::uint32_t key0_, key1_;
  std::uint32_t stream_lo_, stream_hi_;
  std::uint64_t counter_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace ajcir
