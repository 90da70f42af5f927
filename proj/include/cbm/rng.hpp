#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace cbm {

namespace detail {

// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Increment derivation from SplittableRandom: odd, with enough bit transitions.
constexpr std::uint64_t mix_gamma(std::uint64_t z) noexcept {
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
  z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  const int transitions = std::popcount(z ^ (z >> 1));
  return transitions < 24 ? z ^ 0xAAAAAAAAAAAAAAAAULL : z;
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace detail

/*!
 * Counter-based 64-bit stream keyed by (master seed, grid index, replication
 * index).
 *
 * Draw n of a stream is mix64(origin + n * increment), so a stream is a plain
 * value: copying it forks an identical sequence, and no state is shared
 * between streams. Both the origin and the (odd) increment are hashed from the
 * key, so distinct keys walk distinct Weyl sequences.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() noexcept : RngStream(0, 0, 0) {}

  RngStream(std::uint64_t master_seed, std::uint64_t grid_index,
            std::uint64_t replication_index) noexcept
      : master_seed_(master_seed),
        grid_index_(grid_index),
        replication_index_(replication_index) {
    std::uint64_t h = detail::mix64(master_seed + detail::kGolden);
    h = detail::mix64(h ^ (grid_index + 0x632BE59BD9B4E019ULL));
    h = detail::mix64(h ^ (replication_index + 0x8CB92BA72F3D8DD7ULL));
    origin_ = h;
    increment_ = detail::mix_gamma(detail::mix64(h + detail::kGolden));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(origin_ + counter_ * increment_);
  }

  /// Uniform double on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (consumes two draws, no cached spare).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent stream keyed by this stream's key and `lane`, starting fresh.
  RngStream lane(std::uint64_t lane) const noexcept {
    RngStream out = *this;
    out.origin_ = detail::mix64(origin_ ^ detail::mix64(lane + 0x5851F42D4C957F2DULL));
    out.increment_ = detail::mix_gamma(detail::mix64(out.origin_ + detail::kGolden));
    out.counter_ = 0;
    return out;
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t grid_index() const noexcept { return grid_index_; }
  std::uint64_t replication_index() const noexcept {
    return replication_index_;
  }
  std::uint64_t draws() const noexcept { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t master_seed_;
  std::uint64_t grid_index_;
  std::uint64_t replication_index_;
  std::uint64_t origin_ = 0;
  std::uint64_t increment_ = 1;
  std::uint64_t counter_ = 0;
};

/// Stream for replication `replication_index` at sweep point `grid_index`.
inline RngStream derive_stream(std::uint64_t master_seed,
                               std::uint64_t grid_index,
                               std::uint64_t replication_index) noexcept {
  return RngStream(master_seed, grid_index, replication_index);
}

// Grid indices reserved for the training pipeline, far above any sweep grid.
inline constexpr std::uint64_t kDataStreamIndex = ~0ULL;
inline constexpr std::uint64_t kSplitStreamIndex = ~0ULL - 1;
inline constexpr std::uint64_t kInitStreamIndex = ~0ULL - 2;

}  // namespace cbm
