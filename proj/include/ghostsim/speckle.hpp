#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ghostsim/image.hpp"

namespace ghostsim {

enum class Distribution : std::uint8_t { uniform01 = 0, binary = 1 };

std::string_view to_string(Distribution dist);
/// Accepts "uniform01" and "binary".
std::optional<Distribution> parse_distribution(std::string_view name);

// Counter-based generator. Pattern `index` of a set keyed by `seed` draws
// pixel p from
//   key  = mix64(seed ^ mix64(index + kStreamSalt))
//   word = mix64(key + (p + 1) * kGolden)
// where mix64 is the SplitMix64 finalizer. uniform01 keeps the top 53 bits
// of `word` as a double in [0, 1); binary keeps the top bit. These formulas
// are frozen: datasets store only the seed and rely on regeneration.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t pattern_stream_key(std::uint64_t seed, std::size_t index) noexcept;
double speckle_value(std::uint64_t stream_key, std::size_t pixel, Distribution dist) noexcept;

/// Seed for batch `bgf_index` derived from a run's base seed.
std::uint64_t derive_batch_seed(std::uint64_t base_seed, std::size_t bgf_index) noexcept;

struct SpecklePattern {
  Image image;
  std::uint64_t seed = 0;
  std::size_t index = 0;
};

/// m illumination patterns of one shape, generated from a single seed and
/// stored contiguously (pattern-major).
class SpeckleSet {
public:
  /// Throws ZeroDimension if any of m, h, w is 0.
  static SpeckleSet generate(std::uint64_t seed, std::size_t m, std::size_t h, std::size_t w,
                             Distribution dist);

  std::uint64_t seed() const noexcept { return seed_; }
  Distribution distribution() const noexcept { return dist_; }
  std::size_t size() const noexcept { return count_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels_per_pattern() const noexcept { return height_ * width_; }

  std::span<const double> pattern_pixels(std::size_t i) const;
  Image pattern_image(std::size_t i) const;
  SpecklePattern pattern(std::size_t i) const;
  /// Pixelwise sum over all m patterns.
  const Image& pattern_sum() const noexcept { return sum_; }

  friend bool operator==(const SpeckleSet& a, const SpeckleSet& b) {
    return a.seed_ == b.seed_ && a.dist_ == b.dist_ && a.count_ == b.count_ &&
           a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

private:
  SpeckleSet() = default;

  std::uint64_t seed_ = 0;
  Distribution dist_ = Distribution::uniform01;
  std::size_t count_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
  Image sum_;
};

SpeckleSet gen_speckle_set(std::uint64_t seed, std::size_t m, std::size_t h, std::size_t w,
                           Distribution dist = Distribution::uniform01);

/// Speckles for batch `bgf_index`: every GroupFrame in one batch reuses this
/// set, different batches get different sets.
SpeckleSet bgf_speckle_policy(std::uint64_t base_seed, std::size_t bgf_index, std::size_t m,
                              std::size_t h, std::size_t w,
                              Distribution dist = Distribution::uniform01);

/// Shared-ownership variants; batches hand one set to many frames.
std::shared_ptr<const SpeckleSet> make_shared_speckles(std::uint64_t seed, std::size_t m,
                                                       std::size_t h, std::size_t w,
                                                       Distribution dist);

}  // namespace ghostsim
