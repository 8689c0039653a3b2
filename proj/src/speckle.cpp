#include "ghostsim/speckle.hpp"

#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/parallel.hpp"

namespace ghostsim {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0x5851F42D4C957F2DULL;
constexpr std::uint64_t kBatchSalt = 0xD1B54A32D192ED03ULL;

}  // namespace

std::string_view to_string(Distribution dist) {
  switch (dist) {
    case Distribution::uniform01: return "uniform01";
    case Distribution::binary: return "binary";
  }
  return "unknown";
}

std::optional<Distribution> parse_distribution(std::string_view name) {
  if (name == "uniform01") return Distribution::uniform01;
  if (name == "binary") return Distribution::binary;
  return std::nullopt;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t pattern_stream_key(std::uint64_t seed, std::size_t index) noexcept {
  return mix64(seed ^ mix64(std::uint64_t(index) + kStreamSalt));
}

double speckle_value(std::uint64_t stream_key, std::size_t pixel, Distribution dist) noexcept {
  const std::uint64_t word = mix64(stream_key + (std::uint64_t(pixel) + 1) * kGolden);
  if (dist == Distribution::binary) return double(word >> 63);
  return double(word >> 11) * 0x1.0p-53;
}

std::uint64_t derive_batch_seed(std::uint64_t base_seed, std::size_t bgf_index) noexcept {
  return mix64(mix64(base_seed) ^ ((std::uint64_t(bgf_index) + 1) * kBatchSalt));
}

SpeckleSet SpeckleSet::generate(std::uint64_t seed, std::size_t m, std::size_t h, std::size_t w,
                                Distribution dist) {
  if (m == 0 || h == 0 || w == 0) {
    throw Error(ErrorCode::ZeroDimension, "speckle set needs m, h, w >= 1 (got " +
                                              std::to_string(m) + ", " + std::to_string(h) +
                                              ", " + std::to_string(w) + ")");
  }
  SpeckleSet set;
  set.seed_ = seed;
  set.dist_ = dist;
  set.count_ = m;
  set.height_ = h;
  set.width_ = w;
  const std::size_t n = h * w;
  set.data_.resize(m * n);
  parallel_for(m, [&](std::size_t i) {
    const std::uint64_t key = pattern_stream_key(seed, i);
    double* out = set.data_.data() + i * n;
    for (std::size_t p = 0; p < n; ++p) out[p] = speckle_value(key, p, dist);
  });
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double* src = set.data_.data() + i * n;
    for (std::size_t p = 0; p < n; ++p) total[p] += src[p];
  }
  set.sum_ = Image(h, w, std::move(total));
  return set;
}

std::span<const double> SpeckleSet::pattern_pixels(std::size_t i) const {
  if (i >= count_) {
    throw Error(ErrorCode::IndexOutOfRange,
                "pattern " + std::to_string(i) + " of a set of " + std::to_string(count_));
  }
  const std::size_t n = pixels_per_pattern();
  return {data_.data() + i * n, n};
}

Image SpeckleSet::pattern_image(std::size_t i) const {
  const auto px = pattern_pixels(i);
  return Image(height_, width_, std::vector<double>(px.begin(), px.end()));
}

SpecklePattern SpeckleSet::pattern(std::size_t i) const {
  return SpecklePattern{pattern_image(i), seed_, i};
}

SpeckleSet gen_speckle_set(std::uint64_t seed, std::size_t m, std::size_t h, std::size_t w,
                           Distribution dist) {
  return SpeckleSet::generate(seed, m, h, w, dist);
}

SpeckleSet bgf_speckle_policy(std::uint64_t base_seed, std::size_t bgf_index, std::size_t m,
                              std::size_t h, std::size_t w, Distribution dist) {
  return SpeckleSet::generate(derive_batch_seed(base_seed, bgf_index), m, h, w, dist);
}

std::shared_ptr<const SpeckleSet> make_shared_speckles(std::uint64_t seed, std::size_t m,
                                                       std::size_t h, std::size_t w,
                                                       Distribution dist) {
  return std::make_shared<const SpeckleSet>(SpeckleSet::generate(seed, m, h, w, dist));
}

}  // namespace ghostsim
