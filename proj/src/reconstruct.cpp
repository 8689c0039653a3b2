#include "ghostsim/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "batch_linalg.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/kernels.hpp"

namespace ghostsim {
namespace {

void require_samples(std::size_t patterns, std::size_t buckets) {
  if (patterns != buckets) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(buckets) + " buckets for " +
                                               std::to_string(patterns) + " patterns");
  }
  if (buckets < 2) {
    throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  }
}

// Running sums over samples; shared by gi() and gi_progressive() so prefix
// results are bit-identical to full reconstructions of truncated input.
class CovarianceAccumulator {
public:
  CovarianceAccumulator(std::size_t h, std::size_t w)
      : h_(h), w_(w), product_(h * w, 0.0), pattern_(h * w, 0.0) {}

  void add(double bucket, const double* pattern) {
    const std::size_t n = product_.size();
    for (std::size_t p = 0; p < n; ++p) {
      product_[p] += bucket * pattern[p];
      pattern_[p] += pattern[p];
    }
    bucket_sum_ += bucket;
    ++count_;
  }

  GhostImage result() const {
    const double inv = 1.0 / double(count_);
    const double bucket_mean = bucket_sum_ * inv;
    std::vector<double> out(product_.size());
    for (std::size_t p = 0; p < out.size(); ++p) {
      out[p] = product_[p] * inv - bucket_mean * (pattern_[p] * inv);
    }
    return GhostImage{Image(h_, w_, std::move(out)), count_, false};
  }

private:
  std::size_t h_, w_;
  std::vector<double> product_;
  std::vector<double> pattern_;
  double bucket_sum_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace

GhostImage GhostImage::normalized_copy() const {
  return GhostImage{normalize_minmax(image), m_used, true};
}

GhostImage gi(const SpeckleSet& speckles, const BucketSequence& buckets) {
  require_samples(speckles.size(), buckets.size());
  CovarianceAccumulator acc(speckles.height(), speckles.width());
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    acc.add(buckets[i], speckles.pattern_pixels(i).data());
  }
  return acc.result();
}

std::vector<GhostImage> gi_progressive(const SpeckleSet& speckles, const BucketSequence& buckets,
                                       const std::vector<std::size_t>& checkpoints) {
  require_samples(speckles.size(), buckets.size());
  if (checkpoints.empty()) throw Error(ErrorCode::BadCheckpoints, "no checkpoints given");
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    const std::size_t c = checkpoints[k];
    if (c < 2 || c > buckets.size() || (k > 0 && c <= checkpoints[k - 1])) {
      throw Error(ErrorCode::BadCheckpoints,
                  "checkpoints must ascend strictly within [2, " +
                      std::to_string(buckets.size()) + "]");
    }
  }
  std::vector<GhostImage> out;
  out.reserve(checkpoints.size());
  CovarianceAccumulator acc(speckles.height(), speckles.width());
  std::size_t next = 0;
  for (std::size_t i = 0; i < buckets.size() && next < checkpoints.size(); ++i) {
    acc.add(buckets[i], speckles.pattern_pixels(i).data());
    if (i + 1 == checkpoints[next]) {
      out.push_back(acc.result());
      ++next;
    }
  }
  return out;
}

void check_gf_consistency(const GroupFrame& gf, const SpeckleSet& regenerated) {
  if (!gf.has_stored_planes()) return;
  if (regenerated.size() != gf.size() || regenerated.height() != gf.height() ||
      regenerated.width() != gf.width()) {
    throw Error(ErrorCode::CorruptGF, "regenerated speckle set does not match the frame shape");
  }
  const auto& planes = gf.stored_planes();
  for (std::size_t i = 0; i < gf.size(); ++i) {
    const double s = gf.buckets()[i];
    const auto pattern = regenerated.pattern_pixels(i);
    const auto plane = planes[i].pixels();
    double scale = 0.0;
    for (std::size_t p = 0; p < plane.size(); ++p) scale = std::max(scale, std::abs(s * pattern[p]));
    const double floor = 1e-300 + kPlaneTolerance * scale * 1e-3;
    for (std::size_t p = 0; p < plane.size(); ++p) {
      const double expected = s * pattern[p];
      const double err = std::abs(plane[p] - expected);
      if (err > kPlaneTolerance * std::abs(expected) + floor || !std::isfinite(plane[p])) {
        throw Error(ErrorCode::CorruptGF,
                    "plane " + std::to_string(i) + " pixel " + std::to_string(p) +
                        " disagrees with bucket * pattern (" + std::to_string(plane[p]) +
                        " vs " + std::to_string(expected) + ")");
      }
    }
  }
}

GhostImage gi_from_gf(const GroupFrame& gf) {
  if (gf.size() < 2) throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  const std::size_t n = gf.height() * gf.width();
  std::vector<double> plane_mean(n, 0.0);
  std::vector<double> pattern_mean(n, 0.0);

  if (gf.seed_regenerable()) {
    const SpeckleSet speckles =
        gen_speckle_set(gf.speckle_seed(), gf.size(), gf.height(), gf.width(), gf.distribution());
    check_gf_consistency(gf, speckles);
    for (std::size_t i = 0; i < gf.size(); ++i) {
      const Image plane = gf.plane(i);
      detail::accumulate_scaled(plane_mean.data(), 1.0, plane.pixels().data(), n);
      detail::accumulate_scaled(pattern_mean.data(), 1.0, speckles.pattern_pixels(i).data(), n);
    }
  } else {
    for (std::size_t i = 0; i < gf.size(); ++i) {
      const double s = gf.buckets()[i];
      const auto plane = gf.stored_planes()[i].pixels();
      if (s == 0.0 || !std::isfinite(s)) {
        throw Error(ErrorCode::CorruptGF, "bucket " + std::to_string(i) +
                                              " is zero; its pattern cannot be recovered");
      }
      detail::accumulate_scaled(plane_mean.data(), 1.0, plane.data(), n);
      detail::accumulate_scaled(pattern_mean.data(), 1.0 / s, plane.data(), n);
    }
  }

  const double inv = 1.0 / double(gf.size());
  const double bucket_mean = gf.buckets().mean();
  std::vector<double> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    out[p] = plane_mean[p] * inv - bucket_mean * (pattern_mean[p] * inv);
  }
  return GhostImage{Image(gf.height(), gf.width(), std::move(out)), gf.size(), false};
}

GhostImage frame_gi(const GroupFrame& gf) {
  if (!gf.speckles() || gf.has_stored_planes()) return gi_from_gf(gf);
  if (gf.size() < 2) throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  const double inv = 1.0 / double(gf.size());
  const double bucket_mean = gf.buckets().mean();
  Image out = gf.plane_sum();
  const auto patterns = gf.speckles()->pattern_sum().pixels();
  auto dst = out.pixels();
  for (std::size_t p = 0; p < dst.size(); ++p) {
    dst[p] = dst[p] * inv - bucket_mean * (patterns[p] * inv);
  }
  return GhostImage{std::move(out), gf.size(), false};
}

GhostImage frame_gi_subset(const GroupFrame& gf, std::size_t begin, std::size_t end) {
  if (end > gf.size() || begin >= end) {
    throw Error(ErrorCode::IndexOutOfRange, "sample range [" + std::to_string(begin) + ", " +
                                                std::to_string(end) + ") outside " +
                                                std::to_string(gf.size()) + " samples");
  }
  if (end - begin < 2) throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  if (!gf.speckles()) throw Error(ErrorCode::CorruptGF, "subset reconstruction needs patterns");
  CovarianceAccumulator acc(gf.height(), gf.width());
  for (std::size_t i = begin; i < end; ++i) {
    acc.add(gf.buckets()[i], gf.speckles()->pattern_pixels(i).data());
  }
  return acc.result();
}

std::vector<GhostImage> frame_gi_subsets(const std::vector<const GroupFrame*>& frames,
                                         std::size_t begin, std::size_t end) {
  if (frames.empty()) return {};
  const GroupFrame& first = *frames.front();
  if (!first.speckles() || first.has_stored_planes()) {
    throw Error(ErrorCode::InvalidBGF, "batched subsets need seed-backed frames");
  }
  const SpeckleSet& speckles = *first.speckles();
  if (end > first.size() || begin >= end) {
    throw Error(ErrorCode::IndexOutOfRange, "sample range [" + std::to_string(begin) + ", " +
                                                std::to_string(end) + ") outside " +
                                                std::to_string(first.size()) + " samples");
  }
  if (end - begin < 2) throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  std::vector<const BucketSequence*> weights;
  weights.reserve(frames.size());
  for (const GroupFrame* f : frames) {
    if (f->speckles().get() != &speckles || f->has_stored_planes()) {
      throw Error(ErrorCode::InvalidBGF, "batched frames must share one speckle set");
    }
    weights.push_back(&f->buckets());
  }
  auto products = detail::weighted_pattern_sums(speckles, weights, begin, end);
  const std::size_t n = speckles.pixels_per_pattern();
  std::vector<double> pattern_total(n, 0.0);
  for (std::size_t i = begin; i < end; ++i) {
    detail::accumulate_scaled(pattern_total.data(), 1.0, speckles.pattern_pixels(i).data(), n);
  }
  const double inv = 1.0 / double(end - begin);
  std::vector<GhostImage> out;
  out.reserve(frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    double bucket_total = 0.0;
    for (std::size_t i = begin; i < end; ++i) bucket_total += frames[f]->buckets()[i];
    const double bucket_mean = bucket_total * inv;
    std::vector<double>& px = products[f];
    for (std::size_t p = 0; p < n; ++p) px[p] = px[p] * inv - bucket_mean * (pattern_total[p] * inv);
    out.push_back(GhostImage{Image(first.height(), first.width(), std::move(px)), end - begin, false});
  }
  return out;
}

std::vector<Image> plane_sums(const std::vector<const GroupFrame*>& frames) {
  std::vector<Image> out(frames.size());
  std::map<const SpeckleSet*, std::vector<std::size_t>> groups;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const GroupFrame& gf = *frames[f];
    if (gf.speckles() && !gf.has_stored_planes()) {
      groups[gf.speckles().get()].push_back(f);
    } else {
      out[f] = gf.plane_sum();
    }
  }
  for (const auto& [set, members] : groups) {
    std::vector<const BucketSequence*> weights;
    for (std::size_t f : members) weights.push_back(&frames[f]->buckets());
    auto sums = detail::weighted_pattern_sums(*set, weights, 0, set->size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      out[members[k]] = Image(set->height(), set->width(), std::move(sums[k]));
    }
  }
  return out;
}

GhostImage gi_from_stacks(const std::vector<Image>& planes, const std::vector<Image>& patterns,
                          const BucketSequence& buckets) {
  require_samples(patterns.size(), buckets.size());
  require_samples(planes.size(), buckets.size());
  const Image& first = planes.front();
  Image plane_acc(first.height(), first.width());
  Image pattern_acc(first.height(), first.width());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    require_same_shape(planes[i], first, "gi_from_stacks");
    require_same_shape(patterns[i], first, "gi_from_stacks");
    plane_acc = added(plane_acc, planes[i]);
    pattern_acc = added(pattern_acc, patterns[i]);
  }
  const double inv = 1.0 / double(planes.size());
  Image out = axpy(scaled(plane_acc, inv), -buckets.mean() * inv, pattern_acc);
  return GhostImage{std::move(out), planes.size(), false};
}

}  // namespace ghostsim
