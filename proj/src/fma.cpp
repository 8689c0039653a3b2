#include "ghostsim/fma.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/fileutil.hpp"
#include "ghostsim/kernels.hpp"
#include "ghostsim/parallel.hpp"

namespace ghostsim {
namespace {

// Score of a z-scored reference against a freshly rotated operand. The
// reference has zero mean, so dot(ref, rotated) already equals the inner
// product with the mean-removed operand.
double score_against(const Image& reference_z, const Image& rotated) {
  const double mu = mean(rotated);
  double norm2 = 0.0;
  double scale = 0.0;
  for (double v : rotated.pixels()) {
    norm2 += (v - mu) * (v - mu);
    scale = std::max(scale, std::abs(v));
  }
  const double norm = std::sqrt(norm2);
  if (norm <= 1e-12 * std::max(1.0, scale) * std::sqrt(double(rotated.size()))) {
    throw Error(ErrorCode::ConstantImage, "rotated operand has no intensity variation");
  }
  return detail::dot_product(reference_z.pixels().data(), rotated.pixels().data(),
                             rotated.size()) /
         norm;
}

// The moving operand is centred before it is turned, so the zero fill that
// enters at the corners carries no offset. A constant added to either image
// then cannot change any score.
Image centred(const Image& img) {
  const double mu = mean(img);
  Image out = img;
  for (double& v : out.pixels()) v -= mu;
  return out;
}

double correlate(const Image& a, const Image& b, double delta_deg) {
  require_same_shape(a, b, "correlation");
  const Image reference = normalize_zscore(a);
  Image rotated;
  rotate_into(centred(b), -delta_deg, rotated);
  return score_against(reference, rotated);
}

std::vector<Image> frame_images(const BatchGroupFrame& bgf, const std::vector<std::size_t>& which) {
  std::vector<Image> out(bgf.size());
  std::vector<std::size_t> wanted = which;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  parallel_for(wanted.size(), [&](std::size_t k) {
    out[wanted[k]] = frame_gi(bgf.frames[wanted[k]]).image;
  });
  return out;
}

Image segment_pattern_sum(const GroupFrame& frame) {
  if (frame.seed_regenerable() && frame.speckles()) return frame.speckles()->pattern_sum();
  if (frame.seed_regenerable()) {
    return gen_speckle_set(frame.speckle_seed(), frame.size(), frame.height(), frame.width(),
                           frame.distribution())
        .pattern_sum();
  }
  Image acc(frame.height(), frame.width());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double s = frame.buckets()[i];
    if (s == 0.0) {
      throw Error(ErrorCode::CorruptGF, "bucket " + std::to_string(i) +
                                            " is zero; its pattern cannot be recovered");
    }
    detail::accumulate_scaled(acc.pixels().data(), 1.0 / s,
                              frame.stored_planes()[i].pixels().data(), acc.size());
  }
  return acc;
}

}  // namespace

void AngleGrid::validate() const {
  if (!std::isfinite(min_deg) || !std::isfinite(max_deg) || !std::isfinite(step_deg)) {
    throw Error(ErrorCode::InvalidGrid, "grid bounds must be finite");
  }
  if (!(step_deg > 0.0)) throw Error(ErrorCode::InvalidGrid, "grid step must be positive");
  if (min_deg > max_deg) throw Error(ErrorCode::InvalidGrid, "grid min exceeds grid max");
}

std::vector<double> AngleGrid::candidates() const {
  validate();
  const auto count = std::size_t(std::floor((max_deg - min_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = min_deg + double(k) * step_deg;
  return out;
}

double ccg(const Image& g1, const Image& g2, double delta_deg) {
  return correlate(g1, g2, delta_deg);
}

double ccf(const Image& f1, const Image& f2, double delta_deg) {
  return correlate(f1, f2, delta_deg);
}

std::vector<CurvePoint> correlation_curve(const Image& g1, const Image& g2,
                                          const AngleGrid& grid) {
  require_same_shape(g1, g2, "correlation_curve");
  const std::vector<double> deltas = grid.candidates();
  const Image reference = normalize_zscore(g1);
  const Image moving = centred(g2);
  std::vector<CurvePoint> curve(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t k) {
    Image rotated;
    rotate_into(moving, -deltas[k], rotated);
    curve[k] = CurvePoint{deltas[k], score_against(reference, rotated)};
  });
  return curve;
}

AngleEstimate argmax_curve(std::vector<CurvePoint> curve) {
  if (curve.empty()) throw Error(ErrorCode::InvalidGrid, "empty correlation curve");
  const CurvePoint* best = &curve.front();
  for (const CurvePoint& p : curve) {
    const bool higher = p.score > best->score;
    const bool tie = p.score == best->score;
    const double pa = std::abs(p.candidate_deg);
    const double ba = std::abs(best->candidate_deg);
    if (higher || (tie && (pa < ba || (pa == ba && p.candidate_deg < best->candidate_deg)))) {
      best = &p;
    }
  }
  AngleEstimate est{best->candidate_deg, best->score, {}};
  est.curve = std::move(curve);
  return est;
}

AngleEstimate estimate_angle(const Image& g1, const Image& g2, const AngleGrid& grid) {
  return argmax_curve(correlation_curve(g1, g2, grid));
}

AngleEstimate estimate_angle_gi(const GhostImage& g1, const GhostImage& g2,
                                const AngleGrid& grid) {
  return estimate_angle(g1.image, g2.image, grid);
}

FrameAngleEstimate estimate_frame_angle(const BatchGroupFrame& bgf, std::size_t gf_a,
                                        std::size_t gf_b, const AngleGrid& grid,
                                        FramePairing pairing, double prefilter_sigma_px) {
  bgf.validate();
  grid.validate();
  if (gf_a >= gf_b || gf_b >= bgf.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "need frame indices a < b < " + std::to_string(bgf.size()) + ", got " +
                    std::to_string(gf_a) + ", " + std::to_string(gf_b));
  }
  FrameAngleEstimate result;
  result.span = gf_b - gf_a;
  result.batch_index = bgf.batch_index;

  if (pairing == FramePairing::frame_gi) {
    std::vector<std::size_t> needed;
    for (std::size_t i = 0; i < result.span && gf_b + i < bgf.size(); ++i) {
      needed.push_back(gf_a + i);
      needed.push_back(gf_b + i);
    }
    std::vector<Image> images = frame_images(bgf, needed);
    for (std::size_t k : needed) images[k] = gaussian_blur(images[k], prefilter_sigma_px);
    for (std::size_t i = 0; i < result.span && gf_b + i < bgf.size(); ++i) {
      result.pairs.push_back(FramePair{gf_a + i, gf_b + i,
                                       estimate_angle(images[gf_a + i], images[gf_b + i], grid)});
    }
  } else if (pairing == FramePairing::split_patterns) {
    const std::size_t m = bgf.frames.front().size();
    if (m < 4) {
      throw Error(ErrorCode::TooFewSamples, "split pairing needs at least 4 samples per frame");
    }
    const std::size_t half = m / 2;
    const std::size_t count = std::min(result.span, bgf.size() - gf_b);
    std::vector<const GroupFrame*> frames;
    for (std::size_t i = 0; i < count; ++i) frames.push_back(&bgf.frames[gf_a + i]);
    for (std::size_t i = 0; i < count; ++i) frames.push_back(&bgf.frames[gf_b + i]);
    std::vector<GhostImage> lower = frame_gi_subsets(frames, 0, half);
    std::vector<GhostImage> upper = frame_gi_subsets(frames, half, m);
    for (auto* set : {&lower, &upper}) {
      for (GhostImage& g : *set) g.image = gaussian_blur(g.image, prefilter_sigma_px);
    }
    // Both cross-half orderings per pair; each uses disjoint patterns.
    for (std::size_t i = 0; i < count; ++i) {
      result.pairs.push_back(FramePair{gf_a + i, gf_b + i,
                                       estimate_angle(lower[i].image, upper[count + i].image, grid)});
      result.pairs.push_back(FramePair{gf_a + i, gf_b + i,
                                       estimate_angle(upper[i].image, lower[count + i].image, grid)});
    }
  } else {
    const GroupFrame& fa = bgf.frames[gf_a];
    const GroupFrame& fb = bgf.frames[gf_b];
    for (std::size_t i = 0; i < fa.size(); ++i) {
      result.pairs.push_back(FramePair{gf_a, gf_b, estimate_angle(fa.plane(i), fb.plane(i), grid)});
    }
  }

  double total = 0.0;
  for (const FramePair& p : result.pairs) total += p.estimate.angle_deg;
  result.alpha_deg = total / double(result.pairs.size()) / double(result.span);
  return result;
}

AlphaEstimate estimate_alpha(const std::vector<BatchGroupFrame>& bgfs, const FmaOptions& options) {
  AlphaEstimate out;
  double total = 0.0;
  for (const BatchGroupFrame& bgf : bgfs) {
    if (bgf.size() < 2) continue;
    std::size_t span = options.span.value_or(bgf.size() / 2);
    if (span == 0 || span >= bgf.size()) {
      throw Error(ErrorCode::InvalidBGF, "span " + std::to_string(span) +
                                             " does not fit a batch of " +
                                             std::to_string(bgf.size()) + " frames");
    }
    out.per_batch.push_back(estimate_frame_angle(bgf, 0, span, options.grid, options.pairing,
                                                 options.prefilter_sigma_px));
    total += out.per_batch.back().alpha_deg;
  }
  if (out.per_batch.empty()) {
    throw Error(ErrorCode::InvalidBGF, "no batch holds the two frames needed to measure rotation");
  }
  out.alpha_deg = total / double(out.per_batch.size());
  return out;
}

MergedGroupFrame::MergedGroupFrame(std::vector<Segment> segments, FrameRef base)
    : segments_(std::move(segments)), base_(base) {
  if (segments_.empty()) throw Error(ErrorCode::InvalidBGF, "nothing to merge");
  for (const Segment& s : segments_) {
    if (s.frame.height() != segments_.front().frame.height() ||
        s.frame.width() != segments_.front().frame.width()) {
      throw Error(ErrorCode::InvalidBGF, "merged frames differ in shape");
    }
    plane_count_ += s.frame.size();
  }
}

std::pair<std::size_t, std::size_t> MergedGroupFrame::locate(std::size_t j) const {
  if (j >= plane_count_) {
    throw Error(ErrorCode::IndexOutOfRange,
                "plane " + std::to_string(j) + " of " + std::to_string(plane_count_));
  }
  for (std::size_t s = 0; s < segments_.size(); ++s) {
    if (j < segments_[s].frame.size()) return {s, j};
    j -= segments_[s].frame.size();
  }
  return {segments_.size() - 1, 0};
}

Image MergedGroupFrame::plane(std::size_t j) const {
  const auto [s, i] = locate(j);
  return rotate(segments_[s].frame.plane(i), segments_[s].rotation_deg);
}

Image MergedGroupFrame::pattern(std::size_t j) const {
  const auto [s, i] = locate(j);
  const GroupFrame& frame = segments_[s].frame;
  Image raw;
  if (frame.seed_regenerable() && frame.speckles()) {
    raw = frame.speckles()->pattern_image(i);
  } else if (frame.seed_regenerable()) {
    raw = gen_speckle_set(frame.speckle_seed(), frame.size(), frame.height(), frame.width(),
                          frame.distribution())
              .pattern_image(i);
  } else {
    raw = scaled(frame.stored_planes()[i], 1.0 / frame.buckets()[i]);
  }
  return rotate(raw, segments_[s].rotation_deg);
}

BucketSequence MergedGroupFrame::buckets() const {
  BucketSequence out;
  out.values.reserve(plane_count_);
  for (const Segment& s : segments_) {
    out.values.insert(out.values.end(), s.frame.buckets().values.begin(),
                      s.frame.buckets().values.end());
  }
  return out;
}

std::vector<PlaneProvenance> MergedGroupFrame::provenance() const {
  std::vector<PlaneProvenance> out;
  out.reserve(plane_count_);
  for (const Segment& s : segments_) {
    out.insert(out.end(), s.frame.size(),
               PlaneProvenance{s.batch_index, s.frame_index, s.rotation_deg});
  }
  return out;
}

MergedGroupFrame MergedGroupFrame::canonicalized() const {
  std::vector<Segment> sorted = segments_;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Segment& a, const Segment& b) {
    return a.batch_index != b.batch_index ? a.batch_index < b.batch_index
                                          : a.frame_index < b.frame_index;
  });
  return MergedGroupFrame(std::move(sorted), base_);
}

GroupFrame MergedGroupFrame::materialize(std::string object_id) const {
  std::vector<Image> planes;
  planes.reserve(plane_count_);
  for (std::size_t j = 0; j < plane_count_; ++j) planes.push_back(plane(j));
  const Segment* base_segment = &segments_.front();
  for (const Segment& s : segments_) {
    if (s.batch_index == base_.batch && s.frame_index == base_.frame) base_segment = &s;
  }
  return GroupFrame::from_planes_only(buckets(), std::move(planes),
                                      base_segment->frame.speckle_seed(),
                                      base_segment->frame.distribution(), std::move(object_id));
}

MergedGroupFrame merge_frames(const std::vector<FrameRotation>& frames, FrameRef base) {
  std::vector<MergedGroupFrame::Segment> segments;
  segments.reserve(frames.size());
  for (const FrameRotation& f : frames) {
    if (f.frame == nullptr) throw Error(ErrorCode::InvalidBGF, "null frame in merge list");
    segments.push_back({*f.frame, f.ref.batch, f.ref.frame, f.rotation_deg});
  }
  return MergedGroupFrame(std::move(segments), base);
}

MergedGroupFrame fma_merge_within(const BatchGroupFrame& bgf, double alpha_deg,
                                  std::size_t base_frame) {
  bgf.validate();
  if (base_frame >= bgf.size()) {
    throw Error(ErrorCode::BadBase, "base frame " + std::to_string(base_frame) +
                                        " outside a batch of " + std::to_string(bgf.size()));
  }
  std::vector<FrameRotation> list;
  list.reserve(bgf.size());
  for (std::size_t k = 0; k < bgf.size(); ++k) {
    const double offset = double(k) - double(base_frame);
    list.push_back({{bgf.batch_index, k}, &bgf.frames[k], -offset * alpha_deg});
  }
  return merge_frames(list, FrameRef{bgf.batch_index, base_frame});
}

MergedGroupFrame fma_merge_across(const std::vector<BatchGroupFrame>& bgfs, double alpha_deg,
                                  FrameRef base) {
  if (bgfs.empty()) throw Error(ErrorCode::InvalidBGF, "no batches to merge");
  for (const BatchGroupFrame& bgf : bgfs) bgf.validate();
  if (base.batch >= bgfs.size() || base.frame >= bgfs[base.batch].size()) {
    throw Error(ErrorCode::BadBase, "base " + std::to_string(base.batch) + ":" +
                                        std::to_string(base.frame) + " names no frame");
  }
  std::vector<std::size_t> offsets(bgfs.size(), 0);
  for (std::size_t b = 1; b < bgfs.size(); ++b) offsets[b] = offsets[b - 1] + bgfs[b - 1].size();
  const double base_global = double(offsets[base.batch] + base.frame);

  std::vector<FrameRotation> list;
  for (std::size_t b = 0; b < bgfs.size(); ++b) {
    for (std::size_t k = 0; k < bgfs[b].size(); ++k) {
      const double offset = double(offsets[b] + k) - base_global;
      list.push_back({{b, k}, &bgfs[b].frames[k], -offset * alpha_deg});
    }
  }
  return merge_frames(list, base);
}

MergedGroupFrame concatenate_unaligned(const std::vector<BatchGroupFrame>& bgfs) {
  return fma_merge_across(bgfs, 0.0, FrameRef{0, 0});
}

GhostImage gi_merged(const MergedGroupFrame& merged) {
  const std::size_t total = merged.size();
  if (total < 2) throw Error(ErrorCode::TooFewSamples, "correlation needs at least two samples");
  Image plane_acc(merged.height(), merged.width());
  Image pattern_acc(merged.height(), merged.width());
  Image buffer;
  double bucket_total = 0.0;
  std::vector<const GroupFrame*> frames;
  for (const auto& segment : merged.segments()) frames.push_back(&segment.frame);
  const std::vector<Image> sums = plane_sums(frames);
  // Bilinear rotation is linear, so rotating each frame's sums equals summing
  // its rotated planes.
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& segment = merged.segments()[k];
    rotate_into(sums[k], segment.rotation_deg, buffer);
    detail::accumulate_scaled(plane_acc.pixels().data(), 1.0, buffer.pixels().data(),
                              buffer.size());
    rotate_into(segment_pattern_sum(segment.frame), segment.rotation_deg, buffer);
    detail::accumulate_scaled(pattern_acc.pixels().data(), 1.0, buffer.pixels().data(),
                              buffer.size());
    for (double s : segment.frame.buckets().values) bucket_total += s;
  }
  const double inv = 1.0 / double(total);
  const double bucket_mean = bucket_total * inv;
  Image out = axpy(scaled(plane_acc, inv), -bucket_mean * inv, pattern_acc);
  return GhostImage{std::move(out), total, false};
}

void write_curves_csv(const std::filesystem::path& path, const AlphaEstimate& estimate) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "batch,frame_a,frame_b,candidate_deg,score\n";
  for (const FrameAngleEstimate& batch : estimate.per_batch) {
    for (const FramePair& pair : batch.pairs) {
      for (const CurvePoint& p : pair.estimate.curve) {
        os << batch.batch_index << ',' << pair.first << ',' << pair.second << ','
           << p.candidate_deg << ',' << p.score << '\n';
      }
    }
  }
  write_file_atomic(path, os.str());
}

void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve) {
  std::ostringstream os;
  os << std::setprecision(10) << "candidate_deg,score\n";
  for (const CurvePoint& p : curve) os << p.candidate_deg << ',' << p.score << '\n';
  write_file_atomic(path, os.str());
}

}  // namespace ghostsim
