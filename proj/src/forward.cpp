#include "ghostsim/forward.hpp"

#include <cmath>
#include <string>

#include "batch_linalg.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/kernels.hpp"
#include "ghostsim/parallel.hpp"

namespace ghostsim {

double BucketSequence::mean() const {
  if (values.empty()) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / double(values.size());
}

GroupFrame::GroupFrame(std::shared_ptr<const SpeckleSet> speckles, BucketSequence buckets,
                       std::string object_id)
    : speckles_(std::move(speckles)), buckets_(std::move(buckets)),
      object_id_(std::move(object_id)) {
  if (!speckles_) throw Error(ErrorCode::CorruptGF, "group frame needs a speckle set");
  if (buckets_.size() != speckles_->size()) {
    throw Error(ErrorCode::LengthMismatch,
                std::to_string(buckets_.size()) + " buckets for " +
                    std::to_string(speckles_->size()) + " patterns");
  }
  seed_ = speckles_->seed();
  dist_ = speckles_->distribution();
  height_ = speckles_->height();
  width_ = speckles_->width();
}

GroupFrame GroupFrame::with_stored_planes(std::shared_ptr<const SpeckleSet> speckles,
                                          BucketSequence buckets, std::vector<Image> planes,
                                          std::string object_id) {
  GroupFrame gf(std::move(speckles), std::move(buckets), std::move(object_id));
  if (planes.size() != gf.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(planes.size()) + " planes for " +
                                               std::to_string(gf.size()) + " buckets");
  }
  for (const Image& p : planes) {
    if (p.height() != gf.height_ || p.width() != gf.width_) {
      throw Error(ErrorCode::DimensionMismatch, "stored plane shape differs from speckle shape");
    }
  }
  gf.planes_ = std::move(planes);
  return gf;
}

GroupFrame GroupFrame::from_planes_only(BucketSequence buckets, std::vector<Image> planes,
                                        std::uint64_t nominal_seed, Distribution dist,
                                        std::string object_id) {
  if (planes.empty()) throw Error(ErrorCode::CorruptGF, "planes-only frame has no planes");
  if (planes.size() != buckets.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(planes.size()) + " planes for " +
                                               std::to_string(buckets.size()) + " buckets");
  }
  for (const Image& p : planes) require_same_shape(p, planes.front(), "planes-only frame");
  GroupFrame gf;
  gf.buckets_ = std::move(buckets);
  gf.seed_ = nominal_seed;
  gf.dist_ = dist;
  gf.object_id_ = std::move(object_id);
  gf.height_ = planes.front().height();
  gf.width_ = planes.front().width();
  gf.planes_ = std::move(planes);
  gf.regenerable_ = false;
  return gf;
}

Image GroupFrame::plane(std::size_t i) const {
  if (i >= size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "plane " + std::to_string(i) + " of " + std::to_string(size()));
  }
  if (!planes_.empty()) return planes_[i];
  Image out(height_, width_);
  const auto pattern = speckles_->pattern_pixels(i);
  auto dst = out.pixels();
  const double s = buckets_[i];
  for (std::size_t p = 0; p < dst.size(); ++p) dst[p] = s * pattern[p];
  return out;
}

Image GroupFrame::plane_sum() const {
  Image out(height_, width_);
  auto dst = out.pixels();
  for (std::size_t i = 0; i < size(); ++i) {
    if (!planes_.empty()) {
      detail::accumulate_scaled(dst.data(), 1.0, planes_[i].pixels().data(), dst.size());
    } else {
      detail::accumulate_scaled(dst.data(), buckets_[i], speckles_->pattern_pixels(i).data(),
                                dst.size());
    }
  }
  return out;
}

void GroupFrame::overwrite_plane(std::size_t i, Image plane) {
  if (i >= size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "plane " + std::to_string(i) + " of " + std::to_string(size()));
  }
  if (plane.height() != height_ || plane.width() != width_) {
    throw Error(ErrorCode::DimensionMismatch, "replacement plane has the wrong shape");
  }
  if (planes_.empty()) {
    planes_.reserve(size());
    for (std::size_t k = 0; k < size(); ++k) planes_.push_back(this->plane(k));
  }
  planes_[i] = std::move(plane);
}

void BatchGroupFrame::validate() const {
  if (frames.empty()) throw Error(ErrorCode::InvalidBGF, "batch has no frames");
  const GroupFrame& first = frames.front();
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const GroupFrame& gf = frames[k];
    if (gf.speckle_seed() != speckle_seed) {
      throw Error(ErrorCode::InvalidBGF,
                  "frame " + std::to_string(k) + " was measured with a different speckle seed");
    }
    if (gf.size() != first.size() || gf.height() != first.height() ||
        gf.width() != first.width()) {
      throw Error(ErrorCode::InvalidBGF,
                  "frame " + std::to_string(k) + " differs in shape or sample count");
    }
  }
}

RotationTrajectory RotationTrajectory::from_sampling_frequency(double omega_deg_per_ms,
                                                               double freq_hz,
                                                               std::size_t n_frames,
                                                               std::size_t n_batches,
                                                               double start_angle_deg) {
  if (!(freq_hz > 0.0)) {
    throw Error(ErrorCode::InvalidTrajectory, "sampling frequency must be positive");
  }
  RotationTrajectory traj{omega_deg_per_ms, 1000.0 / freq_hz, n_frames, n_batches,
                          start_angle_deg};
  traj.validate();
  return traj;
}

void RotationTrajectory::validate() const {
  if (n_frames == 0 || n_batches == 0) {
    throw Error(ErrorCode::InvalidTrajectory, "frame and batch counts must be positive");
  }
  if (n_frames % n_batches != 0) {
    throw Error(ErrorCode::InvalidTrajectory,
                std::to_string(n_frames) + " frames do not split into " +
                    std::to_string(n_batches) + " equal batches");
  }
  if (!(frame_interval_ms > 0.0) || !std::isfinite(frame_interval_ms)) {
    throw Error(ErrorCode::InvalidTrajectory, "frame interval must be positive");
  }
  if (!std::isfinite(omega_deg_per_ms) || !std::isfinite(start_angle_deg)) {
    throw Error(ErrorCode::InvalidTrajectory, "angular parameters must be finite");
  }
}

double bucket(const Image& object, const Image& pattern) {
  require_same_shape(object, pattern, "bucket");
  return detail::dot_product(object.pixels().data(), pattern.pixels().data(), object.size());
}

double bucket(const Image& object, const SpecklePattern& pattern) {
  return bucket(object, pattern.image);
}

BucketSequence measure_buckets(const Image& object, const SpeckleSet& speckles) {
  if (object.height() != speckles.height() || object.width() != speckles.width()) {
    throw Error(ErrorCode::DimensionMismatch, "object and speckle shapes differ");
  }
  return BucketSequence{detail::project_onto_patterns(speckles, object.pixels().data())};
}

GroupFrame make_gf(const Image& object, std::shared_ptr<const SpeckleSet> speckles,
                   std::string object_id) {
  if (!speckles) throw Error(ErrorCode::CorruptGF, "make_gf needs a speckle set");
  BucketSequence buckets = measure_buckets(object, *speckles);
  return GroupFrame(std::move(speckles), std::move(buckets), std::move(object_id));
}

GroupFrame make_gf(const Image& object, const SpeckleSet& speckles, std::string object_id) {
  return make_gf(object, std::make_shared<const SpeckleSet>(speckles), std::move(object_id));
}

BatchGroupFrame make_bgf(const std::vector<Image>& objects,
                         std::shared_ptr<const SpeckleSet> speckles, std::size_t batch_index) {
  if (objects.empty()) throw Error(ErrorCode::InvalidBGF, "batch needs at least one object");
  if (!speckles) throw Error(ErrorCode::InvalidBGF, "batch needs a speckle set");
  std::vector<BucketSequence> buckets(objects.size());
  parallel_for(objects.size(),
               [&](std::size_t k) { buckets[k] = measure_buckets(objects[k], *speckles); });
  BatchGroupFrame bgf;
  bgf.speckle_seed = speckles->seed();
  bgf.batch_index = batch_index;
  bgf.frames.reserve(objects.size());
  for (std::size_t k = 0; k < objects.size(); ++k) {
    bgf.frames.emplace_back(speckles, std::move(buckets[k]));
  }
  return bgf;
}

Image trajectory_frame_object(const Image& object, const RotationTrajectory& traj,
                              std::size_t frame) {
  return rotate(object, traj.angle_deg(frame));
}

std::vector<BatchGroupFrame> simulate_rotation_bgfs(const Image& object,
                                                    const RotationTrajectory& traj,
                                                    std::size_t samples_per_frame,
                                                    std::uint64_t base_seed,
                                                    Distribution dist) {
  traj.validate();
  if (samples_per_frame == 0) {
    throw Error(ErrorCode::InvalidTrajectory, "samples per frame must be positive");
  }
  if (object.empty()) throw Error(ErrorCode::ZeroDimension, "object image is empty");
  const std::size_t per_batch = traj.frames_per_batch();
  std::vector<BatchGroupFrame> batches;
  batches.reserve(traj.n_batches);
  for (std::size_t b = 0; b < traj.n_batches; ++b) {
    auto speckles = std::make_shared<const SpeckleSet>(bgf_speckle_policy(
        base_seed, b, samples_per_frame, object.height(), object.width(), dist));
    std::vector<Image> states(per_batch);
    for (std::size_t j = 0; j < per_batch; ++j) {
      states[j] = trajectory_frame_object(object, traj, b * per_batch + j);
    }
    BatchGroupFrame bgf = make_bgf(states, std::move(speckles), b);
    for (std::size_t j = 0; j < per_batch; ++j) {
      bgf.frames[j].set_object_id("frame-" + std::to_string(b * per_batch + j));
    }
    batches.push_back(std::move(bgf));
  }
  return batches;
}

std::size_t max_samples(double freq_hz, double omega_deg_per_s, double theta_r_deg) {
  if (!(freq_hz > 0.0) || !(omega_deg_per_s > 0.0) || !(theta_r_deg > 0.0)) {
    throw Error(ErrorCode::NonPositiveParameter,
                "frequency, angular velocity and angular resolution must all be positive");
  }
  const double bound = freq_hz * theta_r_deg / omega_deg_per_s;
  // Decimal inputs such as 0.15 are not exact in binary; do not let a bound
  // that is an integer in decimal floor to the integer below.
  return std::size_t(std::floor(bound * (1.0 + 1e-12)));
}

}  // namespace ghostsim
