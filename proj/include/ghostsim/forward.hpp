#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ghostsim/image.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

/// Bucket-detector readings S_1..S_m, one per illumination pattern.
struct BucketSequence {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const noexcept { return values[i]; }
  double mean() const;

  friend bool operator==(const BucketSequence&, const BucketSequence&) = default;
};

/// The m bucket-measurement images S_i * I_i of one object state.
///
/// A frame normally keeps only the buckets and a handle to the speckle set,
/// computing planes on demand. Frames read back from a dataset may also
/// carry stored planes, which are then authoritative and checked against the
/// seed during reconstruction. Motion-compensated frames carry stored planes
/// and no regenerable speckle set at all.
class GroupFrame {
public:
  GroupFrame(std::shared_ptr<const SpeckleSet> speckles, BucketSequence buckets,
             std::string object_id = {});

  /// Frame with stored planes whose patterns are still regenerable from the
  /// speckle seed.
  static GroupFrame with_stored_planes(std::shared_ptr<const SpeckleSet> speckles,
                                       BucketSequence buckets, std::vector<Image> planes,
                                       std::string object_id = {});

  /// Frame whose planes cannot be re-derived from a seed (rotated planes).
  /// Patterns are recovered as plane_i / bucket_i.
  static GroupFrame from_planes_only(BucketSequence buckets, std::vector<Image> planes,
                                     std::uint64_t nominal_seed, Distribution dist,
                                     std::string object_id = {});

  std::size_t size() const noexcept { return buckets_.size(); }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }

  const BucketSequence& buckets() const noexcept { return buckets_; }
  std::uint64_t speckle_seed() const noexcept { return seed_; }
  Distribution distribution() const noexcept { return dist_; }
  const std::string& object_id() const noexcept { return object_id_; }
  void set_object_id(std::string id) { object_id_ = std::move(id); }

  /// Null for planes-only frames.
  const std::shared_ptr<const SpeckleSet>& speckles() const noexcept { return speckles_; }
  bool seed_regenerable() const noexcept { return regenerable_; }
  bool has_stored_planes() const noexcept { return !planes_.empty(); }
  const std::vector<Image>& stored_planes() const noexcept { return planes_; }

  /// Plane i: the stored plane if present, else buckets[i] * pattern i.
  Image plane(std::size_t i) const;
  /// Sum over i of plane i.
  Image plane_sum() const;

  /// Replaces stored plane i (materializing all planes first if needed).
  /// Used by tamper tests and by readers.
  void overwrite_plane(std::size_t i, Image plane);

private:
  GroupFrame() = default;

  std::shared_ptr<const SpeckleSet> speckles_;
  BucketSequence buckets_;
  std::vector<Image> planes_;
  std::uint64_t seed_ = 0;
  Distribution dist_ = Distribution::uniform01;
  std::string object_id_;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  bool regenerable_ = true;
};

/// B GroupFrames recorded under one shared speckle set.
struct BatchGroupFrame {
  std::vector<GroupFrame> frames;
  std::uint64_t speckle_seed = 0;
  std::size_t batch_index = 0;

  std::size_t size() const noexcept { return frames.size(); }
  /// Throws InvalidBGF when empty, when shapes or m disagree, or when a
  /// member frame carries a different speckle seed.
  void validate() const;
};

/// Uniform rotation sampled at a fixed frame interval.
struct RotationTrajectory {
  double omega_deg_per_ms = 0.0;
  double frame_interval_ms = 0.0;
  std::size_t n_frames = 0;
  std::size_t n_batches = 1;
  double start_angle_deg = 0.0;

  /// Frame interval taken as 1000 / f ms.
  static RotationTrajectory from_sampling_frequency(double omega_deg_per_ms, double freq_hz,
                                                    std::size_t n_frames, std::size_t n_batches,
                                                    double start_angle_deg = 0.0);

  double step_deg() const noexcept { return omega_deg_per_ms * frame_interval_ms; }
  double angle_deg(std::size_t frame) const noexcept {
    return start_angle_deg + step_deg() * double(frame);
  }
  std::size_t frames_per_batch() const noexcept { return n_frames / n_batches; }
  /// Throws InvalidTrajectory.
  void validate() const;
};

/// Unweighted pixel sum of object * pattern.
double bucket(const Image& object, const Image& pattern);
double bucket(const Image& object, const SpecklePattern& pattern);

/// Buckets of `object` under every pattern of the set.
BucketSequence measure_buckets(const Image& object, const SpeckleSet& speckles);

GroupFrame make_gf(const Image& object, std::shared_ptr<const SpeckleSet> speckles,
                   std::string object_id = {});
GroupFrame make_gf(const Image& object, const SpeckleSet& speckles, std::string object_id = {});

/// Assembles one batch from objects already in their per-frame state.
BatchGroupFrame make_bgf(const std::vector<Image>& objects,
                         std::shared_ptr<const SpeckleSet> speckles, std::size_t batch_index);

/// Frame k images `object` rotated to traj.angle_deg(k); frames are grouped
/// into contiguous equal batches, batch b illuminated by
/// bgf_speckle_policy(base_seed, b, ...).
std::vector<BatchGroupFrame> simulate_rotation_bgfs(const Image& object,
                                                    const RotationTrajectory& traj,
                                                    std::size_t samples_per_frame,
                                                    std::uint64_t base_seed,
                                                    Distribution dist = Distribution::uniform01);

/// Ground-truth object state of frame k.
Image trajectory_frame_object(const Image& object, const RotationTrajectory& traj,
                              std::size_t frame);

/// floor(f * theta_r / w): the most samples one image may take before the
/// object turns through one angular resolution element. f in Hz, w in deg/s.
std::size_t max_samples(double freq_hz, double omega_deg_per_s, double theta_r_deg);

}  // namespace ghostsim
