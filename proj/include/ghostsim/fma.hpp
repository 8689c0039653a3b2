#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "ghostsim/forward.hpp"
#include "ghostsim/image.hpp"
#include "ghostsim/reconstruct.hpp"

namespace ghostsim {

/// Candidate rotations {min, min + step, ...} up to max inclusive.
struct AngleGrid {
  double min_deg = 0.0;
  double max_deg = 0.0;
  double step_deg = 0.05;

  /// Throws InvalidGrid unless step > 0, min <= max, all finite.
  void validate() const;
  std::vector<double> candidates() const;
};

struct CurvePoint {
  double candidate_deg = 0.0;
  double score = 0.0;
};

struct AngleEstimate {
  double angle_deg = 0.0;
  double score = 0.0;
  std::vector<CurvePoint> curve;
};

/// Normalized correlation between g1 and g2 counter-rotated by delta_deg:
///   sum over pixels of Z(g1) * Z(rotate(g2 - mean(g2), -delta_deg)),
/// Z = zero-mean unit-norm scaling, applied after the rotation. Peaks when
/// g2 is g1 turned by delta_deg. Centring before the turn keeps the corner
/// fill neutral, so constant offsets never move the score.
/// Throws ConstantImage, DimensionMismatch.
double ccg(const Image& g1, const Image& g2, double delta_deg);

/// The same score on frame-level images of one batch.
double ccf(const Image& f1, const Image& f2, double delta_deg);

/// Scores every grid candidate (in parallel) for "g2 is g1 turned by delta".
std::vector<CurvePoint> correlation_curve(const Image& g1, const Image& g2,
                                          const AngleGrid& grid);

/// Argmax of a curve; ties go to the smallest |angle|, then the smaller angle.
AngleEstimate argmax_curve(std::vector<CurvePoint> curve);

/// Rotation of g2 relative to g1 by exhaustive grid search.
AngleEstimate estimate_angle(const Image& g1, const Image& g2, const AngleGrid& grid);
AngleEstimate estimate_angle_gi(const GhostImage& g1, const GhostImage& g2,
                                const AngleGrid& grid);

/// Which images are correlated when measuring rotation between two frames
/// of one batch.
enum class FramePairing {
  /// Like frame_gi, but the earlier frame of each pair is reconstructed from
  /// the first half of the batch's patterns and the later one from the second
  /// half, and again with the halves swapped. Frames of one batch share their
  /// patterns, so full reconstructions share their noise too, which pins the
  /// correlation peak at 0; disjoint halves have independent noise.
  split_patterns,
  /// Each frame is reduced to its own low-sample reconstruction; frames
  /// (a + i, b + i) are paired for i = 0 .. v-1 while both stay in the batch.
  frame_gi,
  /// Plane i of frame a against plane i of frame b. Both planes are scaled
  /// copies of the same pattern, so the score peaks at 0 whatever the motion;
  /// kept for diagnostics.
  matched_planes,
};

struct FramePair {
  std::size_t first = 0;
  std::size_t second = 0;
  AngleEstimate estimate;
};

struct FrameAngleEstimate {
  /// Rotation between adjacent frames.
  double alpha_deg = 0.0;
  /// Frame distance v covered by each pair.
  std::size_t span = 0;
  std::size_t batch_index = 0;
  std::vector<FramePair> pairs;
};

/// Default smoothing for per-frame reconstructions. Their noise is white at
/// the pixel scale while object structure spans several pixels.
inline constexpr double kDefaultPrefilterSigmaPx = 1.5;

/// Per-frame rotation from frames gf_a < gf_b of one batch: the mean of the
/// pairwise argmax angles (each spanning v = gf_b - gf_a frames) divided by v.
/// Throws IndexOutOfRange, InvalidBGF, or correlation errors.
/// `prefilter_sigma_px` smooths the per-frame reconstructions (not the
/// matched planes) before correlation; 0 disables it.
FrameAngleEstimate estimate_frame_angle(const BatchGroupFrame& bgf, std::size_t gf_a,
                                        std::size_t gf_b, const AngleGrid& grid,
                                        FramePairing pairing = FramePairing::split_patterns,
                                        double prefilter_sigma_px = kDefaultPrefilterSigmaPx);

struct FmaOptions {
  /// Searched per pair, so it must cover span * alpha.
  AngleGrid grid{0.0, 12.0, 0.05};
  /// Frame distance v; defaults to half the batch length.
  std::optional<std::size_t> span;
  FramePairing pairing = FramePairing::split_patterns;
  /// Gaussian smoothing of per-frame reconstructions before correlation.
  double prefilter_sigma_px = kDefaultPrefilterSigmaPx;
};

struct AlphaEstimate {
  double alpha_deg = 0.0;
  std::vector<FrameAngleEstimate> per_batch;
};

/// Runs estimate_frame_angle on frames (0, v) of every batch holding at least
/// two frames and averages the per-batch results. Throws InvalidBGF when no
/// batch is long enough.
AlphaEstimate estimate_alpha(const std::vector<BatchGroupFrame>& bgfs, const FmaOptions& options);

/// Position of a frame: batch index and frame index within that batch.
struct FrameRef {
  std::size_t batch = 0;
  std::size_t frame = 0;
  friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

struct PlaneProvenance {
  std::size_t batch_index = 0;
  std::size_t frame_index = 0;
  double applied_rotation_deg = 0.0;
};

/// Motion-compensated group frame: every source frame's planes (and the
/// patterns behind them) turned to the base orientation and concatenated.
/// Planes are produced on demand; reconstruction works per source frame,
/// which rotation's linearity makes equal to working plane by plane.
class MergedGroupFrame {
public:
  struct Segment {
    GroupFrame frame;
    std::size_t batch_index = 0;
    std::size_t frame_index = 0;
    double rotation_deg = 0.0;
  };

  MergedGroupFrame(std::vector<Segment> segments, FrameRef base);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  FrameRef base() const noexcept { return base_; }
  std::size_t size() const noexcept { return plane_count_; }
  std::size_t height() const noexcept { return segments_.front().frame.height(); }
  std::size_t width() const noexcept { return segments_.front().frame.width(); }

  Image plane(std::size_t j) const;
  Image pattern(std::size_t j) const;
  BucketSequence buckets() const;
  std::vector<PlaneProvenance> provenance() const;

  /// Segments reordered by (batch, frame).
  MergedGroupFrame canonicalized() const;

  /// Rotated planes written out as a planes-only GroupFrame (for datasets).
  GroupFrame materialize(std::string object_id = "merged") const;

private:
  std::pair<std::size_t, std::size_t> locate(std::size_t j) const;

  std::vector<Segment> segments_;
  FrameRef base_;
  std::size_t plane_count_ = 0;
};

struct FrameRotation {
  FrameRef ref;
  const GroupFrame* frame = nullptr;
  double rotation_deg = 0.0;
};

/// Concatenates frames after turning each by its own rotation, in the given
/// order.
MergedGroupFrame merge_frames(const std::vector<FrameRotation>& frames, FrameRef base);

/// Within one batch: frame k is turned by -(k - base) * alpha so every frame
/// lands on the base frame's orientation.
MergedGroupFrame fma_merge_within(const BatchGroupFrame& bgf, double alpha_deg,
                                  std::size_t base_frame = 0);

/// Across batches: frames are indexed globally in batch order and frame g is
/// turned by -(g - g_base) * alpha. Throws BadBase, InvalidBGF.
MergedGroupFrame fma_merge_across(const std::vector<BatchGroupFrame>& bgfs, double alpha_deg,
                                  FrameRef base);

/// Plain concatenation with no compensation (the blurred reference).
MergedGroupFrame concatenate_unaligned(const std::vector<BatchGroupFrame>& bgfs);

/// Correlation reconstruction of a merged frame.
GhostImage gi_merged(const MergedGroupFrame& merged);

/// Writes rows `batch,frame_a,frame_b,candidate_deg,score`.
void write_curves_csv(const std::filesystem::path& path, const AlphaEstimate& estimate);
/// Writes rows `candidate_deg,score`.
void write_curve_csv(const std::filesystem::path& path, const std::vector<CurvePoint>& curve);

}  // namespace ghostsim
