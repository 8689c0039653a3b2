#pragma once

#include <cstddef>
#include <vector>

#include "ghostsim/forward.hpp"
#include "ghostsim/image.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

/// Correlation reconstruction. `image` stays signed and unscaled until
/// normalized() is called.
struct GhostImage {
  Image image;
  std::size_t m_used = 0;
  bool normalized = false;

  /// Min-max scaled copy with the flag set.
  GhostImage normalized_copy() const;
};

/// Per-pixel sample covariance between buckets and pattern intensities:
///   T(x,y) = <S_i I_i(x,y)> - <S_i><I_i(x,y)>,  averages over i with divisor m.
/// Throws LengthMismatch when sizes disagree, TooFewSamples when m < 2.
GhostImage gi(const SpeckleSet& speckles, const BucketSequence& buckets);

/// Reconstruction from the frame alone: patterns are regenerated from the
/// frame's speckle seed (or recovered as plane / bucket for planes-only
/// frames) and the plane stack supplies the product term. Stored planes are
/// checked against bucket * pattern first; any disagreement beyond
/// kPlaneTolerance throws CorruptGF.
GhostImage gi_from_gf(const GroupFrame& gf);

/// Relative per-element tolerance for stored planes. Covers float32 storage
/// of planes and buckets in datasets.
inline constexpr double kPlaneTolerance = 1e-6;

/// Throws CorruptGF if a stored plane is not bucket * pattern within
/// tolerance. No-op for frames without stored planes.
void check_gf_consistency(const GroupFrame& gf, const SpeckleSet& regenerated);

/// Reconstructions from the first c samples for each checkpoint c. Each
/// result is bit-identical to gi() on the truncated inputs. Checkpoints must
/// be strictly ascending, each in [2, m]; otherwise BadCheckpoints.
std::vector<GhostImage> gi_progressive(const SpeckleSet& speckles, const BucketSequence& buckets,
                                       const std::vector<std::size_t>& checkpoints);

/// Fast per-frame reconstruction from the frame's plane sum and its speckle
/// set's pattern sum. Used where many frames of one batch are reconstructed.
GhostImage frame_gi(const GroupFrame& gf);

/// Reconstruction from samples [begin, end) of a seed-backed frame only.
/// Throws TooFewSamples when fewer than two samples are selected.
GhostImage frame_gi_subset(const GroupFrame& gf, std::size_t begin, std::size_t end);

/// frame_gi_subset for many seed-backed frames sharing one speckle set,
/// computed as a single matrix product. Throws InvalidBGF if the frames do
/// not share their set.
std::vector<GhostImage> frame_gi_subsets(const std::vector<const GroupFrame*>& frames,
                                         std::size_t begin, std::size_t end);

/// Plane sums of many frames; frames sharing a speckle set are batched.
std::vector<Image> plane_sums(const std::vector<const GroupFrame*>& frames);

/// Generic estimator over explicit stacks: mean(planes) - mean(buckets) *
/// mean(patterns). Slow; serves as the brute-force reference for merged
/// frames.
GhostImage gi_from_stacks(const std::vector<Image>& planes, const std::vector<Image>& patterns,
                          const BucketSequence& buckets);

}  // namespace ghostsim
