#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ghostsim/forward.hpp"
#include "ghostsim/image.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

// GFB1 dataset container. All integers and floats little-endian.
//
//   header  (22 bytes)
//     char[4]  magic "GFB1"
//     u16      version (1)
//     u32      H, W, m
//     u32      entry_count
//   entry
//     u32      label length L, then L bytes of UTF-8 object_id
//     u64      speckle_seed
//     u8       distribution (0 = uniform01, 1 = binary)
//     f32[H*W] ground truth, row-major
//     f32[m]   buckets
//     u8       planes flag (see PlaneStorage)
//     f32[m*H*W] planes, plane-major, present iff flag != 0

inline constexpr char kContainerMagic[4] = {'G', 'F', 'B', '1'};
inline constexpr std::uint16_t kContainerVersion = 1;
inline constexpr std::size_t kContainerHeaderBytes = 22;

enum class PlaneStorage : std::uint8_t {
  /// Planes omitted; regenerate patterns from the seed.
  none = 0,
  /// Planes stored; they must agree with bucket * regenerated pattern.
  stored = 1,
  /// Planes stored and not seed-regenerable (motion-compensated output).
  /// The seed is that of the base frame and is informational only.
  motion_compensated = 2,
};

struct DatasetEntry {
  std::string object_id;
  std::uint64_t speckle_seed = 0;
  Distribution distribution = Distribution::uniform01;
  std::vector<float> ground_truth;
  std::vector<float> buckets;
  PlaneStorage planes_included = PlaneStorage::none;
  std::vector<float> planes;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct Dataset {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::uint32_t samples = 0;
  std::vector<DatasetEntry> entries;

  /// Throws LengthMismatch when an entry's arrays disagree with H, W, m.
  void validate() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

std::string encode_container(const Dataset& dataset);
/// Throws BadMagic, VersionUnsupported, TruncatedFile.
Dataset decode_container(std::string_view bytes);

/// Atomic write (temporary file + rename). Throws IoFailure.
void write_container(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_container(const std::filesystem::path& path);

/// Entry whose planes are produced one at a time while writing, for merged
/// frames too large to hold in memory. `plane(i, out)` fills plane i.
struct StreamedEntry {
  std::string object_id;
  std::uint64_t speckle_seed = 0;
  Distribution distribution = Distribution::uniform01;
  std::vector<float> ground_truth;
  std::vector<float> buckets;
  PlaneStorage planes_included = PlaneStorage::none;
  std::function<void(std::size_t, std::vector<float>&)> plane;
};

/// Same bytes as write_container on the equivalent Dataset, written through
/// a temporary file. Throws IoFailure, LengthMismatch.
void write_container_streamed(const std::filesystem::path& path, std::uint32_t height,
                              std::uint32_t width, std::uint32_t samples,
                              const std::vector<StreamedEntry>& entries);

/// Entry for a frame. Seed-backed frames store planes only if asked;
/// planes-only frames always store them (flag motion_compensated).
DatasetEntry entry_from_gf(const GroupFrame& gf, const Image& ground_truth,
                           bool include_planes = false);

/// Rebuilds a frame from an entry, regenerating its speckle set (or reusing
/// `speckles` when it already matches the entry's seed and shape).
GroupFrame gf_from_entry(const DatasetEntry& entry, const Dataset& dataset,
                         std::shared_ptr<const SpeckleSet> speckles = nullptr);

Image ground_truth_image(const DatasetEntry& entry, const Dataset& dataset);

/// Groups consecutive entries that share a speckle seed into batches,
/// numbered in file order. Speckle sets are generated once per batch.
std::vector<BatchGroupFrame> batches_from_dataset(const Dataset& dataset);

}  // namespace ghostsim
