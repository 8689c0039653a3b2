#include "ghostsim/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "ghostsim/error.hpp"
#include "ghostsim/fileutil.hpp"

namespace ghostsim {
namespace {

class Writer {
public:
  void bytes(const void* data, std::size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }
  void u8(std::uint8_t v) { out_.push_back(char(v)); }
  void u16(std::uint16_t v) { little(v, 2); }
  void u32(std::uint32_t v) { little(v, 4); }
  void u64(std::uint64_t v) { little(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f32s(const std::vector<float>& values) {
    for (float v : values) f32(v);
  }
  std::string take() { return std::move(out_); }

private:
  void little(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(char((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::size_t remaining() const noexcept { return data_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw Error(ErrorCode::TruncatedFile, std::string("file ends inside ") + what);
    }
  }
  std::uint64_t little(int n, const char* what) {
    need(std::size_t(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += std::size_t(n);
    return v;
  }
  std::uint8_t u8(const char* what) { return std::uint8_t(little(1, what)); }
  std::uint16_t u16(const char* what) { return std::uint16_t(little(2, what)); }
  std::uint32_t u32(const char* what) { return std::uint32_t(little(4, what)); }
  std::uint64_t u64(const char* what) { return little(8, what); }
  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<float> f32s(std::size_t count, const char* what) {
    if (count > remaining() / 4) {
      throw Error(ErrorCode::TruncatedFile, std::string("file ends inside ") + what);
    }
    std::vector<float> out(count);
    for (float& v : out) v = std::bit_cast<float>(u32(what));
    return out;
  }

private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::vector<float> to_floats(const Image& img) {
  return std::vector<float>(img.data().begin(), img.data().end());
}

}  // namespace

void Dataset::validate() const {
  const std::size_t hw = std::size_t(height) * width;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const DatasetEntry& e = entries[k];
    const bool planes_ok = e.planes_included == PlaneStorage::none
                               ? e.planes.empty()
                               : e.planes.size() == hw * samples;
    if (e.ground_truth.size() != hw || e.buckets.size() != samples || !planes_ok) {
      throw Error(ErrorCode::LengthMismatch,
                  "entry " + std::to_string(k) + " does not match the container's H, W, m");
    }
    if (e.object_id.size() > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(ErrorCode::LengthMismatch, "object id too long");
    }
  }
}

std::string encode_container(const Dataset& dataset) {
  dataset.validate();
  Writer w;
  w.bytes(kContainerMagic, 4);
  w.u16(kContainerVersion);
  w.u32(dataset.height);
  w.u32(dataset.width);
  w.u32(dataset.samples);
  w.u32(std::uint32_t(dataset.entries.size()));
  for (const DatasetEntry& e : dataset.entries) {
    w.u32(std::uint32_t(e.object_id.size()));
    w.bytes(e.object_id.data(), e.object_id.size());
    w.u64(e.speckle_seed);
    w.u8(std::uint8_t(e.distribution));
    w.f32s(e.ground_truth);
    w.f32s(e.buckets);
    w.u8(std::uint8_t(e.planes_included));
    if (e.planes_included != PlaneStorage::none) w.f32s(e.planes);
  }
  return w.take();
}

Dataset decode_container(std::string_view bytes) {
  Reader r(bytes);
  if (r.remaining() < 4 || std::memcmp(bytes.data(), kContainerMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not a GFB1 container");
  }
  r.text(4, "magic");
  const std::uint16_t version = r.u16("header");
  if (version != kContainerVersion) {
    throw Error(ErrorCode::VersionUnsupported,
                "container version " + std::to_string(version) + " (supported: 1)");
  }
  Dataset ds;
  ds.height = r.u32("header");
  ds.width = r.u32("header");
  ds.samples = r.u32("header");
  const std::uint32_t count = r.u32("header");
  const std::size_t hw = std::size_t(ds.height) * ds.width;
  for (std::uint32_t k = 0; k < count; ++k) {
    DatasetEntry e;
    const std::uint32_t label = r.u32("entry label");
    e.object_id = r.text(label, "entry label");
    e.speckle_seed = r.u64("entry seed");
    const std::uint8_t dist = r.u8("entry distribution");
    if (dist > std::uint8_t(Distribution::binary)) {
      throw Error(ErrorCode::BadMagic, "unknown distribution code " + std::to_string(dist));
    }
    e.distribution = Distribution(dist);
    e.ground_truth = r.f32s(hw, "ground truth");
    e.buckets = r.f32s(ds.samples, "buckets");
    const std::uint8_t flag = r.u8("planes flag");
    if (flag > std::uint8_t(PlaneStorage::motion_compensated)) {
      throw Error(ErrorCode::BadMagic, "unknown planes flag " + std::to_string(flag));
    }
    e.planes_included = PlaneStorage(flag);
    if (e.planes_included != PlaneStorage::none) {
      e.planes = r.f32s(hw * ds.samples, "planes");
    }
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

void write_container_streamed(const std::filesystem::path& path, std::uint32_t height,
                              std::uint32_t width, std::uint32_t samples,
                              const std::vector<StreamedEntry>& entries) {
  const std::size_t hw = std::size_t(height) * width;
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string());
  auto flush = [&](Writer& w) {
    const std::string chunk = w.take();
    out.write(chunk.data(), std::streamsize(chunk.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
  };
  try {
    Writer w;
    w.bytes(kContainerMagic, 4);
    w.u16(kContainerVersion);
    w.u32(height);
    w.u32(width);
    w.u32(samples);
    w.u32(std::uint32_t(entries.size()));
    flush(w);
    std::vector<float> plane;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const StreamedEntry& e = entries[k];
      if (e.ground_truth.size() != hw || e.buckets.size() != samples) {
        throw Error(ErrorCode::LengthMismatch,
                    "entry " + std::to_string(k) + " does not match the container's H, W, m");
      }
      w.u32(std::uint32_t(e.object_id.size()));
      w.bytes(e.object_id.data(), e.object_id.size());
      w.u64(e.speckle_seed);
      w.u8(std::uint8_t(e.distribution));
      w.f32s(e.ground_truth);
      w.f32s(e.buckets);
      w.u8(std::uint8_t(e.planes_included));
      flush(w);
      if (e.planes_included == PlaneStorage::none) continue;
      for (std::size_t i = 0; i < samples; ++i) {
        plane.clear();
        e.plane(i, plane);
        if (plane.size() != hw) {
          throw Error(ErrorCode::LengthMismatch, "streamed plane " + std::to_string(i) +
                                                     " has the wrong size");
        }
        w.f32s(plane);
        flush(w);
      }
    }
    out.close();
    if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    std::filesystem::rename(tmp, path);
  } catch (...) {
    out.close();
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

void write_container(const std::filesystem::path& path, const Dataset& dataset) {
  write_file_atomic(path, encode_container(dataset));
}

Dataset read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  return decode_container(bytes);
}

DatasetEntry entry_from_gf(const GroupFrame& gf, const Image& ground_truth, bool include_planes) {
  if (ground_truth.height() != gf.height() || ground_truth.width() != gf.width()) {
    throw Error(ErrorCode::DimensionMismatch, "ground truth shape differs from the frame");
  }
  DatasetEntry e;
  e.object_id = gf.object_id();
  e.speckle_seed = gf.speckle_seed();
  e.distribution = gf.distribution();
  e.ground_truth = to_floats(ground_truth);
  e.buckets.assign(gf.buckets().values.begin(), gf.buckets().values.end());
  if (!gf.seed_regenerable()) {
    e.planes_included = PlaneStorage::motion_compensated;
  } else if (include_planes || gf.has_stored_planes()) {
    e.planes_included = PlaneStorage::stored;
  }
  if (e.planes_included != PlaneStorage::none) {
    e.planes.reserve(gf.size() * gf.height() * gf.width());
    for (std::size_t i = 0; i < gf.size(); ++i) {
      const Image plane = gf.plane(i);
      e.planes.insert(e.planes.end(), plane.data().begin(), plane.data().end());
    }
  }
  return e;
}

Image ground_truth_image(const DatasetEntry& entry, const Dataset& dataset) {
  return Image(dataset.height, dataset.width,
               std::vector<double>(entry.ground_truth.begin(), entry.ground_truth.end()));
}

GroupFrame gf_from_entry(const DatasetEntry& entry, const Dataset& dataset,
                         std::shared_ptr<const SpeckleSet> speckles) {
  const std::size_t h = dataset.height;
  const std::size_t w = dataset.width;
  const std::size_t m = dataset.samples;
  BucketSequence buckets{std::vector<double>(entry.buckets.begin(), entry.buckets.end())};
  std::vector<Image> planes;
  if (entry.planes_included != PlaneStorage::none) {
    planes.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      const auto first = entry.planes.begin() + std::ptrdiff_t(i * h * w);
      planes.emplace_back(h, w, std::vector<double>(first, first + std::ptrdiff_t(h * w)));
    }
  }
  if (entry.planes_included == PlaneStorage::motion_compensated) {
    return GroupFrame::from_planes_only(std::move(buckets), std::move(planes), entry.speckle_seed,
                                        entry.distribution, entry.object_id);
  }
  const bool reusable = speckles && speckles->seed() == entry.speckle_seed &&
                        speckles->distribution() == entry.distribution &&
                        speckles->size() == m && speckles->height() == h &&
                        speckles->width() == w;
  if (!reusable) speckles = make_shared_speckles(entry.speckle_seed, m, h, w, entry.distribution);
  if (entry.planes_included == PlaneStorage::stored) {
    return GroupFrame::with_stored_planes(std::move(speckles), std::move(buckets),
                                          std::move(planes), entry.object_id);
  }
  return GroupFrame(std::move(speckles), std::move(buckets), entry.object_id);
}

std::vector<BatchGroupFrame> batches_from_dataset(const Dataset& dataset) {
  std::vector<BatchGroupFrame> batches;
  std::shared_ptr<const SpeckleSet> speckles;
  for (const DatasetEntry& e : dataset.entries) {
    if (batches.empty() || batches.back().speckle_seed != e.speckle_seed) {
      BatchGroupFrame next;
      next.speckle_seed = e.speckle_seed;
      next.batch_index = batches.size();
      batches.push_back(std::move(next));
      speckles.reset();
    }
    GroupFrame gf = gf_from_entry(e, dataset, speckles);
    speckles = gf.speckles();
    batches.back().frames.push_back(std::move(gf));
  }
  return batches;
}

}  // namespace ghostsim
