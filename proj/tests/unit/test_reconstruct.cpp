#include <cmath>

#include "doctest.h"
#include "ghostsim/digits.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/metrics.hpp"
#include "ghostsim/reconstruct.hpp"

using namespace ghostsim;

namespace {

// Textbook two-pass covariance with divisor m, written independently of the
// library's accumulator.
Image covariance_oracle(const SpeckleSet& set, const BucketSequence& s, std::size_t m) {
  double s_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) s_mean += s[i];
  s_mean /= double(m);
  Image out(set.height(), set.width());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double i_mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) i_mean += set.pattern_pixels(i)[p];
    i_mean /= double(m);
    double cov = 0.0;
    for (std::size_t i = 0; i < m; ++i) cov += (s[i] - s_mean) * (set.pattern_pixels(i)[p] - i_mean);
    out.pixels()[p] = cov / double(m);
  }
  return out;
}

}  // namespace

TEST_CASE("gi is the per-pixel population covariance") {
  const SpeckleSet set = gen_speckle_set(21, 50, 12, 12);
  const BucketSequence s = measure_buckets(rotate(Image(12, 12, 1.0), 10.0), set);
  const GhostImage g = gi(set, s);
  CHECK(g.m_used == 50);
  CHECK_FALSE(g.normalized);
  CHECK(max_abs_diff(g.image, covariance_oracle(set, s, 50)) < 1e-12);
}

TEST_CASE("constant buckets give a zero image") {
  const SpeckleSet set = gen_speckle_set(4, 20, 8, 8);
  const BucketSequence s{std::vector<double>(20, 3.5)};
  CHECK(std::abs(max_value(gi(set, s).image)) < 1e-12);
  CHECK(std::abs(min_value(gi(set, s).image)) < 1e-12);
}

TEST_CASE("delta object is recovered at its pixel") {
  const SpeckleSet set = gen_speckle_set(42, 4096, 16, 16);
  Image delta(16, 16);
  delta(5, 11) = 1.0;
  const GhostImage g = gi(set, measure_buckets(delta, set));
  std::size_t best = 0;
  for (std::size_t p = 0; p < g.image.size(); ++p) {
    if (g.image.data()[p] > g.image.data()[best]) best = p;
  }
  CHECK(best == 5 * 16 + 11);
}

TEST_CASE("gi argument errors") {
  const SpeckleSet set = gen_speckle_set(1, 4, 4, 4);
  CHECK_THROWS_AS(gi(set, BucketSequence{{1, 2, 3}}), Error);
  const SpeckleSet one = gen_speckle_set(1, 1, 4, 4);
  try {
    gi(one, BucketSequence{{1}});
    FAIL("single sample accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewSamples);
  }
}

TEST_CASE("gi_from_gf agrees with gi") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto set = make_shared_speckles(seed, 64, 24, 24, seed % 2 ? Distribution::uniform01
                                                                : Distribution::binary);
    const GroupFrame gf = make_gf(render_digit(int(seed), 24), set);
    const Image a = gi_from_gf(gf).image;
    const Image b = gi(*set, gf.buckets()).image;
    CHECK(max_abs_diff(a, b) < 1e-10);
    CHECK(max_abs_diff(frame_gi(gf).image, b) < 1e-10);
  }
}

TEST_CASE("zero object reconstructs to zero") {
  auto set = make_shared_speckles(3, 16, 8, 8, Distribution::uniform01);
  const GroupFrame gf = make_gf(Image(8, 8), set);
  CHECK(max_value(gi_from_gf(gf).image) == 0.0);
  CHECK(min_value(gi_from_gf(gf).image) == 0.0);
}

TEST_CASE("tampered stored planes are detected") {
  auto set = make_shared_speckles(6, 16, 8, 8, Distribution::uniform01);
  const GroupFrame gf = make_gf(rotate(Image(8, 8, 1.0), 30.0), set);
  std::vector<Image> planes;
  for (std::size_t i = 0; i < gf.size(); ++i) planes.push_back(gf.plane(i));
  GroupFrame stored = GroupFrame::with_stored_planes(set, gf.buckets(), planes);
  CHECK_NOTHROW(gi_from_gf(stored));

  Image bad = planes[5];
  bad(3, 3) += 0.25;
  stored.overwrite_plane(5, bad);
  try {
    gi_from_gf(stored);
    FAIL("tampered plane accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptGF);
  }
}

TEST_CASE("planes-only frames recover patterns by division") {
  auto set = make_shared_speckles(8, 32, 10, 10, Distribution::uniform01);
  const GroupFrame gf = make_gf(Image(10, 10, 0.3), set);
  std::vector<Image> planes;
  for (std::size_t i = 0; i < gf.size(); ++i) planes.push_back(gf.plane(i));
  const GroupFrame loose = GroupFrame::from_planes_only(gf.buckets(), planes, 8,
                                                        Distribution::uniform01);
  CHECK_FALSE(loose.seed_regenerable());
  CHECK(max_abs_diff(gi_from_gf(loose).image, gi(*set, gf.buckets()).image) < 1e-12);
}

TEST_CASE("progressive reconstructions match truncated inputs exactly") {
  const SpeckleSet set = gen_speckle_set(12, 40, 9, 9);
  const BucketSequence s = measure_buckets(Image(9, 9, 1.0), set);
  const auto prog = gi_progressive(set, s, {2, 17, 40});
  REQUIRE(prog.size() == 3);
  CHECK(prog[2].image == gi(set, s).image);
  for (std::size_t k : {0u, 1u}) {
    const std::size_t m = prog[k].m_used;
    const SpeckleSet prefix = gen_speckle_set(12, m, 9, 9);
    const BucketSequence sp{std::vector<double>(s.values.begin(), s.values.begin() + long(m))};
    CHECK(prog[k].image == gi(prefix, sp).image);
  }
  CHECK_THROWS_AS(gi_progressive(set, s, {}), Error);
  CHECK_THROWS_AS(gi_progressive(set, s, {1, 5}), Error);
  CHECK_THROWS_AS(gi_progressive(set, s, {5, 5}), Error);
  CHECK_THROWS_AS(gi_progressive(set, s, {41}), Error);
}

TEST_CASE("speckle scaling leaves the normalized image unchanged") {
  const SpeckleSet set = gen_speckle_set(30, 64, 16, 16);
  const Image object = render_digit(9, 16);
  const BucketSequence s = measure_buckets(object, set);
  const double c = 3.0;
  // Scaling every pattern by c scales every bucket by c; compare via stacks.
  std::vector<Image> planes, patterns, planes_c, patterns_c;
  BucketSequence s_c;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Image p = set.pattern_image(i);
    patterns.push_back(p);
    planes.push_back(scaled(p, s[i]));
    patterns_c.push_back(scaled(p, c));
    planes_c.push_back(scaled(p, c * c * s[i]));
    s_c.values.push_back(c * s[i]);
  }
  const Image g = gi_from_stacks(planes, patterns, s).image;
  const Image g_c = gi_from_stacks(planes_c, patterns_c, s_c).image;
  CHECK(max_abs_diff(scaled(g, c * c), g_c) < 1e-9 * std::max(1.0, max_value(g_c)));
  CHECK(max_abs_diff(normalize_minmax(g), normalize_minmax(g_c)) < 1e-9);
  CHECK(max_abs_diff(g, gi(set, s).image) < 1e-12);
}

TEST_CASE("object offset is harmless on average") {
  const Image object = render_digit(6, 64);
  const Image offset = axpy(object, 0.2, Image(64, 64, 1.0));
  double plain = 0.0, shifted = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SpeckleSet set = gen_speckle_set(seed * 7, 1024, 64, 64);
    plain += assess(object, gi(set, measure_buckets(object, set)).image).ssim;
    shifted += assess(object, gi(set, measure_buckets(offset, set)).image).ssim;
  }
  CHECK(std::abs(plain - shifted) / 10.0 <= 0.02);
}

TEST_CASE("batched subsets and plane sums match the single-frame paths") {
  auto set = make_shared_speckles(14, 40, 12, 12, Distribution::uniform01);
  const GroupFrame a = make_gf(rotate(Image(12, 12, 1.0), 20.0), set);
  const GroupFrame b = make_gf(Image(12, 12, 0.5), set);
  const auto batched = frame_gi_subsets({&a, &b}, 5, 31);
  CHECK(max_abs_diff(batched[0].image, frame_gi_subset(a, 5, 31).image) < 1e-12);
  CHECK(max_abs_diff(batched[1].image, frame_gi_subset(b, 5, 31).image) < 1e-12);
  const auto sums = plane_sums({&a, &b});
  CHECK(max_abs_diff(sums[0], a.plane_sum()) < 1e-12);
  CHECK(max_abs_diff(sums[1], b.plane_sum()) < 1e-12);

  auto other = make_shared_speckles(15, 40, 12, 12, Distribution::uniform01);
  const GroupFrame c = make_gf(Image(12, 12, 0.5), other);
  CHECK_THROWS_AS(frame_gi_subsets({&a, &c}, 0, 10), Error);
  CHECK_THROWS_AS(frame_gi_subset(a, 3, 4), Error);
}

TEST_CASE("normalized copy lies in [0, 1]") {
  const SpeckleSet set = gen_speckle_set(2, 32, 16, 16);
  const GhostImage n = gi(set, measure_buckets(render_digit(2, 16), set)).normalized_copy();
  CHECK(n.normalized);
  CHECK(min_value(n.image) == 0.0);
  CHECK(max_value(n.image) == 1.0);
}
