#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ghostsim/digits.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/fma.hpp"
#include "ghostsim/metrics.hpp"

using namespace ghostsim;

namespace {

// Two off-centre Gaussian blobs: smooth, and not rotationally symmetric.
Image blobs(std::size_t size) {
  Image img(size, size);
  const double c = double(size - 1) / 2.0;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t col = 0; col < size; ++col) {
      const double x = double(col) - c, y = double(r) - c;
      img(r, col) = std::exp(-((x - 14) * (x - 14) + (y - 4) * (y - 4)) / 8.0) +
                    0.6 * std::exp(-((x + 6) * (x + 6) + (y + 13) * (y + 13)) / 6.0);
    }
  }
  return img;
}

Image uniform_noise(std::size_t size, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(size, size);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

Image interior(const Image& img, std::size_t margin) {
  Image out(img.height() - 2 * margin, img.width() - 2 * margin);
  for (std::size_t r = 0; r < out.height(); ++r)
    for (std::size_t c = 0; c < out.width(); ++c) out(r, c) = img(r + margin, c + margin);
  return out;
}

std::vector<BatchGroupFrame> small_run(double omega, std::size_t frames, std::size_t batches,
                                       std::size_t m, std::size_t size = 32) {
  const RotationTrajectory traj{omega, 4.0, frames, batches, 0.0};
  return simulate_rotation_bgfs(render_digit(7, size), traj, m, 77);
}

}  // namespace

TEST_CASE("normalized correlation of an image with itself") {
  const Image g = blobs(48);
  CHECK(ccg(g, g, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ccf(g, g, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  for (double d : {-20.0, -3.0, 5.0, 40.0}) CHECK(ccg(g, g, d) <= 1.0 + 1e-9);
  CHECK_THROWS_AS(ccg(g, Image(48, 48, 2.0), 0.0), Error);
  CHECK_THROWS_AS(ccg(g, Image(48, 47, 2.0), 0.0), Error);
}

TEST_CASE("correlation peaks at the true rotation") {
  const Image g1 = blobs(48);
  const Image g2 = rotate(g1, 7.0);
  const double at_truth = ccg(g1, g2, 7.0);
  for (int d = -20; d <= 20; ++d) {
    if (d == 7) continue;
    CHECK(at_truth > ccg(g1, g2, double(d)) + 1e-3);
  }
}

TEST_CASE("independent noise images barely correlate") {
  const AngleGrid grid{-10.0, 10.0, 1.0};
  for (unsigned seed = 1; seed <= 10; ++seed) {
    for (const CurvePoint& p : correlation_curve(uniform_noise(64, seed), uniform_noise(64, seed + 100), grid)) {
      CHECK(std::abs(p.score) < 0.1);
    }
  }
}

TEST_CASE("grid search recovers rotation between reconstructions") {
  const Image g1 = blobs(48);
  const AngleGrid grid{0.0, 45.0, 0.5};
  CHECK(estimate_angle(g1, g1, grid).angle_deg == 0.0);
  const AngleEstimate est = estimate_angle(g1, rotate(g1, 15.0), grid);
  CHECK(std::abs(est.angle_deg - 15.0) <= 0.5);
  CHECK(est.curve.size() == 91);
  for (const CurvePoint& p : est.curve) CHECK(p.score <= est.score);
}

TEST_CASE("low-sample reconstructions still return the curve argmax") {
  const Image object = render_digit(2, 32);
  const SpeckleSet s1 = gen_speckle_set(1, 10, 32, 32);
  const SpeckleSet s2 = gen_speckle_set(2, 10, 32, 32);
  const GhostImage a = gi(s1, measure_buckets(object, s1));
  const GhostImage b = gi(s2, measure_buckets(rotate(object, 5.0), s2));
  const AngleEstimate est = estimate_angle_gi(a, b, AngleGrid{-10.0, 10.0, 0.5});
  const auto best = std::max_element(est.curve.begin(), est.curve.end(),
                                     [](const CurvePoint& x, const CurvePoint& y) {
                                       return x.score < y.score;
                                     });
  CHECK(est.score == best->score);
}

TEST_CASE("argmax ties prefer the smallest magnitude, then the smaller angle") {
  CHECK(argmax_curve({{-2, 0.5}, {1, 0.5}, {3, 0.5}}).angle_deg == 1.0);
  CHECK(argmax_curve({{-1, 0.5}, {1, 0.5}}).angle_deg == -1.0);
  CHECK(argmax_curve({{1, 0.5}, {-1, 0.5}}).angle_deg == -1.0);
  CHECK(argmax_curve({{4, 0.9}, {0, 0.5}}).angle_deg == 4.0);
  CHECK_THROWS_AS(argmax_curve({}), Error);
}

TEST_CASE("angle grid") {
  const auto c = AngleGrid{0.0, 12.0, 0.05}.candidates();
  CHECK(c.size() == 241);
  CHECK(c.back() == doctest::Approx(12.0));
  CHECK(AngleGrid{2.0, 2.0, 1.0}.candidates().size() == 1);
  CHECK_THROWS_AS((AngleGrid{0.0, 1.0, 0.0}.validate()), Error);
  CHECK_THROWS_AS((AngleGrid{2.0, 1.0, 0.1}.validate()), Error);
  CHECK_THROWS_AS((AngleGrid{0.0, NAN, 0.1}.validate()), Error);
}

TEST_CASE("constant offsets do not move the estimate") {
  const Image g1 = blobs(48);
  const Image g2 = rotate(g1, 6.0);
  const AngleGrid grid{0.0, 12.0, 0.25};
  const double plain = estimate_angle(g1, g2, grid).angle_deg;
  const Image one(48, 48, 1.0);
  CHECK(estimate_angle(axpy(g1, 3.0, one), axpy(g2, 3.0, one), grid).angle_deg == plain);
}

TEST_CASE("stationary object gives zero rotation") {
  const auto bgfs = small_run(0.0, 8, 1, 256);
  const AngleGrid grid{0.0, 5.0, 0.05};
  CHECK(estimate_frame_angle(bgfs[0], 0, 4, grid, FramePairing::frame_gi).alpha_deg == 0.0);
  CHECK(estimate_frame_angle(bgfs[0], 1, 3, grid, FramePairing::matched_planes).alpha_deg == 0.0);
}

TEST_CASE("frame pairs cover the requested span") {
  const auto bgfs = small_run(0.25, 10, 1, 64);
  const FrameAngleEstimate est =
      estimate_frame_angle(bgfs[0], 2, 5, AngleGrid{0.0, 4.0, 0.5});
  CHECK(est.span == 3);
  // Frames (2,5) .. (4,7), each in both half orders.
  CHECK(est.pairs.size() == 6);
  double total = 0.0;
  for (const FramePair& p : est.pairs) {
    CHECK(p.second - p.first == 3);
    total += p.estimate.angle_deg;
  }
  CHECK(est.alpha_deg == doctest::Approx(total / 6.0 / 3.0));
  CHECK_THROWS_AS(estimate_frame_angle(bgfs[0], 5, 5, AngleGrid{0.0, 1.0, 0.5}), Error);
  CHECK_THROWS_AS(estimate_frame_angle(bgfs[0], 5, 10, AngleGrid{0.0, 1.0, 0.5}), Error);
}

TEST_CASE("per-frame angle does not depend on the span") {
  const RotationTrajectory traj{0.0375, 4.0, 100, 1, 0.0};
  const auto bgfs = simulate_rotation_bgfs(render_digit(7, 64), traj, 2048, 5);
  const AngleGrid grid{0.0, 12.0, 0.05};
  const double a = estimate_frame_angle(bgfs[0], 0, 25, grid).alpha_deg;
  const double b = estimate_frame_angle(bgfs[0], 0, 50, grid).alpha_deg;
  CHECK(std::abs(a - 0.15) <= 0.05);
  CHECK(std::abs(a - b) <= 0.05);
}

TEST_CASE("merging with zero angle is concatenation") {
  const auto bgfs = small_run(0.5, 6, 2, 16, 24);
  const MergedGroupFrame within = fma_merge_within(bgfs[0], 0.0);
  CHECK(within.size() == 3 * 16);
  for (std::size_t j : {0u, 17u, 47u}) {
    CHECK(within.plane(j) == bgfs[0].frames[j / 16].plane(j % 16));
  }
  BucketSequence expected;
  for (const auto& f : bgfs[0].frames) {
    expected.values.insert(expected.values.end(), f.buckets().values.begin(),
                           f.buckets().values.end());
  }
  CHECK(within.buckets() == expected);

  const MergedGroupFrame naive = concatenate_unaligned(bgfs);
  CHECK(naive.size() == 6 * 16);
  CHECK(naive.provenance().size() == naive.size());
  CHECK(naive.provenance()[50].batch_index == 1);
  CHECK(naive.provenance()[50].frame_index == 0);
}

TEST_CASE("single-frame batch merges to itself") {
  const auto bgfs = small_run(0.5, 1, 1, 16, 16);
  const MergedGroupFrame merged = fma_merge_within(bgfs[0], 1.3);
  REQUIRE(merged.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) CHECK(merged.plane(i) == bgfs[0].frames[0].plane(i));
  CHECK(gi_merged(merged).image == frame_gi(bgfs[0].frames[0]).image);
}

TEST_CASE("merge rotations follow the global frame index") {
  const auto bgfs = small_run(0.5, 9, 3, 8, 16);
  const MergedGroupFrame across = fma_merge_across(bgfs, 0.4, FrameRef{1, 1});
  CHECK(across.size() == 72);
  // Frame (1,1) is global frame 4: frame g turns by -(g - 4) * alpha.
  for (const auto& seg : across.segments()) {
    const double g = double(seg.batch_index * 3 + seg.frame_index);
    CHECK(seg.rotation_deg == doctest::Approx(-(g - 4.0) * 0.4));
  }
  const MergedGroupFrame single = fma_merge_across({bgfs[0]}, 0.4, FrameRef{0, 0});
  const MergedGroupFrame within = fma_merge_within(bgfs[0], 0.4);
  CHECK(gi_merged(single).image == gi_merged(within).image);
  CHECK(single.plane(20) == within.plane(20));

  CHECK_THROWS_AS(fma_merge_across(bgfs, 0.4, FrameRef{3, 0}), Error);
  CHECK_THROWS_AS(fma_merge_across(bgfs, 0.4, FrameRef{0, 3}), Error);
  CHECK_THROWS_AS(fma_merge_within(bgfs[0], 0.4, 3), Error);
  CHECK_THROWS_AS(fma_merge_across({}, 0.4, FrameRef{0, 0}), Error);
}

TEST_CASE("merged reconstruction equals the brute-force stack estimator") {
  const auto bgfs = small_run(0.5, 4, 2, 12, 16);
  const MergedGroupFrame merged = fma_merge_across(bgfs, 1.7, FrameRef{0, 1});
  std::vector<Image> planes, patterns;
  for (std::size_t j = 0; j < merged.size(); ++j) {
    planes.push_back(merged.plane(j));
    patterns.push_back(merged.pattern(j));
  }
  const Image brute = gi_from_stacks(planes, patterns, merged.buckets()).image;
  const Image fast = gi_merged(merged).image;
  CHECK(max_abs_diff(brute, fast) < 1e-10);

  const GroupFrame flat = merged.materialize("m");
  CHECK_FALSE(flat.seed_regenerable());
  CHECK(flat.size() == merged.size());
  CHECK(max_abs_diff(gi_from_gf(flat).image, fast) < 1e-10);
}

TEST_CASE("merge order does not change the canonical result") {
  const auto bgfs = small_run(0.5, 6, 2, 8, 16);
  const double alpha = 0.9;
  const MergedGroupFrame ordered = fma_merge_across(bgfs, alpha, FrameRef{0, 0});
  std::vector<FrameRotation> list;
  for (const auto& seg : ordered.segments()) {
    list.push_back({{seg.batch_index, seg.frame_index},
                    &bgfs[seg.batch_index].frames[seg.frame_index], seg.rotation_deg});
  }
  std::mt19937 rng(4);
  std::shuffle(list.begin(), list.end(), rng);
  const MergedGroupFrame shuffled = merge_frames(list, FrameRef{0, 0});
  CHECK(gi_merged(shuffled.canonicalized()).image == gi_merged(ordered).image);
  CHECK(shuffled.canonicalized().buckets() == ordered.buckets());
}

TEST_CASE("changing the base rotates the merged reconstruction rigidly") {
  const std::size_t size = 48;
  const RotationTrajectory traj{0.25, 4.0, 30, 3, 0.0};
  const auto bgfs = simulate_rotation_bgfs(render_digit(3, size), traj, 512, 31);
  const double alpha = traj.step_deg();
  const Image first = gi_merged(fma_merge_across(bgfs, alpha, FrameRef{0, 0})).image;
  const Image last = gi_merged(fma_merge_across(bgfs, alpha, FrameRef{2, 9})).image;
  const Image back = rotate(last, -29.0 * alpha);
  const double score = assess(interior(first, 12), interior(back, 12)).ssim;
  CHECK(score >= 0.9);
}

TEST_CASE("curve csv files") {
  const auto dir = std::filesystem::temp_directory_path();
  write_curve_csv(dir / "ghostsim_curve.csv", {{0.0, 0.5}, {0.05, 0.25}});
  std::ifstream in(dir / "ghostsim_curve.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "candidate_deg,score\n0,0.5\n0.05,0.25\n");
  std::filesystem::remove(dir / "ghostsim_curve.csv");
}
