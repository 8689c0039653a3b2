#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "ghostsim/digits.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/metrics.hpp"

using namespace ghostsim;

namespace {

// Deterministic 16x20 fixtures; scikit-image's structural_similarity
// (gaussian_weights, sigma 1.5, population covariance, data_range 255) gives
// the reference values below for the same arrays.
Image fixture_a() {
  Image img(16, 20);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 20; ++x) img(y, x) = double((37 * y + 11 * x) % 256);
  return img;
}

Image fixture_b() {
  Image img(16, 20);
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 20; ++x) img(y, x) = double((13 * y * y + 7 * x) % 256);
  return img;
}

Image fixture_c() {
  Image img = fixture_a();
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 20; ++x)
      img(y, x) = std::clamp(img(y, x) + double((5 * x * y) % 21) - 10.0, 0.0, 255.0);
  return img;
}

Image noisy(const Image& base, double amplitude, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Image out = base;
  for (double& v : out.pixels()) v += amplitude * n(rng);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("psnr fixtures") {
  const Image a(8, 8, 255.0);
  const Image b(8, 8, 254.0);
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(65025.0)));
  CHECK(std::abs(psnr(a, b) - 48.13) <= 0.01);
  CHECK(psnr(a, a) == kIdenticalPsnr);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(format_psnr(psnr(a, a)) == "inf");
  CHECK_THROWS_AS(psnr(a, Image(8, 9)), Error);
}

TEST_CASE("psnr is symmetric and falls with noise") {
  const Image ref = to_display_range(render_digit(5, 32));
  double previous = std::numeric_limits<double>::infinity();
  for (double amp : {1.0, 4.0, 10.0, 25.0, 60.0}) {
    const Image test = noisy(ref, amp, 17);
    const double v = psnr(ref, test);
    CHECK(v == psnr(test, ref));
    CHECK(v < previous);
    previous = v;
  }
}

TEST_CASE("ssim matches reference values") {
  CHECK(ssim(fixture_a(), fixture_b()) == doctest::Approx(-0.04229027096850276).epsilon(1e-9));
  CHECK(ssim(fixture_a(), fixture_c()) == doctest::Approx(0.9958731684880231).epsilon(1e-9));
}

TEST_CASE("ssim identity, symmetry and bounds") {
  const Image g = to_display_range(render_digit(3, 64));
  CHECK(std::abs(ssim(g, g) - 1.0) <= 1e-9);
  const Image n = noisy(g, 30.0, 3);
  CHECK(ssim(g, n) == doctest::Approx(ssim(n, g)).epsilon(1e-12));
  CHECK(ssim(g, n) < 1.0);
  CHECK(ssim(g, n) >= -1.0);
}

TEST_CASE("inverted digit scores negative") {
  const Image g = to_display_range(render_digit(4, 64));
  const Image inverted = axpy(Image(64, 64, 255.0), -1.0, g);
  CHECK(ssim(g, inverted) < 0.0);
}

TEST_CASE("ssim needs an 11x11 window") {
  CHECK_THROWS_AS(ssim(Image(10, 20), Image(10, 20)), Error);
  CHECK_NOTHROW(ssim(Image(11, 11, 1.0), Image(11, 11, 1.0)));
  CHECK_THROWS_AS(ssim(Image(12, 12), Image(12, 13)), Error);
}

TEST_CASE("assess scales each image independently") {
  const Image digit = render_digit(2, 32);
  // Affine maps disappear under min-max, up to rounding.
  const QualityReport r = assess(digit, axpy(Image(32, 32, 7.0), 3.0, digit), "pair");
  CHECK(r.pair_id == "pair");
  CHECK(r.psnr_db > 200.0);
  CHECK(r.ssim == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("report csv") {
  const auto path = std::filesystem::temp_directory_path() / "ghostsim_reports.csv";
  write_reports_csv(path, {{"a", 12.5, 0.25}, {"b", kIdenticalPsnr, 1.0}});
  const std::string text = slurp(path);
  CHECK(text.rfind("pair_id,psnr_db,ssim\n", 0) == 0);
  CHECK(text.find("a,12.5") != std::string::npos);
  CHECK(text.find("b,inf,1") != std::string::npos);
  std::filesystem::remove(path);
}
