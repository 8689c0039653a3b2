#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ghostsim/image.hpp"

namespace ghostsim {

/// PSNR of two identical images. Serialized as "inf", never as a number.
inline constexpr double kIdenticalPsnr = std::numeric_limits<double>::infinity();

/// Min-max to [0, 1] then x255: the scale both metrics expect.
Image to_display_range(const Image& img);

/// 10 log10(255^2 / MSE) on images already in [0, 255]. Returns
/// kIdenticalPsnr when MSE is 0. Throws DimensionMismatch.
double psnr(const Image& reference, const Image& test);

/// Mean structural similarity, 11x11 Gaussian window (sigma 1.5) over the
/// valid region, K1 = 0.01, K2 = 0.03, L = 255. Throws DimensionMismatch,
/// TooSmall (either extent below 11).
double ssim(const Image& reference, const Image& test);

struct QualityReport {
  std::string pair_id;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// Maps both images to display range independently, then scores them.
QualityReport assess(const Image& reference, const Image& test, std::string pair_id = {});

/// "inf" for identical images, otherwise fixed notation.
std::string format_psnr(double psnr_db);

/// Writes `pair_id,psnr_db,ssim` with a header row.
void write_reports_csv(const std::filesystem::path& path, const std::vector<QualityReport>& rows);

}  // namespace ghostsim
