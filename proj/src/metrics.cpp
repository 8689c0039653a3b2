#include "ghostsim/metrics.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ghostsim/error.hpp"
#include "ghostsim/fileutil.hpp"

namespace ghostsim {
namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kPeak = 255.0;
constexpr double kC1 = (0.01 * kPeak) * (0.01 * kPeak);
constexpr double kC2 = (0.03 * kPeak) * (0.03 * kPeak);

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> taps{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = double(i - kWindow / 2);
    taps[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += taps[i];
  }
  for (double& t : taps) t /= total;
  return taps;
}

// Separable Gaussian filter keeping only fully covered positions.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& taps) {
  const std::size_t oh = h - kWindow + 1;
  const std::size_t ow = w - kWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * src[r * w + c + k];
      rows[r * ow + c] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[(r + k) * ow + c];
      out[r * ow + c] = acc;
    }
  }
  return out;
}

}  // namespace

Image to_display_range(const Image& img) { return scaled(normalize_minmax(img), kPeak); }

double psnr(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "psnr");
  double se = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference.pixels()[i] - test.pixels()[i];
    se += d * d;
  }
  if (se == 0.0) return kIdenticalPsnr;
  const double mse = se / double(reference.size());
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

double ssim(const Image& reference, const Image& test) {
  require_same_shape(reference, test, "ssim");
  const std::size_t h = reference.height();
  const std::size_t w = reference.width();
  if (h < std::size_t(kWindow) || w < std::size_t(kWindow)) {
    throw Error(ErrorCode::TooSmall, "SSIM needs images of at least 11x11");
  }
  const auto taps = gaussian_taps();
  const std::vector<double>& x = reference.data();
  const std::vector<double>& y = test.data();
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, h, w, taps);
  const auto mu_y = filter_valid(y, h, w, taps);
  const auto e_xx = filter_valid(xx, h, w, taps);
  const auto e_yy = filter_valid(yy, h, w, taps);
  const auto e_xy = filter_valid(xy, h, w, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
             ((mx * mx + my * my + kC1) * (vx + vy + kC2));
  }
  return total / double(mu_x.size());
}

QualityReport assess(const Image& reference, const Image& test, std::string pair_id) {
  const Image ref = to_display_range(reference);
  const Image out = to_display_range(test);
  return QualityReport{std::move(pair_id), psnr(ref, out), ssim(ref, out)};
}

std::string format_psnr(double psnr_db) {
  if (std::isinf(psnr_db)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << psnr_db;
  return os.str();
}

void write_reports_csv(const std::filesystem::path& path, const std::vector<QualityReport>& rows) {
  std::ostringstream os;
  os << "pair_id,psnr_db,ssim\n";
  for (const QualityReport& r : rows) {
    os << r.pair_id << ',' << format_psnr(r.psnr_db) << ',' << std::fixed << std::setprecision(9)
       << r.ssim << '\n';
  }
  write_file_atomic(path, os.str());
}

}  // namespace ghostsim
