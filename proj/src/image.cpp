#include "ghostsim/image.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ghostsim/error.hpp"

namespace ghostsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConstantImage: return "ConstantImage";
    case ErrorCode::ZeroDimension: return "ZeroDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::CorruptGF: return "CorruptGF";
    case ErrorCode::BadCheckpoints: return "BadCheckpoints";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidBGF: return "InvalidBGF";
    case ErrorCode::BadBase: return "BadBase";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::BadPgm: return "BadPgm";
  }
  return "Unknown";
}

Image::Image(std::size_t height, std::size_t width) : Image(height, width, 0.0) {}

Image::Image(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width) {
  if (height == 0 || width == 0) {
    throw Error(ErrorCode::ZeroDimension, "image extents must be at least 1x1");
  }
  data_.assign(height * width, fill);
}

Image::Image(std::size_t height, std::size_t width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height == 0 || width == 0) {
    throw Error(ErrorCode::ZeroDimension, "image extents must be at least 1x1");
  }
  if (data_.size() != height * width) {
    throw Error(ErrorCode::LengthMismatch,
                "pixel buffer holds " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(height * width));
  }
}

void require_same_shape(const Image& a, const Image& b, const char* context) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(context) + ": " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                    std::to_string(b.width()));
  }
}

double sum(const Image& img) {
  double acc = 0.0;
  for (double v : img.pixels()) acc += v;
  return acc;
}

double mean(const Image& img) { return img.empty() ? 0.0 : sum(img) / double(img.size()); }

double min_value(const Image& img) {
  return img.empty() ? 0.0 : *std::min_element(img.data().begin(), img.data().end());
}

double max_value(const Image& img) {
  return img.empty() ? 0.0 : *std::max_element(img.data().begin(), img.data().end());
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a, b, "dot");
  const auto x = a.pixels();
  const auto y = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.pixels()[i] - b.pixels()[i]));
  }
  return worst;
}

Image scaled(const Image& img, double factor) {
  Image out = img;
  for (double& v : out.pixels()) v *= factor;
  return out;
}

Image added(const Image& a, const Image& b) { return axpy(a, 1.0, b); }

Image axpy(const Image& a, double factor, const Image& b) {
  require_same_shape(a, b, "axpy");
  Image out = a;
  auto dst = out.pixels();
  const auto src = b.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * src[i];
  return out;
}

Image gaussian_blur(const Image& img, double sigma_px) {
  if (!(sigma_px > 0.0) || img.empty()) return img;
  const int radius = int(std::ceil(3.0 * sigma_px));
  std::vector<double> taps(std::size_t(2 * radius + 1));
  for (int k = -radius; k <= radius; ++k) {
    taps[std::size_t(k + radius)] = std::exp(-double(k * k) / (2.0 * sigma_px * sigma_px));
  }
  const auto h = std::ptrdiff_t(img.height());
  const auto w = std::ptrdiff_t(img.width());
  auto pass = [&](const Image& src, bool along_rows) {
    Image out(img.height(), img.width());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
      for (std::ptrdiff_t c = 0; c < w; ++c) {
        double acc = 0.0, weight = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const std::ptrdiff_t rr = along_rows ? r : r + k;
          const std::ptrdiff_t cc = along_rows ? c + k : c;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const double t = taps[std::size_t(k + radius)];
          acc += t * src(std::size_t(rr), std::size_t(cc));
          weight += t;
        }
        out(std::size_t(r), std::size_t(c)) = acc / weight;
      }
    }
    return out;
  };
  return pass(pass(img, true), false);
}

Image normalize_minmax(const Image& img) {
  Image out = img;
  const double lo = min_value(img);
  const double span = max_value(img) - lo;
  for (double& v : out.pixels()) v = span > 0.0 ? (v - lo) / span : 0.0;
  return out;
}

Image normalize_zscore(const Image& img) {
  const double mu = mean(img);
  Image out = img;
  double norm2 = 0.0;
  for (double& v : out.pixels()) {
    v -= mu;
    norm2 += v * v;
  }
  // Relative floor: rounding noise on a constant image must not pass as signal.
  double scale = 0.0;
  for (double v : img.pixels()) scale = std::max(scale, std::abs(v));
  const double norm = std::sqrt(norm2);
  if (img.empty() || norm <= 1e-12 * std::max(1.0, scale) * std::sqrt(double(img.size()))) {
    throw Error(ErrorCode::ConstantImage, "image has no intensity variation");
  }
  for (double& v : out.pixels()) v /= norm;
  return out;
}

void rotate_into(const Image& img, double theta_deg, Image& out) {
  if (!out.same_shape(img)) out = Image(img.height(), img.width());
  if (theta_deg == 0.0) {
    std::copy(img.data().begin(), img.data().end(), out.pixels().begin());
    return;
  }
  const double theta = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const std::size_t h = img.height();
  const std::size_t w = img.width();
  const double cx = (double(w) - 1.0) / 2.0;
  const double cy = (double(h) - 1.0) / 2.0;
  const double max_x = double(w) - 1.0;
  const double max_y = double(h) - 1.0;
  constexpr double kEdge = 1e-9;
  const auto src = img.pixels();
  auto dst = out.pixels();

  for (std::size_t row = 0; row < h; ++row) {
    // Work in y-up coordinates so positive angles turn counterclockwise on screen.
    const double yo = cy - double(row);
    for (std::size_t col = 0; col < w; ++col) {
      const double xo = double(col) - cx;
      const double xs = c * xo + s * yo;
      const double ys = -s * xo + c * yo;
      double sx = xs + cx;
      double sy = cy - ys;
      double value = 0.0;
      if (sx >= -kEdge && sx <= max_x + kEdge && sy >= -kEdge && sy <= max_y + kEdge) {
        sx = std::clamp(sx, 0.0, max_x);
        sy = std::clamp(sy, 0.0, max_y);
        const auto x0 = std::size_t(sx);
        const auto y0 = std::size_t(sy);
        const std::size_t x1 = std::min(x0 + 1, w - 1);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double fx = sx - double(x0);
        const double fy = sy - double(y0);
        const double top = (1.0 - fx) * src[y0 * w + x0] + fx * src[y0 * w + x1];
        const double bottom = (1.0 - fx) * src[y1 * w + x0] + fx * src[y1 * w + x1];
        value = (1.0 - fy) * top + fy * bottom;
      }
      dst[row * w + col] = value;
    }
  }
}

Image rotate(const Image& img, double theta_deg) {
  Image out;
  if (img.empty()) return out;
  rotate_into(img, theta_deg, out);
  return out;
}

}  // namespace ghostsim
