#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ghostsim {

/// Row-major grid of real intensities. Holds objects, speckle patterns,
/// bucket-measurement planes and reconstructions alike.
class Image {
public:
  Image() = default;
  /// Zero-filled image. Throws ZeroDimension if either extent is 0.
  Image(std::size_t height, std::size_t width);
  Image(std::size_t height, std::size_t width, double fill);
  /// Throws LengthMismatch unless data.size() == height * width.
  Image(std::size_t height, std::size_t width, std::vector<double> data);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image&, const Image&) = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> data_;
};

/// Throws DimensionMismatch when the two images differ in shape.
void require_same_shape(const Image& a, const Image& b, const char* context);

double sum(const Image& img);
double mean(const Image& img);
double min_value(const Image& img);
double max_value(const Image& img);
/// Sum of elementwise products (Frobenius inner product).
double dot(const Image& a, const Image& b);
/// Largest absolute elementwise difference.
double max_abs_diff(const Image& a, const Image& b);

Image scaled(const Image& img, double factor);
Image added(const Image& a, const Image& b);
/// a + factor * b
Image axpy(const Image& a, double factor, const Image& b);

/// (img - min) / (max - min); an image with max == min maps to all zeros.
Image normalize_minmax(const Image& img);

/// Zero mean, unit Frobenius norm. Throws ConstantImage when the input has
/// no variation, since correlation against it is undefined.
Image normalize_zscore(const Image& img);

/// Separable Gaussian smoothing. Taps reaching outside the frame are
/// dropped and the rest renormalized, so a constant image stays constant.
/// sigma_px <= 0 returns a copy.
Image gaussian_blur(const Image& img, double sigma_px);

/// Counterclockwise rotation (as displayed, rows growing downward) by
/// theta_deg about the geometric center ((W-1)/2, (H-1)/2). Bilinear
/// sampling at the inverse-rotated coordinate; samples falling outside the
/// frame read as 0. rotate(img, 0) returns img unchanged.
Image rotate(const Image& img, double theta_deg);

/// Same as rotate() but writes into `out`, which is reshaped if needed.
/// Hot loops (angle sweeps) reuse one buffer through this.
void rotate_into(const Image& img, double theta_deg, Image& out);

}  // namespace ghostsim
