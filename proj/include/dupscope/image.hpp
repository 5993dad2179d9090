#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dupscope/error.hpp"

namespace dupscope {

/// Row-major 8-bit RGB raster.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(std::uint32_t width, std::uint32_t height, std::uint8_t fill = 0)
      : width_(width), height_(height), pixels_(checked_size(width, height) * 3, fill) {}
  RasterImage(std::uint32_t width, std::uint32_t height, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    require(pixels_.size() == checked_size(width, height) * 3, Errc::InvalidArgument,
            "pixel buffer length does not match dimensions");
  }

  static RasterImage filled(std::uint32_t width, std::uint32_t height, std::uint8_t r, std::uint8_t g,
                            std::uint8_t b) {
    RasterImage img(width, height);
    for (std::size_t i = 0; i < img.pixels_.size(); i += 3) {
      img.pixels_[i] = r;
      img.pixels_[i + 1] = g;
      img.pixels_[i + 2] = b;
    }
    return img;
  }

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t* pixel(std::uint32_t x, std::uint32_t y) noexcept {
    return pixels_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }
  const std::uint8_t* pixel(std::uint32_t x, std::uint32_t y) const noexcept {
    return pixels_.data() + (static_cast<std::size_t>(y) * width_ + x) * 3;
  }

  std::span<std::uint8_t> data() noexcept { return pixels_; }
  std::span<const std::uint8_t> data() const noexcept { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  static std::size_t checked_size(std::uint32_t w, std::uint32_t h) {
    require(w > 0 && h > 0, Errc::ZeroDimension, "image dimensions must be positive");
    return static_cast<std::size_t>(w) * h;
  }

  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Row-major luminance raster with values in [0,1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::uint32_t width, std::uint32_t height, float fill = 0.0f)
      : width_(width), height_(height) {
    require(width > 0 && height > 0, Errc::ZeroDimension, "image dimensions must be positive");
    pixels_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  float& at(std::uint32_t x, std::uint32_t y) noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  float at(std::uint32_t x, std::uint32_t y) const noexcept {
    return pixels_[static_cast<std::size_t>(y) * width_ + x];
  }
  /// Clamp-to-edge access for signed coordinates.
  float clamped(int x, int y) const noexcept {
    x = x < 0 ? 0 : (x >= static_cast<int>(width_) ? static_cast<int>(width_) - 1 : x);
    y = y < 0 ? 0 : (y >= static_cast<int>(height_) ? static_cast<int>(height_) - 1 : y);
    return pixels_[static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)];
  }

  std::span<float> data() noexcept { return pixels_; }
  std::span<const float> data() const noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<float> pixels_;
};

/// 3x3 projective transform, row-major, mapping source points to destination points.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty) { return {{1, 0, tx, 0, 1, ty, 0, 0, 1}}; }

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }

  double determinant() const {
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  bool invertible() const {
    double scale = 0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (!(scale > 0) || !std::isfinite(scale)) return false;
    return std::abs(determinant()) > 1e-12 * scale * scale * scale;
  }

  /// Scales so that h33 == 1 when that element is usable.
  Homography normalized() const {
    Homography out = *this;
    if (std::abs(m[8]) > 1e-15)
      for (double& v : out.m) v /= m[8];
    return out;
  }

  Homography inverse() const {
    require(invertible(), Errc::SingularHomography, "homography is not invertible");
    const double d = determinant();
    Homography inv;
    inv.m = {(m[4] * m[8] - m[5] * m[7]) / d, (m[2] * m[7] - m[1] * m[8]) / d,
             (m[1] * m[5] - m[2] * m[4]) / d, (m[5] * m[6] - m[3] * m[8]) / d,
             (m[0] * m[8] - m[2] * m[6]) / d, (m[2] * m[3] - m[0] * m[5]) / d,
             (m[3] * m[7] - m[4] * m[6]) / d, (m[1] * m[6] - m[0] * m[7]) / d,
             (m[0] * m[4] - m[1] * m[3]) / d};
    return inv.normalized();
  }

  Homography operator*(const Homography& o) const {
    Homography r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r.m[static_cast<std::size_t>(i * 3 + j)] = s;
      }
    return r;
  }

  /// Maps (x, y); returns false when the point goes to infinity.
  bool apply(double x, double y, double& ox, double& oy) const {
    const double w = m[6] * x + m[7] * y + m[8];
    if (std::abs(w) < 1e-12) return false;
    ox = (m[0] * x + m[1] * y + m[2]) / w;
    oy = (m[3] * x + m[4] * y + m[5]) / w;
    return true;
  }
};

/// Rec. 601 luminance scaled to [0,1].
inline GrayImage to_gray(const RasterImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const float r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    dst[i] = std::min(1.0f, (0.299f * r + 0.587f * g + 0.114f * b) / 255.0f);
  }
  return out;
}

/// Replicates luminance into all three channels.
inline RasterImage to_raster(const GrayImage& img) {
  RasterImage out(img.width(), img.height());
  auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(src[i], 0.0f, 1.0f) * 255.0f));
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = v;
  }
  return out;
}

namespace detail {

struct BilinearTap {
  std::uint32_t i0, i1;
  float w1;
};

// Pixel-center aligned sample positions, clamped to the source extent.
inline std::vector<BilinearTap> bilinear_taps(std::uint32_t src, std::uint32_t dst) {
  std::vector<BilinearTap> taps(dst);
  const double ratio = static_cast<double>(src) / dst;
  for (std::uint32_t i = 0; i < dst; ++i) {
    double s = (i + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const auto i0 = static_cast<std::uint32_t>(std::floor(s));
    const std::uint32_t i1 = std::min(i0 + 1, src - 1);
    taps[i] = {i0, i1, static_cast<float>(s - i0)};
  }
  return taps;
}

inline std::uint8_t to_u8(float v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace detail

/// Bilinear resampling with pixel-center alignment.
inline GrayImage resize(const GrayImage& img, std::uint32_t new_width, std::uint32_t new_height) {
  require(new_width > 0 && new_height > 0, Errc::ZeroDimension, "resize target must be at least 1x1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const auto xs = detail::bilinear_taps(img.width(), new_width);
  const auto ys = detail::bilinear_taps(img.height(), new_height);
  GrayImage out(new_width, new_height);
  for (std::uint32_t y = 0; y < new_height; ++y) {
    const auto& ty = ys[y];
    for (std::uint32_t x = 0; x < new_width; ++x) {
      const auto& tx = xs[x];
      const float top = img.at(tx.i0, ty.i0) * (1 - tx.w1) + img.at(tx.i1, ty.i0) * tx.w1;
      const float bot = img.at(tx.i0, ty.i1) * (1 - tx.w1) + img.at(tx.i1, ty.i1) * tx.w1;
      out.at(x, y) = top * (1 - ty.w1) + bot * ty.w1;
    }
  }
  return out;
}

inline RasterImage resize(const RasterImage& img, std::uint32_t new_width, std::uint32_t new_height) {
  require(new_width > 0 && new_height > 0, Errc::ZeroDimension, "resize target must be at least 1x1");
  if (new_width == img.width() && new_height == img.height()) return img;
  const auto xs = detail::bilinear_taps(img.width(), new_width);
  const auto ys = detail::bilinear_taps(img.height(), new_height);
  RasterImage out(new_width, new_height);
  for (std::uint32_t y = 0; y < new_height; ++y) {
    const auto& ty = ys[y];
    for (std::uint32_t x = 0; x < new_width; ++x) {
      const auto& tx = xs[x];
      const std::uint8_t* p00 = img.pixel(tx.i0, ty.i0);
      const std::uint8_t* p10 = img.pixel(tx.i1, ty.i0);
      const std::uint8_t* p01 = img.pixel(tx.i0, ty.i1);
      const std::uint8_t* p11 = img.pixel(tx.i1, ty.i1);
      std::uint8_t* o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const float top = p00[c] * (1 - tx.w1) + p10[c] * tx.w1;
        const float bot = p01[c] * (1 - tx.w1) + p11[c] * tx.w1;
        o[c] = detail::to_u8(top * (1 - ty.w1) + bot * ty.w1);
      }
    }
  }
  return out;
}

/// L1-normalized Gaussian taps over [-ceil(3 sigma), ceil(3 sigma)].
inline std::vector<float> gaussian_kernel(double sigma) {
  require(sigma > 0, Errc::NonPositiveSigma, "sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[static_cast<std::size_t>(i + radius)];
  }
  std::vector<float> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) out[i] = static_cast<float>(k[i] / sum);
  return out;
}

/// Separable Gaussian blur, clamp-to-edge borders.
inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  GrayImage tmp(img.width(), img.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * img.clamped(x + k, y);
      tmp.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = s;
    }
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float s = 0;
      for (int k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * tmp.clamped(x, y + k);
      out.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = std::clamp(s, 0.0f, 1.0f);
    }
  return out;
}

/// Inverse-mapped bilinear warp. `h` maps source coordinates to output coordinates;
/// output pixels whose preimage falls outside the source are black.
inline RasterImage warp_perspective(const RasterImage& img, const Homography& h, std::uint32_t out_width,
                                    std::uint32_t out_height) {
  const Homography inv = h.inverse();
  RasterImage out(out_width, out_height);
  const double max_x = img.width() - 1.0, max_y = img.height() - 1.0;
  constexpr double eps = 1e-9;
  for (std::uint32_t y = 0; y < out_height; ++y)
    for (std::uint32_t x = 0; x < out_width; ++x) {
      double sx, sy;
      if (!inv.apply(x, y, sx, sy)) continue;
      if (sx < -eps || sy < -eps || sx > max_x + eps || sy > max_y + eps) continue;
      sx = std::clamp(sx, 0.0, max_x);
      sy = std::clamp(sy, 0.0, max_y);
      const auto x0 = static_cast<std::uint32_t>(sx), y0 = static_cast<std::uint32_t>(sy);
      const std::uint32_t x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
      const double fx = sx - x0, fy = sy - y0;
      const std::uint8_t* p00 = img.pixel(x0, y0);
      const std::uint8_t* p10 = img.pixel(x1, y0);
      const std::uint8_t* p01 = img.pixel(x0, y1);
      const std::uint8_t* p11 = img.pixel(x1, y1);
      std::uint8_t* o = out.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double v = (p00[c] * (1 - fx) + p10[c] * fx) * (1 - fy) + (p01[c] * (1 - fx) + p11[c] * fx) * fy;
        o[c] = detail::to_u8(static_cast<float>(v));
      }
    }
  return out;
}

}  // namespace dupscope
