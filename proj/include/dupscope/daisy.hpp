#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dupscope/image.hpp"

namespace dupscope {

struct DaisyParams {
  int radius = 15;
  int rings = 3;
  int histograms = 8;    // per ring
  int orientations = 8;  // bins per histogram

  std::size_t descriptor_length() const {
    return static_cast<std::size_t>((1 + rings * histograms) * orientations);
  }
};

/// One dense descriptor: (1 + rings * histograms) orientation histograms, each L2-normalized.
struct DaisyDescriptor {
  float x = 0;
  float y = 0;
  std::vector<float> values;
};

namespace detail {

inline float bilinear(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, img.width() - 1.0);
  y = std::clamp(y, 0.0, img.height() - 1.0);
  const auto x0 = static_cast<std::uint32_t>(x), y0 = static_cast<std::uint32_t>(y);
  const std::uint32_t x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0, fy = y - y0;
  return static_cast<float>((img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx) * (1 - fy) +
                            (img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx) * fy);
}

}  // namespace detail

/// Dense DAISY on a regular grid: x = radius + i*step for i < floor((W - 2*radius)/step), same for y.
/// Descriptors are emitted in row-major grid order.
///
/// Orientation maps are the rectified projections of the central-difference gradient
/// onto each of `orientations` directions. Ring r (0-based) samples at radius
/// radius*(r+1)/rings from maps smoothed with sigma = radius*(r+1)/(2*rings); the
/// centre histogram shares the first ring's smoothing.
inline std::vector<DaisyDescriptor> daisy_describe(const GrayImage& img, int step, const DaisyParams& params = {}) {
  require(step >= 1, Errc::InvalidArgument, "step must be >= 1");
  require(params.radius >= 1 && params.rings >= 1 && params.histograms >= 1 && params.orientations >= 1,
          Errc::InvalidArgument, "DAISY parameters must be positive");
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  require(w > 2 * params.radius && h > 2 * params.radius, Errc::ImageTooSmall,
          "image must exceed twice the DAISY radius in both dimensions");

  GrayImage dx(img.width(), img.height()), dy(img.width(), img.height());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      dx.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = 0.5f * (img.clamped(x + 1, y) - img.clamped(x - 1, y));
      dy.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)) = 0.5f * (img.clamped(x, y + 1) - img.clamped(x, y - 1));
    }

  const auto n_orient = static_cast<std::size_t>(params.orientations);
  const auto n_rings = static_cast<std::size_t>(params.rings);
  // layers[r][o]: orientation map o smoothed for ring r.
  std::vector<std::vector<GrayImage>> layers(n_rings, std::vector<GrayImage>(n_orient));
  for (std::size_t o = 0; o < n_orient; ++o) {
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(o) / params.orientations;
    const float c = static_cast<float>(std::cos(theta)), s = static_cast<float>(std::sin(theta));
    GrayImage g(img.width(), img.height());
    auto gd = g.data();
    auto xd = dx.data();
    auto yd = dy.data();
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] = std::max(0.0f, c * xd[i] + s * yd[i]);
    double prev_sigma = 0.0;
    const GrayImage* prev = &g;
    for (std::size_t r = 0; r < n_rings; ++r) {
      const double sigma = params.radius * static_cast<double>(r + 1) / (2.0 * params.rings);
      // Incremental smoothing: sigma_r^2 = sigma_{r-1}^2 + delta^2.
      const double delta = std::sqrt(sigma * sigma - prev_sigma * prev_sigma);
      layers[r][o] = gaussian_blur(*prev, delta);
      prev = &layers[r][o];
      prev_sigma = sigma;
    }
  }

  const int nx = (w - 2 * params.radius) / step;
  const int ny = (h - 2 * params.radius) / step;
  const std::size_t len = params.descriptor_length();
  std::vector<DaisyDescriptor> out;
  out.reserve(static_cast<std::size_t>(std::max(0, nx * ny)));

  const auto normalize_block = [](float* block, std::size_t n) {
    double norm = 0;
    for (std::size_t i = 0; i < n; ++i) norm += static_cast<double>(block[i]) * block[i];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      std::fill(block, block + n, 0.0f);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) block[i] = static_cast<float>(block[i] / norm);
  };

  for (int gy = 0; gy < ny; ++gy)
    for (int gx = 0; gx < nx; ++gx) {
      DaisyDescriptor d;
      d.x = static_cast<float>(params.radius + gx * step);
      d.y = static_cast<float>(params.radius + gy * step);
      d.values.assign(len, 0.0f);
      float* block = d.values.data();
      for (std::size_t o = 0; o < n_orient; ++o)
        block[o] = layers[0][o].at(static_cast<std::uint32_t>(d.x), static_cast<std::uint32_t>(d.y));
      normalize_block(block, n_orient);
      block += n_orient;
      for (std::size_t r = 0; r < n_rings; ++r) {
        const double rho = params.radius * static_cast<double>(r + 1) / params.rings;
        for (int j = 0; j < params.histograms; ++j) {
          const double phi = 2.0 * std::numbers::pi * j / params.histograms;
          const double sx = d.x + rho * std::cos(phi), sy = d.y + rho * std::sin(phi);
          for (std::size_t o = 0; o < n_orient; ++o) block[o] = detail::bilinear(layers[r][o], sx, sy);
          normalize_block(block, n_orient);
          block += n_orient;
        }
      }
      out.push_back(std::move(d));
    }
  return out;
}

}  // namespace dupscope
