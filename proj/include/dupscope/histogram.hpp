#pragma once

#include <array>
#include <cmath>
#include <numeric>

#include "dupscope/image.hpp"
#include "dupscope/verdict.hpp"

namespace dupscope {

/// 8x8x8 RGB histogram, index = (r_bin * 8 + g_bin) * 8 + b_bin, L1-normalized.
struct Histogram3D {
  static constexpr std::size_t kBinsPerChannel = 8;
  static constexpr std::size_t kSize = kBinsPerChannel * kBinsPerChannel * kBinsPerChannel;

  std::array<double, kSize> bins{};

  static constexpr std::size_t index(std::size_t r, std::size_t g, std::size_t b) {
    return (r * kBinsPerChannel + g) * kBinsPerChannel + b;
  }
  double at(std::size_t r, std::size_t g, std::size_t b) const { return bins[index(r, g, b)]; }
  double sum() const { return std::accumulate(bins.begin(), bins.end(), 0.0); }
};

inline Histogram3D rgb_histogram(const RasterImage& img) {
  Histogram3D h;
  auto px = img.data();
  for (std::size_t i = 0; i < px.size(); i += 3)
    h.bins[Histogram3D::index(px[i] >> 5, px[i + 1] >> 5, px[i + 2] >> 5)] += 1.0;
  const double n = static_cast<double>(img.width()) * img.height();
  for (double& b : h.bins) b /= n;
  return h;
}

/// Hellinger-form Bhattacharyya distance sqrt(1 - sum sqrt(a_i b_i)), in [0,1].
inline double bhattacharyya_distance(const Histogram3D& a, const Histogram3D& b) {
  require(std::abs(a.sum() - 1.0) <= 1e-4 && std::abs(b.sum() - 1.0) <= 1e-4, Errc::UnnormalizedHistogram,
          "histograms must sum to 1");
  double bc = 0.0;
  for (std::size_t i = 0; i < Histogram3D::kSize; ++i) bc += std::sqrt(a.bins[i] * b.bins[i]);
  // Rounding in the bin sums must not turn d(h, h) into ~1e-8.
  double r = 1.0 - bc / std::sqrt(a.sum() * b.sum());
  if (r < 1e-12) r = 0.0;
  return std::min(1.0, std::sqrt(r));
}

inline SimilarityVerdict histogram_similarity(const RasterImage& a, const RasterImage& b,
                                              double threshold = default_threshold(MethodKind::Histogram)) {
  require(threshold > 0 && threshold < 1, Errc::InvalidArgument, "histogram threshold must lie in (0,1)");
  const double d = bhattacharyya_distance(rgb_histogram(a), rgb_histogram(b));
  return SimilarityVerdict::make(MethodKind::Histogram, d, threshold);
}

}  // namespace dupscope
