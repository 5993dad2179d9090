#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>

#include "dupscope/cnn/model.hpp"
#include "dupscope/cnn/tensor.hpp"
#include "dupscope/features.hpp"
#include "dupscope/geometry.hpp"
#include "dupscope/image.hpp"
#include "dupscope/matching.hpp"

namespace dupscope::cnn {

/// Side length both images are resampled to before keypoint alignment.
inline constexpr std::uint32_t kAlignWorkingSize = 256;

struct AlignInfo {
  bool warped = false;               // false: homography unavailable, B used unwarped
  std::optional<Homography> a_to_b;  // in working-size coordinates
  std::size_t inliers = 0;
};

namespace detail {

inline void write_planes(const RasterImage& img, float* dst) {
  const std::size_t plane = static_cast<std::size_t>(img.width()) * img.height();
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < 3; ++c) dst[c * plane + i] = img.data()[i * 3 + c] / 255.0f;
}

}  // namespace detail

/// Six-channel pair tensor [A.R, A.G, A.B, B'.R, B'.G, B'.B] in [0,1], where B' is B warped
/// into A's frame by an ORB + RANSAC homography (or B itself when no homography is found).
inline Tensor align_pair(const RasterImage& a, const RasterImage& b, std::uint32_t size, AlignInfo* info = nullptr,
                         const OrbParams& orb = {}, const RansacParams& ransac = {}) {
  require(size >= 1, Errc::InvalidArgument, "alignment size must be positive");
  require(!a.empty() && !b.empty(), Errc::ZeroDimension, "cannot align an empty image");
  const std::uint32_t work = std::max(size, kAlignWorkingSize);
  const RasterImage wa = resize(a, work, work);
  const RasterImage wb = resize(b, work, work);

  AlignInfo local;
  RasterImage b_aligned = wb;
  try {
    const auto fa = orb_detect_and_describe(to_gray(wa), orb);
    const auto fb = orb_detect_and_describe(to_gray(wb), orb);
    const auto matches = match_hamming(fa.descriptors, fb.descriptors, true);
    const auto fit = ransac_homography(matches, fa.keypoints, fb.keypoints, ransac);
    b_aligned = warp_perspective(wb, fit.homography.inverse(), work, work);
    local.warped = true;
    local.a_to_b = fit.homography;
    local.inliers = fit.mask.count();
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::ImageTooSmall:
      case Errc::EmptyDescriptorSet:
      case Errc::InsufficientMatches:
      case Errc::NoConsensus:
      case Errc::DegenerateConfiguration:
      case Errc::SingularHomography: break;
      default: throw;
    }
  }
  if (info) *info = local;

  Tensor out({static_cast<std::size_t>(kPairChannels), size, size});
  const std::size_t plane = static_cast<std::size_t>(size) * size;
  detail::write_planes(resize(wa, size, size), out.data.data());
  detail::write_planes(resize(b_aligned, size, size), out.data.data() + 3 * plane);
  return out;
}

}  // namespace dupscope::cnn
