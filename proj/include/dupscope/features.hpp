#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "dupscope/brief_pattern.hpp"
#include "dupscope/image.hpp"

namespace dupscope {

inline constexpr float kNoAngle = -1.0f;

struct Keypoint {
  float x = 0;  // source-image frame
  float y = 0;
  float angle = kNoAngle;  // radians in [0, 2pi) once oriented
  float response = 0;
  int octave = 0;

  bool oriented() const noexcept { return angle >= 0.0f; }
};

/// 256-bit steered BRIEF string.
struct BinaryDescriptor {
  std::array<std::uint64_t, 4> words{};

  bool bit(std::size_t i) const noexcept { return (words[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i) noexcept { words[i / 64] |= std::uint64_t{1} << (i % 64); }

  friend bool operator==(const BinaryDescriptor&, const BinaryDescriptor&) = default;
};

inline int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) noexcept {
  int d = 0;
  for (std::size_t i = 0; i < 4; ++i) d += std::popcount(a.words[i] ^ b.words[i]);
  return d;
}

struct OrbParams {
  int n_features = 500;
  float fast_threshold = 0.08f;  // on [0,1] luminance
  int pyramid_levels = 8;
  double scale_factor = 1.2;
  int patch_size = 31;

  void validate() const {
    require(n_features >= 1, Errc::InvalidArgument, "n_features must be >= 1");
    require(scale_factor > 1.0, Errc::InvalidArgument, "scale_factor must exceed 1");
    require(patch_size >= 7 && patch_size % 2 == 1, Errc::InvalidArgument, "patch_size must be odd and >= 7");
    require(pyramid_levels >= 1, Errc::InvalidArgument, "pyramid_levels must be >= 1");
    require(fast_threshold > 0.0f, Errc::InvalidArgument, "fast_threshold must be positive");
  }
};

struct OrbFeatures {
  std::vector<Keypoint> keypoints;
  std::vector<BinaryDescriptor> descriptors;
};

// Bresenham circle of radius 3, clockwise from 12 o'clock.
inline constexpr std::array<std::pair<int, int>, 16> kFastCircle{{{0, -3},
                                                                  {1, -3},
                                                                  {2, -2},
                                                                  {3, -1},
                                                                  {3, 0},
                                                                  {3, 1},
                                                                  {2, 2},
                                                                  {1, 3},
                                                                  {0, 3},
                                                                  {-1, 3},
                                                                  {-2, 2},
                                                                  {-3, 1},
                                                                  {-3, 0},
                                                                  {-3, -1},
                                                                  {-2, -2},
                                                                  {-1, -3}}};

namespace detail {

inline bool has_arc(std::uint32_t mask, int arc) {
  const std::uint32_t doubled = mask | (mask << 16);
  int run = 0;
  for (int i = 0; i < 32; ++i) {
    run = (doubled >> i) & 1u ? run + 1 : 0;
    if (run >= arc) return true;
  }
  return false;
}

// FAST-9 segment test at (x, y); returns the corner score, or 0 if not a corner.
inline float fast_score(const GrayImage& img, int x, int y, float t) {
  const float c = img.at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
  std::uint32_t bright = 0, dark = 0;
  float bright_sum = 0, dark_sum = 0;
  for (int i = 0; i < 16; ++i) {
    const float p = img.at(static_cast<std::uint32_t>(x + kFastCircle[static_cast<std::size_t>(i)].first),
                           static_cast<std::uint32_t>(y + kFastCircle[static_cast<std::size_t>(i)].second));
    if (p > c + t) {
      bright |= 1u << i;
      bright_sum += p - c - t;
    } else if (p < c - t) {
      dark |= 1u << i;
      dark_sum += c - p - t;
    }
  }
  // An arc of 9 covers at least two of the four compass pixels.
  constexpr std::uint32_t compass = (1u << 0) | (1u << 4) | (1u << 8) | (1u << 12);
  const bool b = std::popcount(bright & compass) >= 2 && has_arc(bright, 9);
  const bool d = std::popcount(dark & compass) >= 2 && has_arc(dark, 9);
  if (!b && !d) return 0.0f;
  // Sum-of-absolute-differences score over the brighter or darker set.
  return std::max(b ? bright_sum : 0.0f, d ? dark_sum : 0.0f) + 1e-6f;
}

}  // namespace detail

/// FAST-9 corners with 3x3 non-maximum suppression on the SAD corner score.
/// Returned keypoints are unoriented and ordered by (y, x).
inline std::vector<Keypoint> detect_fast(const GrayImage& img, float threshold) {
  require(img.width() >= 7 && img.height() >= 7, Errc::ImageTooSmall, "FAST needs at least 7x7 pixels");
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  std::vector<float> score(static_cast<std::size_t>(w) * h, 0.0f);
  for (int y = 3; y < h - 3; ++y)
    for (int x = 3; x < w - 3; ++x) score[static_cast<std::size_t>(y) * w + x] = detail::fast_score(img, x, y, threshold);

  std::vector<Keypoint> out;
  for (int y = 3; y < h - 3; ++y)
    for (int x = 3; x < w - 3; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      const float s = score[idx];
      if (s <= 0) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const std::size_t n = static_cast<std::size_t>(y + dy) * w + (x + dx);
          // Equal scores: the earlier pixel in raster order wins.
          if (score[n] > s || (score[n] == s && n < idx)) {
            keep = false;
            break;
          }
        }
      if (keep) out.push_back({static_cast<float>(x), static_cast<float>(y), kNoAngle, s, 0});
    }
  return out;
}

/// Intensity-centroid orientation over a disc of `patch_radius` around the keypoint.
inline float compute_orientation(const GrayImage& img, const Keypoint& kp, int patch_radius) {
  const int cx = static_cast<int>(std::lround(kp.x)), cy = static_cast<int>(std::lround(kp.y));
  require(cx - patch_radius >= 0 && cy - patch_radius >= 0 && cx + patch_radius < static_cast<int>(img.width()) &&
              cy + patch_radius < static_cast<int>(img.height()),
          Errc::PatchOutOfBounds, "orientation patch exceeds image bounds");
  double m00 = 0, m10 = 0, m01 = 0;
  const int r2 = patch_radius * patch_radius;
  for (int dy = -patch_radius; dy <= patch_radius; ++dy)
    for (int dx = -patch_radius; dx <= patch_radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const double v = img.at(static_cast<std::uint32_t>(cx + dx), static_cast<std::uint32_t>(cy + dy));
      m00 += v;
      m10 += dx * v;
      m01 += dy * v;
    }
  const double tol = 1e-9 * std::max(1.0, m00) * patch_radius;
  if (std::abs(m10) <= tol && std::abs(m01) <= tol) return 0.0f;
  double a = std::atan2(m01, m10);
  if (a < 0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a = 0.0;
  return static_cast<float>(a);
}

namespace detail {

inline BinaryDescriptor describe_one(const GrayImage& smoothed, const Keypoint& kp) {
  const double c = std::cos(kp.angle), s = std::sin(kp.angle);
  BinaryDescriptor d;
  for (std::size_t i = 0; i < kBriefPattern.size(); ++i) {
    const auto& p = kBriefPattern[i];
    const auto sample = [&](int px, int py) {
      const double rx = c * px - s * py, ry = s * px + c * py;
      return smoothed.clamped(static_cast<int>(std::lround(kp.x + rx)), static_cast<int>(std::lround(kp.y + ry)));
    };
    if (sample(p.x1, p.y1) < sample(p.x2, p.y2)) d.set(i);
  }
  return d;
}

}  // namespace detail

/// Steered BRIEF on a sigma=2 smoothed copy of `img`. Keypoints must be oriented and in `img`'s frame.
inline std::vector<BinaryDescriptor> orb_describe(const GrayImage& img, const std::vector<Keypoint>& kps) {
  for (const auto& kp : kps) require(kp.oriented(), Errc::MissingOrientation, "keypoint has no orientation");
  if (kps.empty()) return {};
  const GrayImage smoothed = gaussian_blur(img, 2.0);
  std::vector<BinaryDescriptor> out;
  out.reserve(kps.size());
  for (const auto& kp : kps) out.push_back(detail::describe_one(smoothed, kp));
  return out;
}

/// FAST over a scale pyramid, top `n_features` by response across all levels,
/// intensity-centroid orientation, steered BRIEF. Coordinates are returned in the level-0 frame.
inline OrbFeatures orb_detect_and_describe(const GrayImage& img, const OrbParams& params = {}) {
  params.validate();
  const int half = params.patch_size / 2;
  const int border = half + 1;
  const int min_side = 2 * border + 1;
  require(static_cast<int>(img.width()) >= min_side && static_cast<int>(img.height()) >= min_side,
          Errc::ImageTooSmall, "image smaller than one ORB patch");

  struct Candidate {
    Keypoint kp;  // level frame
    double scale;
  };
  std::vector<GrayImage> levels;
  std::vector<double> scales;
  std::vector<Candidate> candidates;
  for (int l = 0; l < params.pyramid_levels; ++l) {
    const double scale = std::pow(params.scale_factor, l);
    const auto w = static_cast<std::uint32_t>(std::lround(img.width() / scale));
    const auto h = static_cast<std::uint32_t>(std::lround(img.height() / scale));
    if (static_cast<int>(w) < min_side || static_cast<int>(h) < min_side) break;
    levels.push_back(l == 0 ? img : resize(img, w, h));
    scales.push_back(scale);
    for (Keypoint kp : detect_fast(levels.back(), params.fast_threshold)) {
      if (kp.x < border || kp.y < border || kp.x >= static_cast<int>(w) - border || kp.y >= static_cast<int>(h) - border)
        continue;
      kp.octave = l;
      candidates.push_back({kp, scale});
    }
  }

  const auto level0 = [](const Candidate& c) { return std::pair{c.kp.y * c.scale, c.kp.x * c.scale}; };
  std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.kp.response != b.kp.response) return a.kp.response > b.kp.response;
    const auto pa = level0(a), pb = level0(b);
    if (pa != pb) return pa < pb;
    return a.kp.octave < b.kp.octave;
  });
  if (candidates.size() > static_cast<std::size_t>(params.n_features))
    candidates.resize(static_cast<std::size_t>(params.n_features));

  OrbFeatures out;
  out.keypoints.reserve(candidates.size());
  out.descriptors.reserve(candidates.size());
  std::vector<GrayImage> smoothed(levels.size());
  for (auto& c : candidates) {
    const auto l = static_cast<std::size_t>(c.kp.octave);
    if (smoothed[l].empty()) smoothed[l] = gaussian_blur(levels[l], 2.0);
    c.kp.angle = compute_orientation(levels[l], c.kp, half);
    out.descriptors.push_back(detail::describe_one(smoothed[l], c.kp));
    Keypoint mapped = c.kp;
    mapped.x = static_cast<float>(c.kp.x * c.scale);
    mapped.y = static_cast<float>(c.kp.y * c.scale);
    mapped.x = std::min(mapped.x, static_cast<float>(img.width() - 1));
    mapped.y = std::min(mapped.y, static_cast<float>(img.height() - 1));
    out.keypoints.push_back(mapped);
  }
  return out;
}

}  // namespace dupscope
