#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "dupscope/daisy.hpp"
#include "dupscope/features.hpp"
#include "dupscope/matching.hpp"
#include "support/synth.hpp"

using namespace dupscope;

namespace {

// Naive FAST-9 segment test, written independently of the library.
constexpr int kCircleX[16] = {0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3, -3, -3, -2, -1};
constexpr int kCircleY[16] = {-3, -3, -2, -1, 0, 1, 2, 3, 3, 3, 2, 1, 0, -1, -2, -3};

bool segment_arc(const GrayImage& img, int x, int y, float t, int sign) {
  const float c = img.at(x, y);
  for (int start = 0; start < 16; ++start) {
    bool ok = true;
    for (int k = 0; k < 9 && ok; ++k) {
      const int i = (start + k) % 16;
      const float p = img.at(x + kCircleX[i], y + kCircleY[i]);
      ok = sign > 0 ? p > c + t : p < c - t;
    }
    if (ok) return true;
  }
  return false;
}

bool segment_test(const GrayImage& img, int x, int y, float t) {
  return segment_arc(img, x, y, t, 1) || segment_arc(img, x, y, t, -1);
}

GrayImage quantized_texture(std::uint64_t seed, std::uint32_t w, std::uint32_t h) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 16);
  GrayImage coarse(w / 4, h / 4);
  for (auto& v : coarse.data()) v = static_cast<float>(d(rng)) / 16.0f;
  GrayImage out(w, h);
  for (std::uint32_t y = 0; y < h; ++y)
    for (std::uint32_t x = 0; x < w; ++x) out.at(x, y) = coarse.at(x / 4, y / 4);
  return out;
}

GrayImage scene_gray(std::uint64_t seed, std::uint32_t size = 256) {
  return to_gray(testkit::synth_scene(seed, size, size, testkit::random_palette(seed + 1)));
}

Homography rotation_about(double deg, double cx, double cy) {
  const double a = deg * std::numbers::pi / 180.0, c = std::cos(a), s = std::sin(a);
  const Homography r{{c, -s, 0, s, c, 0, 0, 0, 1}};
  return Homography::translation(cx, cy) * r * Homography::translation(-cx, -cy);
}

GrayImage warp_gray(const GrayImage& g, const Homography& h) {
  return to_gray(warp_perspective(to_raster(g), h, g.width(), g.height()));
}

}  // namespace

TEST(DetectFast, ConstantImageHasNoCorners) {
  EXPECT_TRUE(detect_fast(GrayImage(32, 32, 0.5f), 0.08f).empty());
}

TEST(DetectFast, BrightSquareYieldsCornerNearSquare) {
  GrayImage g(32, 32, 0.0f);
  for (std::uint32_t y = 14; y < 17; ++y)
    for (std::uint32_t x = 14; x < 17; ++x) g.at(x, y) = 1.0f;
  const auto kps = detect_fast(g, 0.08f);
  ASSERT_FALSE(kps.empty());
  bool near_corner = false;
  for (const auto& kp : kps)
    for (int cx : {14, 16})
      for (int cy : {14, 16}) near_corner |= std::hypot(kp.x - cx, kp.y - cy) <= 2.0;
  EXPECT_TRUE(near_corner);
  for (const auto& kp : kps) EXPECT_TRUE(segment_test(g, static_cast<int>(kp.x), static_cast<int>(kp.y), 0.08f));
}

TEST(DetectFast, EveryKeypointPassesNaiveSegmentTest) {
  const auto g = quantized_texture(5, 96, 80);
  const auto kps = detect_fast(g, 0.08f);
  ASSERT_GT(kps.size(), 10u);
  for (const auto& kp : kps) EXPECT_TRUE(segment_test(g, static_cast<int>(kp.x), static_cast<int>(kp.y), 0.08f));
}

TEST(DetectFast, MatchesExhaustiveNonMaximumOracle) {
  const auto g = quantized_texture(6, 80, 80);
  const float t = 0.08f;
  // Oracle SAD score: the larger qualifying side's sum of excess contrast.
  std::vector<float> score(80 * 80, 0.0f);
  for (int y = 3; y < 77; ++y)
    for (int x = 3; x < 77; ++x) {
      const bool b = segment_arc(g, x, y, t, 1), d = segment_arc(g, x, y, t, -1);
      if (!b && !d) continue;
      const float c = g.at(x, y);
      float bright = 0, dark = 0;
      for (int i = 0; i < 16; ++i) {
        const float p = g.at(x + kCircleX[i], y + kCircleY[i]);
        if (p > c + t) bright += p - c - t;
        else if (p < c - t) dark += c - p - t;
      }
      score[static_cast<std::size_t>(y) * 80 + x] = std::max(b ? bright : 0.0f, d ? dark : 0.0f) + 1e-6f;
    }
  std::vector<std::pair<int, int>> expected;
  for (int y = 3; y < 77; ++y)
    for (int x = 3; x < 77; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * 80 + x;
      if (score[i] <= 0) continue;
      bool best = true;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const std::size_t n = static_cast<std::size_t>(y + dy) * 80 + (x + dx);
          if (n != i && (score[n] > score[i] || (score[n] == score[i] && n < i))) best = false;
        }
      if (best) expected.push_back({x, y});
    }
  std::vector<std::pair<int, int>> got;
  for (const auto& kp : detect_fast(g, t)) got.push_back({static_cast<int>(kp.x), static_cast<int>(kp.y)});
  ASSERT_GT(expected.size(), 10u);
  EXPECT_EQ(got, expected);
}

TEST(DetectFast, ContrastInversionKeepsLocations) {
  const auto g = quantized_texture(7, 96, 96);
  GrayImage inv(96, 96);
  for (std::size_t i = 0; i < g.data().size(); ++i) inv.data()[i] = 1.0f - g.data()[i];
  const auto a = detect_fast(g, 0.08f), b = detect_fast(inv, 0.08f);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].y, b[i].y);
  }
}

TEST(DetectFast, TinyImageRejected) {
  try {
    detect_fast(GrayImage(6, 10), 0.08f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ImageTooSmall);
  }
}

TEST(ComputeOrientation, SymmetricBlobUsesDegenerateRule) {
  GrayImage g(41, 41, 0.0f);
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x) g.at(x, y) = static_cast<float>(std::exp(-((x - 20) * (x - 20) + (y - 20) * (y - 20)) / 30.0));
  EXPECT_EQ(compute_orientation(g, Keypoint{20, 20}, 15), 0.0f);
}

TEST(ComputeOrientation, HorizontalRampPointsAlongX) {
  GrayImage g(41, 41);
  for (std::uint32_t y = 0; y < 41; ++y)
    for (std::uint32_t x = 0; x < 41; ++x) g.at(x, y) = static_cast<float>(x) / 40.0f;
  const float a = compute_orientation(g, Keypoint{20, 20}, 15);
  // Oracle: intensity-centroid moments over the same disc.
  double m10 = 0, m01 = 0;
  for (int dy = -15; dy <= 15; ++dy)
    for (int dx = -15; dx <= 15; ++dx)
      if (dx * dx + dy * dy <= 225) {
        m10 += dx * g.at(20 + dx, 20 + dy);
        m01 += dy * g.at(20 + dx, 20 + dy);
      }
  EXPECT_NEAR(std::atan2(m01, m10), 0.0, 0.05);
  const double wrapped = a > std::numbers::pi ? a - 2 * std::numbers::pi : a;
  EXPECT_NEAR(wrapped, 0.0, 0.05);
}

TEST(ComputeOrientation, QuarterTurnShiftsByHalfPi) {
  GrayImage g(41, 41), r(41, 41);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> noise(0.0f, 0.05f);
  for (std::uint32_t y = 0; y < 41; ++y)
    for (std::uint32_t x = 0; x < 41; ++x) g.at(x, y) = static_cast<float>(x) / 40.0f * 0.9f + noise(rng);
  // Rotate by +90 degrees in image coordinates (y down): (x, y) -> (40 - y, x).
  for (std::uint32_t y = 0; y < 41; ++y)
    for (std::uint32_t x = 0; x < 41; ++x) r.at(40 - y, x) = g.at(x, y);
  const double a = compute_orientation(g, Keypoint{20, 20}, 15);
  const double b = compute_orientation(r, Keypoint{20, 20}, 15);
  double diff = std::fmod(b - a + 4 * std::numbers::pi, 2 * std::numbers::pi);
  EXPECT_NEAR(diff, std::numbers::pi / 2, 0.1);
}

TEST(ComputeOrientation, PatchOutsideImageRejected) {
  try {
    compute_orientation(GrayImage(20, 20), Keypoint{3, 10}, 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PatchOutOfBounds);
  }
}

TEST(OrbDescribe, DeterministicForSameKeypoint) {
  const auto g = scene_gray(11, 96);
  Keypoint kp{48, 48};
  kp.angle = compute_orientation(g, kp, 15);
  const auto a = orb_describe(g, {kp}), b = orb_describe(g, {kp});
  EXPECT_EQ(hamming_distance(a[0], b[0]), 0);
}

TEST(OrbDescribe, ContrastInversionFlipsNearlyAllBits) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  GrayImage g(96, 96);
  for (auto& v : g.data()) v = u(rng);
  GrayImage inv(96, 96);
  for (std::size_t i = 0; i < g.data().size(); ++i) inv.data()[i] = 1.0f - g.data()[i];
  Keypoint kp{48, 48};
  kp.angle = 0.7f;
  const auto a = orb_describe(g, {kp}), b = orb_describe(inv, {kp});
  EXPECT_GT(hamming_distance(a[0], b[0]), 192);
}

TEST(OrbDescribe, UnorientedKeypointRejected) {
  try {
    orb_describe(GrayImage(64, 64), {Keypoint{32, 32}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingOrientation);
  }
}

TEST(OrbDescribe, PatternMatchesShippedDataFile) {
  std::ifstream in(std::string(DUPSCOPE_SOURCE_DIR) + "/data/brief_pattern_v1.txt");
  ASSERT_TRUE(in);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int x1, y1, x2, y2;
    ASSERT_TRUE(ss >> x1 >> y1 >> x2 >> y2);
    ASSERT_LT(i, kBriefPattern.size());
    EXPECT_EQ(kBriefPattern[i].x1, x1);
    EXPECT_EQ(kBriefPattern[i].y1, y1);
    EXPECT_EQ(kBriefPattern[i].x2, x2);
    EXPECT_EQ(kBriefPattern[i].y2, y2);
    ++i;
  }
  EXPECT_EQ(i, 256u);
}

TEST(OrbDetectAndDescribe, CardinalityContract) {
  const auto f = orb_detect_and_describe(scene_gray(13));
  EXPECT_GT(f.keypoints.size(), 0u);
  EXPECT_LE(f.keypoints.size(), 500u);
  EXPECT_EQ(f.keypoints.size(), f.descriptors.size());
  for (const auto& kp : f.keypoints) {
    EXPECT_GE(kp.x, 0.0f);
    EXPECT_LT(kp.x, 256.0f);
    EXPECT_GE(kp.y, 0.0f);
    EXPECT_LT(kp.y, 256.0f);
    EXPECT_GE(kp.angle, 0.0f);
    EXPECT_LT(kp.angle, static_cast<float>(2 * std::numbers::pi));
  }
}

TEST(OrbDetectAndDescribe, BlankImageHasNoFeatures) {
  const auto f = orb_detect_and_describe(GrayImage(128, 128, 0.3f));
  EXPECT_TRUE(f.keypoints.empty());
  EXPECT_TRUE(f.descriptors.empty());
}

TEST(OrbDetectAndDescribe, DeterministicAcrossCalls) {
  const auto g = scene_gray(14);
  const auto a = orb_detect_and_describe(g), b = orb_detect_and_describe(g);
  ASSERT_EQ(a.descriptors.size(), b.descriptors.size());
  for (std::size_t i = 0; i < a.descriptors.size(); ++i) {
    EXPECT_EQ(a.descriptors[i], b.descriptors[i]);
    EXPECT_EQ(a.keypoints[i].x, b.keypoints[i].x);
    EXPECT_EQ(a.keypoints[i].y, b.keypoints[i].y);
  }
}

TEST(OrbDetectAndDescribe, TooSmallImageRejected) {
  try {
    orb_detect_and_describe(GrayImage(20, 20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ImageTooSmall);
  }
}

TEST(OrbDetectAndDescribe, DownscaleSharesKeypoints) {
  const auto g = scene_gray(15);
  const auto small = resize(g, static_cast<std::uint32_t>(std::lround(256 / 1.2)), static_cast<std::uint32_t>(std::lround(256 / 1.2)));
  const auto a = orb_detect_and_describe(g), b = orb_detect_and_describe(small);
  ASSERT_FALSE(b.keypoints.empty());
  const double sx = 256.0 / small.width();
  std::size_t shared = 0;
  for (const auto& kb : b.keypoints) {
    bool hit = false;
    for (const auto& ka : a.keypoints) hit |= std::hypot(kb.x * sx - ka.x, kb.y * sx - ka.y) <= 3.0;
    shared += hit;
  }
  EXPECT_GE(static_cast<double>(shared) / b.keypoints.size(), 0.30);
}

class OrbRotation : public ::testing::TestWithParam<double> {};

TEST_P(OrbRotation, MajorityOfCrossCheckedMatchesAreGeometricallyCorrect) {
  const auto g = scene_gray(16);
  const auto h = rotation_about(GetParam(), 127.5, 127.5);
  const auto rotated = warp_gray(g, h);
  const auto fa = orb_detect_and_describe(g), fb = orb_detect_and_describe(rotated);
  const auto matches = match_hamming(fa.descriptors, fb.descriptors, true);
  ASSERT_FALSE(matches.empty());
  std::size_t correct = 0;
  std::vector<double> good_dist;
  for (const auto& m : matches) {
    const auto& ka = fa.keypoints[static_cast<std::size_t>(m.query_index)];
    const auto& kb = fb.keypoints[static_cast<std::size_t>(m.train_index)];
    double px, py;
    ASSERT_TRUE(h.apply(ka.x, ka.y, px, py));
    if (std::hypot(px - kb.x, py - kb.y) <= 3.0) {
      ++correct;
      good_dist.push_back(m.distance);
    }
  }
  EXPECT_GE(static_cast<double>(correct) / matches.size(), 0.5) << correct << "/" << matches.size();
  ASSERT_FALSE(good_dist.empty());
  std::nth_element(good_dist.begin(), good_dist.begin() + good_dist.size() / 2, good_dist.end());
  EXPECT_LT(good_dist[good_dist.size() / 2], 64.0);
}

INSTANTIATE_TEST_SUITE_P(Angles, OrbRotation, ::testing::Values(15.0, 30.0, 45.0));

TEST(DaisyDescribe, DefaultDescriptorLengthIs200) {
  EXPECT_EQ(DaisyParams{}.descriptor_length(), 200u);
  const auto d = daisy_describe(scene_gray(17, 64), 8);
  ASSERT_FALSE(d.empty());
  for (const auto& x : d) EXPECT_EQ(x.values.size(), 200u);
}

TEST(DaisyDescribe, GridCardinalityIsExact) {
  for (auto [w, h, step] : {std::tuple{64u, 48u, 5}, std::tuple{100u, 31u, 1}, std::tuple{77u, 90u, 13}}) {
    const auto d = daisy_describe(GrayImage(w, h, 0.2f), step);
    EXPECT_EQ(d.size(), static_cast<std::size_t>(((w - 30) / step) * ((h - 30) / step))) << w << "x" << h << "/" << step;
  }
}

TEST(DaisyDescribe, ConstantImageGivesZeroVectors) {
  for (const auto& d : daisy_describe(GrayImage(48, 48, 0.7f), 4))
    for (float v : d.values) EXPECT_EQ(v, 0.0f);
}

TEST(DaisyDescribe, BlocksAreUnitOrZero) {
  for (const auto& d : daisy_describe(scene_gray(18, 64), 6))
    for (std::size_t b = 0; b < 25; ++b) {
      double n = 0;
      for (std::size_t o = 0; o < 8; ++o) n += d.values[b * 8 + o] * d.values[b * 8 + o];
      EXPECT_TRUE(std::abs(n) < 1e-12 || std::abs(n - 1.0) < 1e-4) << n;
    }
}

TEST(DaisyDescribe, IdenticalImagesHaveZeroMeanDistance) {
  const auto g = scene_gray(19, 64);
  const auto a = daisy_describe(g, 8), b = daisy_describe(g, 8);
  const auto m = knn_match_euclidean(a, b, 1);
  EXPECT_EQ(mean_match_distance(m), 0.0);
}

TEST(DaisyDescribe, SmallImageRejected) {
  try {
    daisy_describe(GrayImage(30, 64), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ImageTooSmall);
  }
}
