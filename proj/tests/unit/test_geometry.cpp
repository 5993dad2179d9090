#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dupscope/augment.hpp"
#include "dupscope/geometry.hpp"
#include "support/synth.hpp"

using namespace dupscope;

namespace {

std::vector<Correspondence> project(const Homography& h, const std::vector<std::pair<double, double>>& src) {
  std::vector<Correspondence> out;
  for (auto [x, y] : src) {
    const double w = h.m[6] * x + h.m[7] * y + h.m[8];
    out.push_back({x, y, (h.m[0] * x + h.m[1] * y + h.m[2]) / w, (h.m[3] * x + h.m[4] * y + h.m[5]) / w});
  }
  return out;
}

Homography random_homography(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  return Homography{{1 + 0.2 * u(rng), 0.2 * u(rng), 20 * u(rng), 0.2 * u(rng), 1 + 0.2 * u(rng), 20 * u(rng),
                     5e-4 * u(rng), 5e-4 * u(rng), 1.0}};
}

}  // namespace

TEST(DltHomography, IdentityFromFixedPoints) {
  const auto h = dlt_homography({{0, 0, 0, 0}, {10, 0, 10, 0}, {10, 10, 10, 10}, {0, 10, 0, 10}});
  const auto id = Homography::identity();
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(h.m[i], id.m[i], 1e-9);
}

TEST(DltHomography, TranslationClosedForm) {
  const auto h = dlt_homography({{0, 0, 5, -2}, {10, 0, 15, -2}, {10, 10, 15, 8}, {0, 10, 5, 8}});
  const auto t = Homography::translation(5, -2);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(h.m[i], t.m[i], 1e-9);
}

TEST(DltHomography, RecoversPlantedHomography) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> p(0, 200);
  for (int t = 0; t < 20; ++t) {
    const auto planted = random_homography(rng);
    std::vector<std::pair<double, double>> src;
    for (int i = 0; i < 8; ++i) src.push_back({p(rng), p(rng)});
    const auto h = dlt_homography(project(planted, src));
    EXPECT_DOUBLE_EQ(h.m[8], 1.0);
    for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(h.m[i], planted.m[i], 1e-6 * std::max(1.0, std::abs(planted.m[i])));
  }
}

TEST(DltHomography, CollinearPointsAreDegenerate) {
  try {
    dlt_homography({{0, 0, 0, 0}, {1, 1, 1, 1}, {2, 2, 2, 2}, {3, 3, 3, 3}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateConfiguration);
  }
}

TEST(DltHomography, TooFewPointsRejected) {
  try {
    dlt_homography({{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientPoints);
  }
}

TEST(RansacHomography, ExactIdentityGivesAllInliers) {
  std::vector<Correspondence> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({i * 7.0 + (i % 3) * 11, i * 3.0 + (i % 4) * 9, 0, 0});
  for (auto& c : pts) c.dst_x = c.src_x, c.dst_y = c.src_y;
  const auto r = ransac_homography(pts);
  EXPECT_EQ(r.mask.count(), pts.size());
  EXPECT_DOUBLE_EQ(true_match_ratio(r.mask), 1.0);
}

TEST(RansacHomography, SeparatesPlantedInliersFromOutliers) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> p(0, 300);
  const auto planted = random_homography(rng);
  std::vector<std::pair<double, double>> src;
  for (int i = 0; i < 20; ++i) src.push_back({p(rng), p(rng)});
  auto pts = project(planted, src);
  for (int i = 0; i < 10; ++i) pts.push_back({p(rng), p(rng), p(rng), p(rng)});
  RansacParams params;
  params.rng_seed = 7;
  const auto r = ransac_homography(pts, params);
  std::size_t kept = 0, rejected = 0;
  for (std::size_t i = 0; i < 20; ++i) kept += r.mask.bits[i];
  for (std::size_t i = 20; i < 30; ++i) rejected += r.mask.bits[i] == 0;
  EXPECT_GE(kept, 18u);
  EXPECT_GE(rejected, 9u);

  // Every flagged match satisfies the residual bound under the returned model.
  const auto inv = r.homography.inverse();
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (r.mask.bits[i]) EXPECT_LT(symmetric_transfer_error(r.homography, inv, pts[i]), params.reprojection_threshold);

  const auto again = ransac_homography(pts, params);
  EXPECT_EQ(again.mask.bits, r.mask.bits);
}

TEST(RansacHomography, ThreeMatchesRejected) {
  try {
    ransac_homography(std::vector<Correspondence>{{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientMatches);
  }
}

TEST(TrueMatchRatio, FormulaArithmetic) {
  EXPECT_EQ(true_match_ratio({{1, 1, 1, 1}}), 1.0);
  EXPECT_EQ(true_match_ratio({{0, 0}}), 0.0);
  EXPECT_EQ(true_match_ratio({{1, 0, 1, 0}}), 0.5);
}

TEST(TrueMatchRatio, EqualsIndependentSumOverN) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    InlierMask m;
    const auto n = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m.bits.push_back(static_cast<std::uint8_t>(rng() & 1));
      ones += m.bits.back();
    }
    const double tr = true_match_ratio(m);
    EXPECT_EQ(tr, static_cast<double>(ones) / static_cast<double>(n));
    EXPECT_GE(tr, 0.0);
    EXPECT_LE(tr, 1.0);
  }
}

TEST(TrueMatchRatio, EmptyMaskRejected) {
  try {
    true_match_ratio({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyMask);
  }
}

TEST(ImprovedOrb, SelfMatchIsNearlyAllInliers) {
  const auto img = testkit::synth_scene(51, 256, 256, testkit::random_palette(52));
  const auto v = improved_orb_similarity(img, img);
  EXPECT_GE(v.score, 0.95);
  EXPECT_TRUE(v.similar);
}

TEST(ImprovedOrb, IndependentNoiseTexturesAreDissimilar) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<int> d(0, 255);
  RasterImage a(192, 192), b(192, 192);
  for (auto& v : a.data()) v = static_cast<std::uint8_t>(d(rng));
  for (auto& v : b.data()) v = static_cast<std::uint8_t>(d(rng));
  const auto v = improved_orb_similarity(a, b);
  EXPECT_LT(v.score, 0.35);
  EXPECT_FALSE(v.similar);
}

TEST(ImprovedOrb, ScaledWithCaptionIsSimilar) {
  const auto img = testkit::synth_scene(55, 256, 256, testkit::random_palette(56));
  const auto edited = compose(img, {mod::Scale{2.0, 2.0}, mod::AddText{"BREAKING NEWS", 10, 10, 3, {255, 255, 0}}}, 5);
  EXPECT_TRUE(improved_orb_similarity(img, edited).similar);
}

TEST(ImprovedOrb, BlankImageIsDegenerateAndDissimilar) {
  const auto img = testkit::synth_scene(57, 128, 128, testkit::random_palette(58));
  const auto v = improved_orb_similarity(img, RasterImage::filled(128, 128, 90, 90, 90));
  EXPECT_TRUE(v.degenerate);
  EXPECT_FALSE(v.similar);
  EXPECT_EQ(v.score, 0.0);
}

TEST(ImprovedOrb, RaisingThresholdNeverCreatesSimilarity) {
  const auto ev = testkit::make_event(61, 4, 4, 192);
  for (const auto& img : ev.images) {
    const auto fa = orb_detect_and_describe(to_gray(ev.query)), fb = orb_detect_and_describe(to_gray(img));
    bool prev = true;
    for (double t = 0.05; t < 1.0; t += 0.1) {
      const bool s = improved_orb_verdict(fa, fb, t).similar;
      if (!prev) EXPECT_FALSE(s);
      prev = s;
    }
  }
}
