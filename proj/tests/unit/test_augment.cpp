#include <gtest/gtest.h>

#include <set>

#include "dupscope/augment.hpp"
#include "dupscope/codec.hpp"
#include "support/synth.hpp"
#include "support/tempdir.hpp"

using namespace dupscope;
namespace fs = std::filesystem;

namespace {

RasterImage scene(std::uint64_t seed, std::uint32_t w = 100, std::uint32_t h = 100) {
  return testkit::synth_scene(seed, w, h, testkit::random_palette(seed + 100));
}

void write_sources(const fs::path& dir, int n) {
  fs::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "src%02d.png", i);
    save_png(scene(static_cast<std::uint64_t>(i) + 1, 96 + 8 * (i % 3), 80 + 8 * (i % 2)), dir / name);
  }
}

}  // namespace

TEST(ApplyModification, ScaleUsesRoundedProductDimensions) {
  const auto out = apply_modification(scene(1), mod::Scale{7.42, 5.23}, 0);
  EXPECT_EQ(out.width(), 742u);
  EXPECT_EQ(out.height(), 523u);
}

TEST(ApplyModification, FullFrameCropIsIdentity) {
  const auto img = scene(2, 64, 48);
  EXPECT_EQ(apply_modification(img, mod::Crop{0, 0, 64, 48}, 0), img);
}

TEST(ApplyModification, CropCopiesRectangle) {
  const auto img = scene(3, 40, 30);
  const auto out = apply_modification(img, mod::Crop{5, 7, 10, 12}, 0);
  ASSERT_EQ(out.width(), 10u);
  ASSERT_EQ(out.height(), 12u);
  for (std::uint32_t y = 0; y < 12; ++y)
    for (std::uint32_t x = 0; x < 10; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.pixel(x, y)[c], img.pixel(x + 5, y + 7)[c]);
}

TEST(ApplyModification, NoiseIsDeterministicPerSeed) {
  const auto img = scene(4);
  const auto a = apply_modification(img, mod::Noise{0.1}, 77), b = apply_modification(img, mod::Noise{0.1}, 77);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, apply_modification(img, mod::Noise{0.1}, 78));
  EXPECT_NE(a, img);
}

TEST(ApplyModification, EveryKindIsDeterministic) {
  const auto img = scene(5, 64, 64);
  const auto other = std::make_shared<const RasterImage>(scene(6, 32, 40));
  const std::vector<ModificationSpec> all{mod::Crop{1, 2, 30, 30}, mod::Scale{1.5, 0.5}, mod::Blur{1.2},
                                          mod::AddText{"HELLO", 2, 2, 2, {255, 0, 0}}, mod::Stitch{"", mod::Side::Top, other},
                                          mod::Noise{0.03}, mod::ColorShift{10, -5, 3}, mod::Brightness{-20},
                                          mod::Contrast{1.3}, mod::Distort{0.04}};
  for (const auto& s : all) EXPECT_EQ(apply_modification(img, s, 9), apply_modification(img, s, 9));
}

TEST(ApplyModification, TextChangesPixels) {
  const auto img = RasterImage::filled(80, 20, 0, 0, 0);
  const auto out = apply_modification(img, mod::AddText{"AB", 1, 1, 2, {255, 255, 255}}, 0);
  std::size_t lit = 0;
  for (std::size_t i = 0; i < out.data().size(); i += 3) lit += out.data()[i] == 255;
  EXPECT_GT(lit, 20u);
}

TEST(ApplyModification, StitchMatchesSharedEdge) {
  const auto img = scene(7, 60, 40);
  const auto other = std::make_shared<const RasterImage>(scene(8, 30, 20));
  const auto right = apply_modification(img, mod::Stitch{"", mod::Side::Right, other}, 0);
  EXPECT_EQ(right.height(), 40u);
  EXPECT_EQ(right.width(), 60u + 60u);
  const auto bottom = apply_modification(img, mod::Stitch{"", mod::Side::Bottom, other}, 0);
  EXPECT_EQ(bottom.width(), 60u);
  EXPECT_EQ(bottom.height(), 40u + 40u);
  for (std::uint32_t y = 0; y < 40; ++y)
    for (std::uint32_t x = 0; x < 60; ++x) EXPECT_EQ(right.pixel(x, y)[0], img.pixel(x, y)[0]);
}

TEST(ApplyModification, InvalidSpecsRejected) {
  const auto img = scene(9, 20, 20);
  const std::vector<ModificationSpec> bad{mod::Crop{10, 10, 11, 5}, mod::Scale{0, 1}, mod::Scale{1, -2},
                                          mod::Blur{0}, mod::Contrast{0}, mod::Noise{-1}, mod::AddText{"X", 0, 0, 0, {}},
                                          mod::Stitch{"", mod::Side::Left, nullptr}};
  for (const auto& s : bad) {
    try {
      apply_modification(img, s, 0);
      ADD_FAILURE() << to_json(s).dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::InvalidSpec) << to_json(s).dump();
    }
  }
}

TEST(Compose, EmptyChainIsIdentity) {
  const auto img = scene(10);
  EXPECT_EQ(compose(img, {}, 3), img);
}

TEST(Compose, ScaleRoundTripRestoresDimensions) {
  const auto img = scene(11, 64, 50);
  const auto out = compose(img, {mod::Scale{2, 2}, mod::Scale{0.5, 0.5}}, 0);
  EXPECT_EQ(out.width(), 64u);
  EXPECT_EQ(out.height(), 50u);
}

TEST(Compose, AllKindChainMirrorsCombinedEdits) {
  const auto img = scene(12, 120, 100);
  const auto other = std::make_shared<const RasterImage>(scene(13, 80, 60));
  const auto out = compose(img,
                           {mod::Crop{10, 10, 90, 80}, mod::Scale{1.5, 1.5}, mod::AddText{"VIRAL", 4, 4, 2, {255, 255, 255}},
                            mod::Stitch{"", mod::Side::Right, other}},
                           21);
  EXPECT_EQ(out.height(), 120u);
  EXPECT_EQ(out.width(), 135u + 160u);
}

TEST(Compose, FailingStageIsNamed) {
  try {
    compose(scene(14, 20, 20), {mod::Scale{1, 1}, mod::Crop{0, 0, 50, 50}}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidSpec);
    EXPECT_NE(std::string(e.what()).find("stage 1"), std::string::npos);
  }
}

TEST(ModificationSpecJson, RoundTripsEveryKind) {
  const std::vector<ModificationSpec> all{mod::Crop{1, 2, 3, 4}, mod::Scale{1.5, 0.5}, mod::Blur{1.2},
                                          mod::AddText{"HELLO", 2, 3, 2, {255, 10, 0}}, mod::Stitch{"x.png", mod::Side::Top, nullptr},
                                          mod::Noise{0.03}, mod::ColorShift{10, -5, 3}, mod::Brightness{-20},
                                          mod::Contrast{1.3}, mod::Distort{0.04}};
  for (const auto& s : all) EXPECT_EQ(to_json(spec_from_json(to_json(s))), to_json(s));
}

TEST(GeneratePairs, BalancedCardinalityAndReplay) {
  testkit::TempDir tmp("aug");
  write_sources(tmp / "src", 10);
  const auto m = generate_pairs(tmp / "src", tmp / "out", 1, 42);
  ASSERT_EQ(m.pairs.size(), 20u);
  std::size_t sim = 0, dis = 0;
  for (const auto& p : m.pairs) {
    (p.label == PairLabel::Similar ? sim : dis)++;
    if (p.label == PairLabel::Similar) {
      EXPECT_EQ(p.source_b, p.image_a);
      EXPECT_GE(p.chain.size(), 1u);
      EXPECT_LE(p.chain.size(), 4u);
    } else {
      EXPECT_NE(p.source_b, p.image_a);
      for (const auto& s : p.chain)
        if (const auto* st = std::get_if<mod::Stitch>(&s)) EXPECT_NE(st->other_path, p.image_a);
    }
    // Provenance replay from the stored PNG source is bit-exact.
    EXPECT_EQ(compose(load_image(p.source_b), p.chain, p.seed), load_image(p.image_b)) << p.image_b;
  }
  EXPECT_EQ(sim, 10u);
  EXPECT_EQ(dis, 10u);

  const auto read = read_manifest(tmp / "out" / "manifest.jsonl");
  ASSERT_EQ(read.pairs.size(), m.pairs.size());
  for (std::size_t i = 0; i < m.pairs.size(); ++i) EXPECT_EQ(to_json(read.pairs[i]), to_json(m.pairs[i]));
}

TEST(GeneratePairs, SameSeedGivesIdenticalManifests) {
  testkit::TempDir tmp("aug");
  write_sources(tmp / "src", 4);
  const auto a = generate_pairs(tmp / "src", tmp / "a", 2, 5);
  const auto b = generate_pairs(tmp / "src", tmp / "b", 2, 5);
  ASSERT_EQ(a.pairs.size(), 16u);
  // Output directories differ, so compare everything except the written paths.
  const auto strip = [](nlohmann::json j) {
    j.erase("b");
    for (auto& s : j["chain"])
      if (s["kind"] == "stitch") s["params"]["other"] = std::filesystem::path(s["params"]["other"].get<std::string>()).filename().string();
    j["a"] = std::filesystem::path(j["a"].get<std::string>()).filename().string();
    j["source_b"] = std::filesystem::path(j["source_b"].get<std::string>()).filename().string();
    return j;
  };
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    EXPECT_EQ(strip(to_json(a.pairs[i])), strip(to_json(b.pairs[i])));
    EXPECT_EQ(read_file(a.pairs[i].image_b), read_file(b.pairs[i].image_b));
  }
}

TEST(GeneratePairs, UndecodableSourcesAreSkippedAndListed) {
  testkit::TempDir tmp("aug");
  write_sources(tmp / "src", 3);
  write_file(tmp / "src" / "broken.png", std::vector<std::uint8_t>{0x89, 'P', 'N', 'G', 1, 2, 3});
  const auto m = generate_pairs(tmp / "src", tmp / "out", 1, 1);
  EXPECT_EQ(m.pairs.size(), 6u);
  ASSERT_EQ(m.skipped.size(), 1u);
  EXPECT_NE(m.skipped[0].first.find("broken.png"), std::string::npos);
  EXPECT_EQ(read_manifest(tmp / "out" / "manifest.jsonl").skipped.size(), 1u);
}

TEST(GeneratePairs, FewerThanTwoSourcesRejected) {
  testkit::TempDir tmp("aug");
  write_sources(tmp / "src", 1);
  try {
    generate_pairs(tmp / "src", tmp / "out", 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySourceDir);
  }
  try {
    generate_pairs(tmp / "missing", tmp / "out", 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptySourceDir);
  }
}
