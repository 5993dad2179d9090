#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dupscope/codec.hpp"
#include "dupscope/image.hpp"
#include "support/synth.hpp"

using namespace dupscope;

namespace {

RasterImage random_raster(std::uint64_t seed, std::uint32_t w, std::uint32_t h) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  RasterImage img(w, h);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

GrayImage random_gray(std::uint64_t seed, std::uint32_t w, std::uint32_t h) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(0.0f, 1.0f);
  GrayImage img(w, h);
  for (auto& v : img.data()) v = d(rng);
  return img;
}

}  // namespace

TEST(Codec, SinglePixelPngDecodesExactly) {
  RasterImage img(1, 1);
  img.pixel(0, 0)[0] = 255;
  const auto decoded = decode_image(encode_png(img));
  ASSERT_EQ(decoded.width(), 1u);
  ASSERT_EQ(decoded.height(), 1u);
  EXPECT_EQ(decoded.pixel(0, 0)[0], 255);
  EXPECT_EQ(decoded.pixel(0, 0)[1], 0);
  EXPECT_EQ(decoded.pixel(0, 0)[2], 0);
}

TEST(Codec, CheckerboardPngRoundTrip) {
  RasterImage img(2, 2);
  for (std::uint32_t y = 0; y < 2; ++y)
    for (std::uint32_t x = 0; x < 2; ++x) {
      const std::uint8_t v = (x + y) % 2 ? 255 : 0;
      auto* p = img.pixel(x, y);
      p[0] = p[1] = p[2] = v;
    }
  EXPECT_EQ(decode_image(encode_png(img)), img);
}

TEST(Codec, RandomRasterPngRoundTripIsByteIdentical) {
  const auto img = random_raster(3, 32, 32);
  EXPECT_EQ(decode_image(encode_png(img)), img);
}

TEST(Codec, JpegDecodesWithinCodecTolerance) {
  RasterImage img(64, 48);
  for (std::uint32_t y = 0; y < 48; ++y)
    for (std::uint32_t x = 0; x < 64; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = static_cast<std::uint8_t>(3 * x + y);
      p[1] = static_cast<std::uint8_t>(120 + 60 * std::sin(x / 9.0));
      p[2] = static_cast<std::uint8_t>(4 * y);
    }
  const auto decoded = decode_image(encode_jpeg(img, 95));
  ASSERT_EQ(decoded.width(), 64u);
  ASSERT_EQ(decoded.height(), 48u);
  double err = 0;
  for (std::size_t i = 0; i < img.data().size(); ++i) err += std::abs(int(img.data()[i]) - int(decoded.data()[i]));
  EXPECT_LT(err / static_cast<double>(img.data().size()), 8.0);
}

TEST(Codec, TruncatedPngIsMalformed) {
  auto bytes = encode_png(random_raster(1, 16, 16));
  bytes.resize(bytes.size() / 2);
  try {
    decode_image(bytes);
    FAIL() << "expected MalformedImage";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedImage);
  }
}

TEST(Codec, TruncatedJpegIsMalformed) {
  auto bytes = encode_jpeg(random_raster(1, 16, 16));
  bytes.resize(20);
  try {
    decode_image(bytes);
    FAIL() << "expected MalformedImage";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedImage);
  }
}

TEST(Codec, OtherContainersAreUnsupported) {
  const std::vector<std::uint8_t> gif{'G', 'I', 'F', '8', '9', 'a', 0, 0, 0, 0};
  try {
    decode_image(gif);
    FAIL() << "expected UnsupportedFormat";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnsupportedFormat);
  }
}

TEST(ToGray, WhiteIsOne) {
  const auto g = to_gray(RasterImage::filled(4, 3, 255, 255, 255));
  for (float v : g.data()) EXPECT_FLOAT_EQ(v, 1.0f);
}

TEST(ToGray, PureRedUsesRec601Weight) {
  const auto g = to_gray(RasterImage::filled(4, 3, 255, 0, 0));
  for (float v : g.data()) EXPECT_NEAR(v, 0.299f, 1e-6f);
}

TEST(ToGray, MatchesScalarOracle) {
  const auto img = random_raster(9, 17, 13);
  const auto g = to_gray(img);
  for (std::uint32_t y = 0; y < img.height(); ++y)
    for (std::uint32_t x = 0; x < img.width(); ++x) {
      const auto* p = img.pixel(x, y);
      const double expect = (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
      EXPECT_NEAR(g.at(x, y), expect, 1e-6);
    }
}

TEST(ToGray, MonotoneInEachChannel) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> d(0, 255);
  for (int t = 0; t < 500; ++t) {
    RasterImage a(1, 1), b(1, 1);
    for (int c = 0; c < 3; ++c) {
      const int lo = d(rng);
      a.pixel(0, 0)[c] = static_cast<std::uint8_t>(lo);
      b.pixel(0, 0)[c] = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(lo, 255)(rng));
    }
    EXPECT_LE(to_gray(a).at(0, 0), to_gray(b).at(0, 0));
  }
}

TEST(Resize, ConstantFieldStaysConstant) {
  const auto out = resize(GrayImage(10, 10, 0.37f), 20, 20);
  ASSERT_EQ(out.width(), 20u);
  ASSERT_EQ(out.height(), 20u);
  for (float v : out.data()) EXPECT_NEAR(v, 0.37f, 1e-6f);
}

TEST(Resize, SameDimensionsIsIdentity) {
  const auto g = random_gray(4, 13, 9);
  EXPECT_EQ(resize(g, 13, 9), g);
  const auto r = random_raster(4, 13, 9);
  EXPECT_EQ(resize(r, 13, 9), r);
}

TEST(Resize, TwoPixelRampMatchesBilinearClosedForm) {
  GrayImage g(2, 1);
  g.at(0, 0) = 0.0f;
  g.at(1, 0) = 1.0f;
  const auto out = resize(g, 4, 1);
  // Pixel-centre sampling: source x = (i + 0.5) * 2/4 - 0.5, clamped to [0, 1].
  const double expect[4] = {0.0, 0.25, 0.75, 1.0};
  for (std::uint32_t i = 0; i < 4; ++i) EXPECT_NEAR(out.at(i, 0), expect[i], 1e-6);
}

TEST(Resize, ZeroDimensionRejected) {
  try {
    resize(GrayImage(4, 4), 0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroDimension);
  }
  try {
    resize(RasterImage(4, 4), 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroDimension);
  }
}

TEST(GaussianBlur, ConstantImageUnchanged) {
  const GrayImage g(12, 9, 0.6f);
  for (double sigma : {0.5, 1.0, 3.0}) {
    const auto out = gaussian_blur(g, sigma);
    for (float v : out.data()) EXPECT_NEAR(v, 0.6f, 1e-6f);
  }
}

TEST(GaussianBlur, ImpulseResponseEqualsKernelProduct) {
  GrayImage g(9, 9, 0.0f);
  g.at(4, 4) = 1.0f;
  const auto out = gaussian_blur(g, 1.0);
  // Independent 1-D kernel: radius ceil(3 sigma) = 3, L1-normalized.
  std::vector<double> k;
  double sum = 0;
  for (int i = -3; i <= 3; ++i) {
    k.push_back(std::exp(-i * i / 2.0));
    sum += k.back();
  }
  for (auto& v : k) v /= sum;
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      const int dx = x - 4, dy = y - 4;
      const double expect = (std::abs(dx) <= 3 && std::abs(dy) <= 3) ? k[dx + 3] * k[dy + 3] : 0.0;
      EXPECT_NEAR(out.at(x, y), expect, 1e-6);
    }
}

TEST(GaussianBlur, SemigroupApproximation) {
  const auto g = random_gray(8, 48, 40);
  const auto twice = gaussian_blur(gaussian_blur(g, 1.5), 1.5);
  const auto once = gaussian_blur(g, 1.5 * std::sqrt(2.0));
  // Clamp-to-edge padding breaks the semigroup near the border; compare beyond the wider kernel radius.
  const int r = static_cast<int>(std::ceil(3 * 1.5 * std::sqrt(2.0)));
  float worst = 0;
  for (int y = r; y < 40 - r; ++y)
    for (int x = r; x < 48 - r; ++x) worst = std::max(worst, std::abs(twice.at(x, y) - once.at(x, y)));
  EXPECT_LT(worst, 1e-2f);
}

TEST(GaussianBlur, MeanPreservedOnRandomImage) {
  const auto g = random_gray(10, 64, 64);
  const auto b = gaussian_blur(g, 1.2);
  double m0 = 0, m1 = 0;
  for (float v : g.data()) m0 += v;
  for (float v : b.data()) m1 += v;
  EXPECT_NEAR(m0 / g.data().size(), m1 / b.data().size(), 1e-3);
}

TEST(GaussianBlur, NonPositiveSigmaRejected) {
  for (double s : {0.0, -1.0}) {
    try {
      gaussian_blur(GrayImage(5, 5), s);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::NonPositiveSigma);
    }
  }
}

TEST(WarpPerspective, IdentityIsPixelIdentical) {
  const auto img = random_raster(11, 21, 17);
  EXPECT_EQ(warp_perspective(img, Homography::identity(), 21, 17), img);
}

TEST(WarpPerspective, TranslationShiftsColumnsAndFillsBlack) {
  RasterImage img(3, 3);
  for (std::uint32_t y = 0; y < 3; ++y)
    for (std::uint32_t x = 0; x < 3; ++x)
      for (int c = 0; c < 3; ++c) img.pixel(x, y)[c] = static_cast<std::uint8_t>(10 + 40 * x + 100 * y + c);
  const auto out = warp_perspective(img, Homography::translation(1, 0), 3, 3);
  for (std::uint32_t y = 0; y < 3; ++y) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(out.pixel(0, y)[c], 0);
    for (std::uint32_t x = 1; x < 3; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.pixel(x, y)[c], img.pixel(x - 1, y)[c]);
  }
}

TEST(WarpPerspective, SmoothFieldRoundTripWithinTwoLevels) {
  RasterImage img(64, 64);
  for (std::uint32_t y = 0; y < 64; ++y)
    for (std::uint32_t x = 0; x < 64; ++x) {
      auto* p = img.pixel(x, y);
      p[0] = static_cast<std::uint8_t>(2 * x + y);
      p[1] = static_cast<std::uint8_t>(3 * y);
      p[2] = static_cast<std::uint8_t>(128 + x - y);
    }
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 10; ++t) {
    const Homography h{{1 + 0.03 * u(rng), 0.03 * u(rng), u(rng), 0.03 * u(rng), 1 + 0.03 * u(rng), u(rng),
                        2e-4 * u(rng), 2e-4 * u(rng), 1.0}};
    const auto back = warp_perspective(warp_perspective(img, h, 64, 64), h.inverse(), 64, 64);
    for (std::uint32_t y = 8; y < 56; ++y)
      for (std::uint32_t x = 8; x < 56; ++x)
        for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(int(back.pixel(x, y)[c]) - int(img.pixel(x, y)[c])), 2);
  }
}

TEST(WarpPerspective, SingularHomographyRejected) {
  const Homography h{{1, 2, 0, 2, 4, 0, 0, 0, 1}};
  try {
    warp_perspective(RasterImage(4, 4), h, 4, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularHomography);
  }
}

TEST(RasterImage, BufferLengthMustMatchDimensions) {
  EXPECT_THROW(RasterImage(2, 2, std::vector<std::uint8_t>(11)), Error);
  EXPECT_NO_THROW(RasterImage(2, 2, std::vector<std::uint8_t>(12)));
}
