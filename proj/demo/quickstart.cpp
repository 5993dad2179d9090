// Compares a procedurally drawn image against an edited copy and an unrelated image
// with every hand-crafted technique.

#include <cmath>
#include <cstdio>
#include <random>

#include "dupscope/augment.hpp"
#include "dupscope/retrieval.hpp"

using namespace dupscope;

static RasterImage draw(std::uint64_t seed, std::uint32_t w, std::uint32_t h) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> c(0, 255), px(0, static_cast<int>(w) - 1), py(0, static_cast<int>(h) - 1), sz(6, 40);
  RasterImage img = RasterImage::filled(w, h, 30, 40, 60);
  for (int s = 0; s < 60; ++s) {
    const int x0 = px(rng), y0 = py(rng), rw = sz(rng), rh = sz(rng);
    const auto r = static_cast<std::uint8_t>(c(rng)), g = static_cast<std::uint8_t>(c(rng)), b = static_cast<std::uint8_t>(c(rng));
    for (int y = y0; y < std::min<int>(y0 + rh, static_cast<int>(h)); ++y)
      for (int x = x0; x < std::min<int>(x0 + rw, static_cast<int>(w)); ++x) {
        auto* p = img.pixel(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
        p[0] = r;
        p[1] = g;
        p[2] = b;
      }
  }
  return img;
}

int main() {
  const RasterImage original = draw(1, 320, 240);
  const RasterImage edited =
      compose(original, {mod::Scale{1.8, 1.8}, mod::AddText{"BREAKING", 10, 10, 3, {255, 255, 255}}}, 7);
  const RasterImage unrelated = draw(2, 320, 240);

  for (auto kind : {MethodKind::Histogram, MethodKind::Daisy, MethodKind::Orb, MethodKind::ImprovedOrb}) {
    const Method m = Method::make(kind);
    const auto dup = timed_compare(m, original, edited);
    const auto other = timed_compare(m, original, unrelated);
    std::printf("%-13s threshold %-6g edited copy: %8.4f (%s, %.3fs)  unrelated: %8.4f (%s)\n",
                std::string(method_name(kind)).c_str(), m.threshold, dup.verdict.score,
                dup.verdict.similar ? "similar" : "dissimilar", dup.seconds, other.verdict.score,
                other.verdict.similar ? "similar" : "dissimilar");
  }
  return 0;
}
