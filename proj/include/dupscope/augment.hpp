#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dupscope/codec.hpp"
#include "dupscope/font.hpp"
#include "dupscope/image.hpp"
#include "dupscope/parallel.hpp"
#include "dupscope/util/rng.hpp"

namespace dupscope {

namespace mod {

struct Crop {
  std::uint32_t left = 0, top = 0, width = 1, height = 1;
};
struct Scale {
  double fx = 1.0, fy = 1.0;
};
struct Blur {
  double sigma = 1.0;
};
struct AddText {
  std::string text;
  int x = 0, y = 0;
  int scale = 1;  // pixel size of one font dot
  std::array<std::uint8_t, 3> color{255, 255, 255};
};
enum class Side { Left, Right, Top, Bottom };
struct Stitch {
  std::string other_path;
  Side side = Side::Right;
  std::shared_ptr<const RasterImage> other;  // loaded from other_path when absent
};
struct Noise {
  double stddev = 0.05;  // fraction of full scale
};
struct ColorShift {
  int dr = 0, dg = 0, db = 0;  // 8-bit levels
};
struct Brightness {
  int delta = 0;  // 8-bit levels
};
struct Contrast {
  double factor = 1.0;  // about mid-grey
};
/// Random perspective warp: each corner moves by at most max_jitter of the image size.
struct Distort {
  double max_jitter = 0.05;
};

}  // namespace mod

using ModificationSpec = std::variant<mod::Crop, mod::Scale, mod::Blur, mod::AddText, mod::Stitch, mod::Noise,
                                      mod::ColorShift, mod::Brightness, mod::Contrast, mod::Distort>;

inline std::string side_name(mod::Side s) {
  switch (s) {
    case mod::Side::Left: return "left";
    case mod::Side::Right: return "right";
    case mod::Side::Top: return "top";
    case mod::Side::Bottom: return "bottom";
  }
  return "right";
}

inline mod::Side parse_side(const std::string& s) {
  if (s == "left") return mod::Side::Left;
  if (s == "right") return mod::Side::Right;
  if (s == "top") return mod::Side::Top;
  if (s == "bottom") return mod::Side::Bottom;
  fail(Errc::InvalidSpec, "unknown stitch side '" + s + "'");
}

namespace detail {

inline RasterImage blur_rgb(const RasterImage& img, double sigma) {
  RasterImage out(img.width(), img.height());
  for (int c = 0; c < 3; ++c) {
    GrayImage g(img.width(), img.height());
    auto src = img.data();
    auto gd = g.data();
    for (std::size_t i = 0; i < gd.size(); ++i) gd[i] = src[3 * i + static_cast<std::size_t>(c)] / 255.0f;
    const GrayImage b = gaussian_blur(g, sigma);
    auto bd = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < bd.size(); ++i) dst[3 * i + static_cast<std::size_t>(c)] = to_u8(bd[i] * 255.0f);
  }
  return out;
}

inline std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

inline void draw_text(RasterImage& img, const mod::AddText& t) {
  int pen = t.x;
  for (char ch : t.text) {
    const auto& g = glyph(ch);
    for (int col = 0; col < kGlyphWidth; ++col)
      for (int row = 0; row < kGlyphHeight; ++row) {
        if (!((g[static_cast<std::size_t>(col)] >> row) & 1)) continue;
        for (int dy = 0; dy < t.scale; ++dy)
          for (int dx = 0; dx < t.scale; ++dx) {
            const int px = pen + col * t.scale + dx, py = t.y + row * t.scale + dy;
            if (px < 0 || py < 0 || px >= static_cast<int>(img.width()) || py >= static_cast<int>(img.height())) continue;
            std::uint8_t* p = img.pixel(static_cast<std::uint32_t>(px), static_cast<std::uint32_t>(py));
            p[0] = t.color[0];
            p[1] = t.color[1];
            p[2] = t.color[2];
          }
      }
    pen += (kGlyphWidth + 1) * t.scale;
  }
}

inline RasterImage stitch(const RasterImage& img, const RasterImage& other, mod::Side side) {
  const bool horizontal = side == mod::Side::Left || side == mod::Side::Right;
  RasterImage o;
  if (horizontal) {
    const auto w = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(
                                                   static_cast<double>(other.width()) * img.height() / other.height())));
    o = resize(other, w, img.height());
  } else {
    const auto h = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(
                                                   static_cast<double>(other.height()) * img.width() / other.width())));
    o = resize(other, img.width(), h);
  }
  const std::uint32_t w = horizontal ? img.width() + o.width() : img.width();
  const std::uint32_t h = horizontal ? img.height() : img.height() + o.height();
  RasterImage out(w, h);
  const auto blit = [&](const RasterImage& src, std::uint32_t ox, std::uint32_t oy) {
    for (std::uint32_t y = 0; y < src.height(); ++y)
      std::copy_n(src.pixel(0, y), src.width() * 3, out.pixel(ox, oy + y));
  };
  switch (side) {
    case mod::Side::Left: blit(o, 0, 0); blit(img, o.width(), 0); break;
    case mod::Side::Right: blit(img, 0, 0); blit(o, img.width(), 0); break;
    case mod::Side::Top: blit(o, 0, 0); blit(img, 0, o.height()); break;
    case mod::Side::Bottom: blit(img, 0, 0); blit(o, 0, img.height()); break;
  }
  return out;
}

template <typename F>
RasterImage map_pixels(const RasterImage& img, F&& f) {
  RasterImage out = img;
  auto d = out.data();
  for (std::size_t i = 0; i < d.size(); i += 3) f(d[i], d[i + 1], d[i + 2]);
  return out;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace detail

/// Deterministic in (img, spec, seed). Scale produces (round(w*fx), round(h*fy)).
inline RasterImage apply_modification(const RasterImage& img, const ModificationSpec& spec, std::uint64_t seed) {
  using namespace mod;
  return std::visit(
      detail::overloaded{
          [&](const Crop& c) {
            require(c.width >= 1 && c.height >= 1 && static_cast<std::uint64_t>(c.left) + c.width <= img.width() &&
                        static_cast<std::uint64_t>(c.top) + c.height <= img.height(),
                    Errc::InvalidSpec, "crop rectangle exceeds the source image");
            RasterImage out(c.width, c.height);
            for (std::uint32_t y = 0; y < c.height; ++y)
              std::copy_n(img.pixel(c.left, c.top + y), c.width * 3, out.pixel(0, y));
            return out;
          },
          [&](const Scale& s) {
            require(s.fx > 0 && s.fy > 0, Errc::InvalidSpec, "scale factors must be positive");
            const auto w = static_cast<std::uint32_t>(std::lround(img.width() * s.fx));
            const auto h = static_cast<std::uint32_t>(std::lround(img.height() * s.fy));
            require(w >= 1 && h >= 1, Errc::InvalidSpec, "scaled image would be empty");
            return resize(img, w, h);
          },
          [&](const Blur& b) {
            require(b.sigma > 0, Errc::InvalidSpec, "blur sigma must be positive");
            return detail::blur_rgb(img, b.sigma);
          },
          [&](const AddText& t) {
            require(t.scale >= 1, Errc::InvalidSpec, "text scale must be >= 1");
            RasterImage out = img;
            detail::draw_text(out, t);
            return out;
          },
          [&](const Stitch& s) {
            if (s.other) return detail::stitch(img, *s.other, s.side);
            require(!s.other_path.empty(), Errc::InvalidSpec, "stitch needs another image");
            return detail::stitch(img, load_image(s.other_path), s.side);
          },
          [&](const Noise& n) {
            require(n.stddev >= 0, Errc::InvalidSpec, "noise stddev must be non-negative");
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> dist(0.0, n.stddev * 255.0);
            return detail::map_pixels(img, [&](std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
              r = detail::clamp_u8(r + dist(rng));
              g = detail::clamp_u8(g + dist(rng));
              b = detail::clamp_u8(b + dist(rng));
            });
          },
          [&](const ColorShift& c) {
            return detail::map_pixels(img, [&](std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
              r = detail::clamp_u8(r + c.dr);
              g = detail::clamp_u8(g + c.dg);
              b = detail::clamp_u8(b + c.db);
            });
          },
          [&](const Brightness& b) {
            return detail::map_pixels(img, [&](std::uint8_t& r, std::uint8_t& g, std::uint8_t& bl) {
              r = detail::clamp_u8(r + b.delta);
              g = detail::clamp_u8(g + b.delta);
              bl = detail::clamp_u8(bl + b.delta);
            });
          },
          [&](const Contrast& c) {
            require(c.factor > 0, Errc::InvalidSpec, "contrast factor must be positive");
            const auto f = [&](std::uint8_t v) { return detail::clamp_u8((v - 128.0) * c.factor + 128.0); };
            return detail::map_pixels(img, [&](std::uint8_t& r, std::uint8_t& g, std::uint8_t& b) {
              r = f(r);
              g = f(g);
              b = f(b);
            });
          },
          [&](const Distort& d) {
            require(d.max_jitter >= 0 && d.max_jitter < 0.25, Errc::InvalidSpec, "distort jitter must lie in [0, 0.25)");
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(-d.max_jitter, d.max_jitter);
            const double w = img.width() - 1.0, h = img.height() - 1.0;
            const std::array<std::array<double, 2>, 4> corners{{{0, 0}, {w, 0}, {w, h}, {0, h}}};
            // Solve the 4-point homography directly with an 8x8 system.
            std::array<std::array<double, 9>, 8> a{};
            for (std::size_t i = 0; i < 4; ++i) {
              const double x = corners[i][0], y = corners[i][1];
              const double X = x + u(rng) * img.width(), Y = y + u(rng) * img.height();
              a[2 * i] = {x, y, 1, 0, 0, 0, -X * x, -X * y, X};
              a[2 * i + 1] = {0, 0, 0, x, y, 1, -Y * x, -Y * y, Y};
            }
            for (std::size_t c = 0; c < 8; ++c) {
              std::size_t piv = c;
              for (std::size_t r = c + 1; r < 8; ++r)
                if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
              std::swap(a[c], a[piv]);
              for (std::size_t r = 0; r < 8; ++r) {
                if (r == c) continue;
                const double f = a[r][c] / a[c][c];
                for (std::size_t k = c; k < 9; ++k) a[r][k] -= f * a[c][k];
              }
            }
            Homography hm;
            for (std::size_t i = 0; i < 8; ++i) hm.m[i] = a[i][8] / a[i][i];
            hm.m[8] = 1.0;
            return warp_perspective(img, hm, img.width(), img.height());
          },
      },
      spec);
}

/// Applies `specs` left to right; stage i draws randomness from derive_seed(seed, {i}).
inline RasterImage compose(const RasterImage& img, const std::vector<ModificationSpec>& specs, std::uint64_t seed) {
  RasterImage cur = img;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      cur = apply_modification(cur, specs[i], derive_seed(seed, {i}));
    } catch (const Error& e) {
      if (e.code() != Errc::InvalidSpec) throw;
      fail(Errc::InvalidSpec, "stage " + std::to_string(i) + ": " + e.what());
    }
  }
  return cur;
}

// ---- JSON ----

inline nlohmann::json to_json(const ModificationSpec& spec) {
  using nlohmann::json;
  using namespace mod;
  return std::visit(
      detail::overloaded{
          [](const Crop& c) {
            return json{{"kind", "crop"}, {"params", {{"left", c.left}, {"top", c.top}, {"width", c.width}, {"height", c.height}}}};
          },
          [](const Scale& s) { return json{{"kind", "scale"}, {"params", {{"fx", s.fx}, {"fy", s.fy}}}}; },
          [](const Blur& b) { return json{{"kind", "blur"}, {"params", {{"sigma", b.sigma}}}}; },
          [](const AddText& t) {
            return json{{"kind", "add_text"},
                        {"params", {{"text", t.text}, {"x", t.x}, {"y", t.y}, {"scale", t.scale}, {"color", t.color}}}};
          },
          [](const Stitch& s) {
            return json{{"kind", "stitch"}, {"params", {{"other", s.other_path}, {"side", side_name(s.side)}}}};
          },
          [](const Noise& n) { return json{{"kind", "noise"}, {"params", {{"stddev", n.stddev}}}}; },
          [](const ColorShift& c) {
            return json{{"kind", "color_shift"}, {"params", {{"dr", c.dr}, {"dg", c.dg}, {"db", c.db}}}};
          },
          [](const Brightness& b) { return json{{"kind", "brightness"}, {"params", {{"delta", b.delta}}}}; },
          [](const Contrast& c) { return json{{"kind", "contrast"}, {"params", {{"factor", c.factor}}}}; },
          [](const Distort& d) { return json{{"kind", "distort"}, {"params", {{"max_jitter", d.max_jitter}}}}; },
      },
      spec);
}

inline ModificationSpec spec_from_json(const nlohmann::json& j) {
  using namespace mod;
  try {
    const std::string kind = j.at("kind");
    const auto& p = j.at("params");
    if (kind == "crop") return Crop{p.at("left"), p.at("top"), p.at("width"), p.at("height")};
    if (kind == "scale") return Scale{p.at("fx"), p.at("fy")};
    if (kind == "blur") return Blur{p.at("sigma")};
    if (kind == "add_text") return AddText{p.at("text"), p.at("x"), p.at("y"), p.at("scale"), p.at("color")};
    if (kind == "stitch") return Stitch{p.at("other"), parse_side(p.at("side")), nullptr};
    if (kind == "noise") return Noise{p.at("stddev")};
    if (kind == "color_shift") return ColorShift{p.at("dr"), p.at("dg"), p.at("db")};
    if (kind == "brightness") return Brightness{p.at("delta")};
    if (kind == "contrast") return Contrast{p.at("factor")};
    if (kind == "distort") return Distort{p.at("max_jitter")};
    fail(Errc::InvalidSpec, "unknown modification kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidSpec, std::string("malformed modification: ") + e.what());
  }
}

// ---- pair generation ----

enum class PairLabel { Similar, Dissimilar };

/// image_b = compose(load(source_b), chain, seed). Similar pairs have source_b == image_a.
struct LabeledPair {
  std::string image_a;
  std::string image_b;
  PairLabel label = PairLabel::Similar;
  std::string source_b;
  std::vector<ModificationSpec> chain;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const LabeledPair& p) {
  nlohmann::json chain = nlohmann::json::array();
  for (const auto& s : p.chain) chain.push_back(to_json(s));
  return {{"a", p.image_a},
          {"b", p.image_b},
          {"label", p.label == PairLabel::Similar ? "similar" : "dissimilar"},
          {"source_b", p.source_b},
          {"chain", chain},
          {"seed", p.seed}};
}

inline LabeledPair pair_from_json(const nlohmann::json& j) {
  LabeledPair p;
  p.image_a = j.at("a");
  p.image_b = j.at("b");
  const std::string label = j.at("label");
  require(label == "similar" || label == "dissimilar", Errc::InvalidArgument, "bad label '" + label + "'");
  p.label = label == "similar" ? PairLabel::Similar : PairLabel::Dissimilar;
  p.source_b = j.value("source_b", p.image_a);
  for (const auto& s : j.value("chain", nlohmann::json::array())) p.chain.push_back(spec_from_json(s));
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

struct Manifest {
  std::vector<LabeledPair> pairs;
  std::vector<std::pair<std::string, std::string>> skipped;  // (path, reason)
};

/// One JSON object per line; skipped sources are recorded as {"skipped": path, "reason": ...}.
inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write manifest " + path.string());
  for (const auto& p : m.pairs) out << to_json(p).dump() << '\n';
  for (const auto& [file, reason] : m.skipped) out << nlohmann::json{{"skipped", file}, {"reason", reason}}.dump() << '\n';
}

inline Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot read manifest " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.contains("skipped")) {
      m.skipped.emplace_back(j.at("skipped"), j.value("reason", ""));
      continue;
    }
    m.pairs.push_back(pair_from_json(j));
  }
  return m;
}

struct ChainLimits {
  int min_len = 1;
  int max_len = 4;
  double max_scale = 3.0;
  double min_scale = 0.5;
  double min_crop_area = 0.6;
};

/// Draws a random modification chain. `stitch_pool` supplies candidate images for Stitch.
inline std::vector<ModificationSpec> random_chain(std::mt19937_64& rng, std::uint32_t width, std::uint32_t height,
                                                  const std::vector<std::string>& stitch_pool,
                                                  const ChainLimits& limits = {}) {
  using namespace mod;
  std::uniform_int_distribution<int> len_dist(limits.min_len, limits.max_len);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  static const char* kWords[] = {"BREAKING", "SHARE", "VIRAL", "RT NOW", "WATCH", "NEWS", "TRUTH", "LOOK"};
  const int n = len_dist(rng);
  std::vector<ModificationSpec> chain;
  double w = width, h = height;
  for (int i = 0; i < n; ++i) {
    const int kind = std::uniform_int_distribution<int>(0, 9)(rng);
    switch (kind) {
      case 0: {
        const double area = uniform(limits.min_crop_area, 0.95);
        const double aspect = uniform(0.8, 1.25);
        const double cw = std::min(w, std::sqrt(area * w * h * aspect));
        const double ch = std::min(h, area * w * h / cw);
        const auto iw = static_cast<std::uint32_t>(std::max(1.0, std::floor(cw)));
        const auto ih = static_cast<std::uint32_t>(std::max(1.0, std::floor(ch)));
        const auto left = static_cast<std::uint32_t>(std::floor(unit(rng) * (w - iw)));
        const auto top = static_cast<std::uint32_t>(std::floor(unit(rng) * (h - ih)));
        chain.push_back(Crop{left, top, iw, ih});
        w = iw;
        h = ih;
        break;
      }
      case 1: {
        const double f = uniform(limits.min_scale, limits.max_scale);
        const double fy = std::clamp(f * uniform(0.85, 1.15), limits.min_scale, limits.max_scale);
        chain.push_back(Scale{f, fy});
        w = std::round(w * f);
        h = std::round(h * fy);
        break;
      }
      case 2: chain.push_back(Blur{uniform(0.5, 1.5)}); break;
      case 3: {
        const int scale = std::max(1, static_cast<int>(std::min(w, h) / 80));
        const std::string text = kWords[std::uniform_int_distribution<int>(0, 7)(rng)];
        const int x = static_cast<int>(unit(rng) * w * 0.5), y = static_cast<int>(unit(rng) * (h - 8 * scale));
        const std::array<std::uint8_t, 3> color{static_cast<std::uint8_t>(unit(rng) < 0.5 ? 255 : 0),
                                                static_cast<std::uint8_t>(unit(rng) < 0.5 ? 255 : 0),
                                                static_cast<std::uint8_t>(unit(rng) < 0.5 ? 255 : 0)};
        chain.push_back(AddText{text, x, y, scale, color});
        break;
      }
      case 4: {
        if (stitch_pool.empty()) {
          chain.push_back(Noise{uniform(0.01, 0.04)});
          break;
        }
        const auto& other = stitch_pool[std::uniform_int_distribution<std::size_t>(0, stitch_pool.size() - 1)(rng)];
        const auto side = static_cast<Side>(std::uniform_int_distribution<int>(0, 3)(rng));
        chain.push_back(Stitch{other, side, nullptr});
        // Dimensions after stitching are unknown until the other image is loaded; assume
        // the shared edge doubles, which only affects later crop sampling bounds.
        if (side == Side::Left || side == Side::Right) w *= 2; else h *= 2;
        break;
      }
      case 5: chain.push_back(Noise{uniform(0.01, 0.04)}); break;
      case 6: {
        std::uniform_int_distribution<int> d(-30, 30);
        chain.push_back(ColorShift{d(rng), d(rng), d(rng)});
        break;
      }
      case 7: chain.push_back(Brightness{std::uniform_int_distribution<int>(-40, 40)(rng)}); break;
      case 8: chain.push_back(Contrast{uniform(0.7, 1.3)}); break;
      default: chain.push_back(Distort{uniform(0.01, 0.05)}); break;
    }
  }
  return chain;
}

namespace detail {

// Crop rectangles sampled against estimated sizes are clamped to the real running image.
inline std::vector<ModificationSpec> fit_chain(const RasterImage& src, std::vector<ModificationSpec> chain,
                                               std::uint64_t seed) {
  RasterImage cur = src;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (auto* c = std::get_if<mod::Crop>(&chain[i])) {
      c->width = std::min(c->width, cur.width());
      c->height = std::min(c->height, cur.height());
      c->left = std::min(c->left, cur.width() - c->width);
      c->top = std::min(c->top, cur.height() - c->height);
    }
    cur = apply_modification(cur, chain[i], derive_seed(seed, {i}));
  }
  return chain;
}

}  // namespace detail

/// Builds a balanced similar/dissimilar pair set from every decodable image in `source_dir`.
/// Layout under out_dir: sources/<stem>.png (PNG copies of the inputs), pairs/<stem>_<k>_{sim,dis}.png,
/// manifest.jsonl. Sources are processed in filename order.
inline Manifest generate_pairs(const std::filesystem::path& source_dir, const std::filesystem::path& out_dir,
                               int pairs_per_image, std::uint64_t seed, const ChainLimits& limits = {}) {
  namespace fs = std::filesystem;
  require(pairs_per_image >= 1, Errc::InvalidArgument, "pairs_per_image must be >= 1");
  if (!fs::is_directory(source_dir)) fail(Errc::EmptySourceDir, "not a directory: " + source_dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(source_dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());

  fs::create_directories(out_dir / "sources");
  fs::create_directories(out_dir / "pairs");
  Manifest manifest;
  std::vector<std::string> stems, copies;
  std::vector<std::shared_ptr<const RasterImage>> images;
  for (const auto& f : files) {
    try {
      auto img = std::make_shared<const RasterImage>(load_image(f));
      const fs::path copy = out_dir / "sources" / (f.stem().string() + ".png");
      save_png(*img, copy);
      stems.push_back(f.stem().string());
      copies.push_back(copy.string());
      images.push_back(std::move(img));
    } catch (const Error& e) {
      std::cerr << "warning: skipping " << f << ": " << e.what() << '\n';
      manifest.skipped.emplace_back(f.string(), e.what());
    }
  }
  require(images.size() >= 2, Errc::EmptySourceDir, "need at least two decodable source images");

  std::vector<std::vector<LabeledPair>> per_source(images.size());
  parallel_for(images.size(), [&](std::size_t i) {
    for (int k = 0; k < pairs_per_image; ++k) {
      std::mt19937_64 rng(derive_seed(seed, {i, static_cast<std::uint64_t>(k)}));
      std::vector<std::string> others;
      for (std::size_t j = 0; j < copies.size(); ++j)
        if (j != i) others.push_back(copies[j]);

      LabeledPair sim;
      sim.image_a = copies[i];
      sim.source_b = copies[i];
      sim.label = PairLabel::Similar;
      sim.seed = rng();
      sim.chain = detail::fit_chain(*images[i], random_chain(rng, images[i]->width(), images[i]->height(), others, limits),
                                    sim.seed);
      sim.image_b = (out_dir / "pairs" / (stems[i] + "_" + std::to_string(k) + "_sim.png")).string();
      save_png(compose(*images[i], sim.chain, sim.seed), sim.image_b);

      // The distinct source (and anything stitched onto it) never includes source i.
      const std::size_t j = others.empty() ? i : std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng);
      const std::size_t src_j = j < i ? j : j + 1;
      std::vector<std::string> pool;
      for (std::size_t q = 0; q < copies.size(); ++q)
        if (q != i && q != src_j) pool.push_back(copies[q]);
      LabeledPair dis;
      dis.image_a = copies[i];
      dis.source_b = copies[src_j];
      dis.label = PairLabel::Dissimilar;
      dis.seed = rng();
      dis.chain = detail::fit_chain(*images[src_j],
                                    random_chain(rng, images[src_j]->width(), images[src_j]->height(), pool, limits), dis.seed);
      dis.image_b = (out_dir / "pairs" / (stems[i] + "_" + std::to_string(k) + "_dis.png")).string();
      save_png(compose(*images[src_j], dis.chain, dis.seed), dis.image_b);

      per_source[i].push_back(std::move(sim));
      per_source[i].push_back(std::move(dis));
    }
  });
  for (auto& v : per_source)
    for (auto& p : v) manifest.pairs.push_back(std::move(p));
  write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace dupscope
