#pragma once

#include <string>
#include <string_view>

#include "dupscope/error.hpp"

namespace dupscope {

enum class MethodKind { Histogram, Daisy, Orb, ImprovedOrb, Cnn };

/// Distance-style scores (lower is more similar) vs confidence-style scores.
enum class Polarity { LowerIsSimilar, HigherIsSimilar };

constexpr Polarity polarity_of(MethodKind k) {
  switch (k) {
    case MethodKind::Histogram:
    case MethodKind::Daisy:
    case MethodKind::Orb: return Polarity::LowerIsSimilar;
    default: return Polarity::HigherIsSimilar;
  }
}

constexpr std::string_view method_name(MethodKind k) {
  switch (k) {
    case MethodKind::Histogram: return "histogram";
    case MethodKind::Daisy: return "daisy";
    case MethodKind::Orb: return "orb";
    case MethodKind::ImprovedOrb: return "improved-orb";
    case MethodKind::Cnn: return "cnn";
  }
  return "unknown";
}

inline constexpr std::string_view kMethodNames = "histogram, daisy, orb, improved-orb, cnn";

inline MethodKind parse_method(std::string_view name) {
  for (auto k : {MethodKind::Histogram, MethodKind::Daisy, MethodKind::Orb, MethodKind::ImprovedOrb, MethodKind::Cnn})
    if (method_name(k) == name) return k;
  fail(Errc::InvalidArgument, "unknown method '" + std::string(name) + "'; valid methods: " + std::string(kMethodNames));
}

/// Default thresholds per technique.
constexpr double default_threshold(MethodKind k) {
  switch (k) {
    case MethodKind::Histogram: return 0.4;
    case MethodKind::Daisy: return 0.06;
    case MethodKind::Orb: return 29.0;
    case MethodKind::ImprovedOrb: return 0.35;
    case MethodKind::Cnn: return 0.5;
  }
  return 0.0;
}

/// Decision rule shared by every technique: strict below for distances, at-or-above for confidences.
constexpr bool classify(Polarity p, double score, double threshold) {
  return p == Polarity::LowerIsSimilar ? score < threshold : score >= threshold;
}

struct SimilarityVerdict {
  double score = 0.0;
  double threshold = 0.0;
  bool similar = false;
  MethodKind method = MethodKind::Histogram;
  // Set when the pipeline could not produce a meaningful score (too few matches).
  bool degenerate = false;

  static SimilarityVerdict make(MethodKind method, double score, double threshold, bool degenerate = false) {
    SimilarityVerdict v;
    v.score = score;
    v.threshold = threshold;
    v.method = method;
    v.degenerate = degenerate;
    v.similar = !degenerate && classify(polarity_of(method), score, threshold);
    return v;
  }
};

}  // namespace dupscope
