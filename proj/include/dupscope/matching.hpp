#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dupscope/daisy.hpp"
#include "dupscope/features.hpp"
#include "dupscope/parallel.hpp"
#include "dupscope/verdict.hpp"

namespace dupscope {

struct Match {
  int query_index = 0;
  int train_index = 0;
  double distance = 0.0;  // Hamming bit count or Euclidean distance

  friend bool operator==(const Match&, const Match&) = default;
};

namespace detail {

// Nearest neighbour of each element of `from` in `to`; ties go to the lowest index.
inline std::vector<std::pair<int, int>> hamming_nn(const std::vector<BinaryDescriptor>& from,
                                                   const std::vector<BinaryDescriptor>& to) {
  std::vector<std::pair<int, int>> nn(from.size());
  parallel_for(from.size(), [&](std::size_t i) {
    int best = std::numeric_limits<int>::max(), best_j = -1;
    for (std::size_t j = 0; j < to.size(); ++j) {
      const int d = hamming_distance(from[i], to[j]);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    nn[i] = {best_j, best};
  });
  return nn;
}

}  // namespace detail

/// Brute-force Hamming nearest neighbour for each query descriptor. With `cross_check`
/// only mutual nearest pairs survive. Output is ordered by query index.
inline std::vector<Match> match_hamming(const std::vector<BinaryDescriptor>& query,
                                        const std::vector<BinaryDescriptor>& train, bool cross_check) {
  require(!query.empty() && !train.empty(), Errc::EmptyDescriptorSet, "descriptor sets must be non-empty");
  const auto forward = detail::hamming_nn(query, train);
  std::vector<std::pair<int, int>> backward;
  if (cross_check) backward = detail::hamming_nn(train, query);
  std::vector<Match> out;
  out.reserve(query.size());
  for (std::size_t i = 0; i < query.size(); ++i) {
    const auto [j, d] = forward[i];
    if (cross_check && backward[static_cast<std::size_t>(j)].first != static_cast<int>(i)) continue;
    out.push_back({static_cast<int>(i), j, static_cast<double>(d)});
  }
  return out;
}

/// Mean of the k smallest distances (all of them when k is absent).
inline double mean_match_distance(const std::vector<Match>& matches, std::optional<int> k = std::nullopt) {
  require(!matches.empty(), Errc::NoMatches, "cannot average an empty match set");
  std::vector<double> d;
  d.reserve(matches.size());
  for (const auto& m : matches) d.push_back(m.distance);
  std::size_t n = d.size();
  if (k) {
    require(*k >= 1, Errc::InvalidArgument, "k must be >= 1");
    n = std::min(n, static_cast<std::size_t>(*k));
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n), d.end());
  }
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += d[i];
  return sum / static_cast<double>(n);
}

inline double euclidean_distance(const std::vector<float>& a, const std::vector<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// For each query descriptor, its k nearest train descriptors by L2 distance (ascending,
/// ties by train index). Flattened in query order.
inline std::vector<Match> knn_match_euclidean(const std::vector<DaisyDescriptor>& query,
                                              const std::vector<DaisyDescriptor>& train, int k) {
  require(k >= 1, Errc::InvalidArgument, "k must be >= 1");
  require(!query.empty() && !train.empty(), Errc::EmptyDescriptorSet, "descriptor sets must be non-empty");
  const std::size_t len = query.front().values.size();
  for (const auto* set : {&query, &train})
    for (const auto& d : *set)
      require(d.values.size() == len, Errc::InvalidArgument, "descriptor lengths differ");
  const std::size_t kk = std::min(static_cast<std::size_t>(k), train.size());
  std::vector<std::vector<Match>> per_query(query.size());
  parallel_for(query.size(), [&](std::size_t i) {
    std::vector<Match> all(train.size());
    for (std::size_t j = 0; j < train.size(); ++j)
      all[j] = {static_cast<int>(i), static_cast<int>(j), euclidean_distance(query[i].values, train[j].values)};
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kk), all.end(),
                      [](const Match& a, const Match& b) {
                        return a.distance != b.distance ? a.distance < b.distance : a.train_index < b.train_index;
                      });
    all.resize(kk);
    per_query[i] = std::move(all);
  });
  std::vector<Match> out;
  out.reserve(query.size() * kk);
  for (auto& v : per_query) out.insert(out.end(), v.begin(), v.end());
  return out;
}

/// The k lowest-distance matches; equal distances keep (query_index, train_index) order.
inline std::vector<Match> top_k_matches(std::vector<Match> matches, int k) {
  require(k >= 1, Errc::InvalidArgument, "k must be >= 1");
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.query_index != b.query_index) return a.query_index < b.query_index;
    return a.train_index < b.train_index;
  });
  if (matches.size() > static_cast<std::size_t>(k)) matches.resize(static_cast<std::size_t>(k));
  return matches;
}

/// Plain ORB score: mean Hamming distance over all cross-checked matches.
/// Feature sets without descriptors give a degenerate verdict at the maximum distance.
inline SimilarityVerdict orb_verdict(const OrbFeatures& fa, const OrbFeatures& fb,
                                     double threshold = default_threshold(MethodKind::Orb)) {
  if (fa.descriptors.empty() || fb.descriptors.empty())
    return SimilarityVerdict::make(MethodKind::Orb, 256.0, threshold, true);
  const auto matches = match_hamming(fa.descriptors, fb.descriptors, true);
  return SimilarityVerdict::make(MethodKind::Orb, mean_match_distance(matches), threshold);
}

inline SimilarityVerdict orb_similarity(const RasterImage& a, const RasterImage& b,
                                        double threshold = default_threshold(MethodKind::Orb),
                                        const OrbParams& params = {}) {
  return orb_verdict(orb_detect_and_describe(to_gray(a), params), orb_detect_and_describe(to_gray(b), params), threshold);
}

struct DaisySimilarityParams {
  std::uint32_t working_size = 160;  // both images are resampled to a square of this side
  int step = 8;
  DaisyParams daisy{};
};

inline std::vector<DaisyDescriptor> daisy_features(const RasterImage& img, const DaisySimilarityParams& params = {}) {
  return daisy_describe(resize(to_gray(img), params.working_size, params.working_size), params.step, params.daisy);
}

/// Dense DAISY score: mean distance from each descriptor of `a` to its nearest descriptor of `b`.
inline SimilarityVerdict daisy_verdict(const std::vector<DaisyDescriptor>& da, const std::vector<DaisyDescriptor>& db,
                                       double threshold = default_threshold(MethodKind::Daisy)) {
  return SimilarityVerdict::make(MethodKind::Daisy, mean_match_distance(knn_match_euclidean(da, db, 1)), threshold);
}

inline SimilarityVerdict daisy_similarity(const RasterImage& a, const RasterImage& b,
                                          double threshold = default_threshold(MethodKind::Daisy),
                                          const DaisySimilarityParams& params = {}) {
  return daisy_verdict(daisy_features(a, params), daisy_features(b, params), threshold);
}

}  // namespace dupscope
