#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dupscope/features.hpp"
#include "dupscope/matching.hpp"
#include "dupscope/verdict.hpp"

namespace dupscope {

struct Correspondence {
  double src_x = 0, src_y = 0;
  double dst_x = 0, dst_y = 0;
};

/// One bit per input match: 1 = true match (RANSAC inlier), 0 = false match.
struct InlierMask {
  std::vector<std::uint8_t> bits;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t count() const noexcept {
    std::size_t c = 0;
    for (auto b : bits) c += b;
    return c;
  }
};

struct RansacParams {
  int max_iterations = 2000;
  double reprojection_threshold = 3.0;  // pixels, symmetric transfer error
  double confidence = 0.995;
  std::uint64_t rng_seed = 0x5eed;

  void validate() const {
    require(max_iterations >= 1, Errc::InvalidArgument, "max_iterations must be >= 1");
    require(reprojection_threshold > 0, Errc::InvalidArgument, "reprojection_threshold must be positive");
    require(confidence > 0 && confidence < 1, Errc::InvalidArgument, "confidence must lie in (0,1)");
  }
};

struct RansacResult {
  Homography homography;
  InlierMask mask;
};

namespace detail {

inline double triangle_area2(double ax, double ay, double bx, double by, double cx, double cy) {
  return std::abs((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
inline Eigen::Matrix3d isotropic_normalizer(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  double mean = 0;
  for (const auto& p : pts) mean += (p - c).norm();
  mean /= static_cast<double>(pts.size());
  require(mean > 1e-12, Errc::DegenerateConfiguration, "all points coincide");
  const double s = std::sqrt(2.0) / mean;
  Eigen::Matrix3d t;
  t << s, 0, -s * c.x(), 0, s, -s * c.y(), 0, 0, 1;
  return t;
}

inline bool collinear_triple(const std::vector<Eigen::Vector2d>& p, double tol) {
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      for (std::size_t k = j + 1; k < p.size(); ++k)
        if (triangle_area2(p[i].x(), p[i].y(), p[j].x(), p[j].y(), p[k].x(), p[k].y()) < tol) return true;
  return false;
}

inline bool all_collinear(const std::vector<Eigen::Vector2d>& p, double tol) {
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& q : p) c += q;
  c /= static_cast<double>(p.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& q : p) cov += (q - c) * (q - c).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  return es.eigenvalues()(0) <= tol * std::max(es.eigenvalues()(1), 1e-300);
}

}  // namespace detail

/// Normalized DLT: Hartley isotropic conditioning on both point sets, least-squares
/// null vector of the 2n x 9 system via SVD, result scaled so h33 = 1.
inline Homography dlt_homography(const std::vector<Correspondence>& pairs) {
  require(pairs.size() >= 4, Errc::InsufficientPoints, "homography needs at least 4 correspondences");
  std::vector<Eigen::Vector2d> src, dst;
  src.reserve(pairs.size());
  dst.reserve(pairs.size());
  for (const auto& c : pairs) {
    src.emplace_back(c.src_x, c.src_y);
    dst.emplace_back(c.dst_x, c.dst_y);
  }
  const Eigen::Matrix3d ts = detail::isotropic_normalizer(src);
  const Eigen::Matrix3d td = detail::isotropic_normalizer(dst);
  std::vector<Eigen::Vector2d> ns, nd;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ns.emplace_back((ts * src[i].homogeneous()).hnormalized());
    nd.emplace_back((td * dst[i].homogeneous()).hnormalized());
  }
  if (pairs.size() == 4) {
    require(!detail::collinear_triple(ns, 1e-9) && !detail::collinear_triple(nd, 1e-9),
            Errc::DegenerateConfiguration, "three of the four points are collinear");
  } else {
    require(!detail::all_collinear(ns, 1e-12) && !detail::all_collinear(nd, 1e-12), Errc::DegenerateConfiguration,
            "points are collinear");
  }

  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::MatrixXd a(2 * n, 9);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = ns[static_cast<std::size_t>(i)].x(), y = ns[static_cast<std::size_t>(i)].y();
    const double u = nd[static_cast<std::size_t>(i)].x(), v = nd[static_cast<std::size_t>(i)].y();
    a.row(2 * i) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    a.row(2 * i + 1) << x, y, 1, 0, 0, 0, -u * x, -u * y, -u;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // A second (near-)null direction means the system does not pin down H.
  if (sv.size() >= 8) {
    require(sv(7) > 1e-10 * std::max(sv(0), 1e-300), Errc::DegenerateConfiguration,
            "correspondences do not determine a unique homography");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  const Eigen::Matrix3d full = td.inverse() * hn * ts;
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.m[static_cast<std::size_t>(r * 3 + c)] = full(r, c);
  require(out.invertible(), Errc::DegenerateConfiguration, "estimated homography is singular");
  return out.normalized();
}

/// Mean of the forward and backward transfer distances, in pixels.
inline double symmetric_transfer_error(const Homography& h, const Homography& h_inv, const Correspondence& c) {
  double fx, fy, bx, by;
  if (!h.apply(c.src_x, c.src_y, fx, fy) || !h_inv.apply(c.dst_x, c.dst_y, bx, by))
    return std::numeric_limits<double>::infinity();
  return 0.5 * (std::hypot(fx - c.dst_x, fy - c.dst_y) + std::hypot(bx - c.src_x, by - c.src_y));
}

namespace detail {

inline InlierMask inliers_of(const Homography& h, const std::vector<Correspondence>& pts, double threshold) {
  InlierMask mask;
  mask.bits.assign(pts.size(), 0);
  if (!h.invertible()) return mask;
  const Homography inv = h.inverse();
  for (std::size_t i = 0; i < pts.size(); ++i)
    mask.bits[i] = symmetric_transfer_error(h, inv, pts[i]) < threshold ? 1 : 0;
  return mask;
}

}  // namespace detail

/// RANSAC over raw correspondences. Deterministic for a given seed: each iteration fits
/// a 4-point DLT, the largest consensus (earliest iteration on ties) wins, and the model
/// is refit on all of its inliers when that does not shrink the consensus.
inline RansacResult ransac_homography(const std::vector<Correspondence>& pts, const RansacParams& params = {}) {
  params.validate();
  require(pts.size() >= 4, Errc::InsufficientMatches, "RANSAC needs at least 4 matches");
  std::mt19937_64 rng(params.rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);

  std::optional<Homography> best;
  std::size_t best_count = 0;
  long long iterations = params.max_iterations;
  for (long long it = 0; it < iterations; ++it) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = pick(rng);
        fresh = std::find(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx[k]) ==
                idx.begin() + static_cast<std::ptrdiff_t>(k);
      } while (!fresh);
    }
    std::vector<Correspondence> sample;
    for (auto i : idx) sample.push_back(pts[i]);
    Homography h;
    try {
      h = dlt_homography(sample);
    } catch (const Error&) {
      continue;
    }
    const std::size_t count = detail::inliers_of(h, pts, params.reprojection_threshold).count();
    if (count > best_count) {
      best_count = count;
      best = h;
      const double w = static_cast<double>(count) / static_cast<double>(pts.size());
      const double denom = std::log(1.0 - std::pow(w, 4));
      if (w >= 1.0) {
        iterations = std::min(iterations, it + 1);
      } else if (denom < 0) {
        const double needed = std::ceil(std::log(1.0 - params.confidence) / denom);
        if (needed < static_cast<double>(iterations)) iterations = std::max<long long>(it + 1, static_cast<long long>(needed));
      }
    }
  }
  require(best.has_value() && best_count >= 4, Errc::NoConsensus, "no model reached a consensus of 4 matches");

  RansacResult result{*best, detail::inliers_of(*best, pts, params.reprojection_threshold)};
  std::vector<Correspondence> inliers;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (result.mask.bits[i]) inliers.push_back(pts[i]);
  try {
    const Homography refit = dlt_homography(inliers);
    InlierMask refit_mask = detail::inliers_of(refit, pts, params.reprojection_threshold);
    if (refit_mask.count() >= result.mask.count()) result = {refit, std::move(refit_mask)};
  } catch (const Error&) {
  }
  return result;
}

inline std::vector<Correspondence> correspondences(const std::vector<Match>& matches, const std::vector<Keypoint>& kps_a,
                                                   const std::vector<Keypoint>& kps_b) {
  std::vector<Correspondence> pts;
  pts.reserve(matches.size());
  for (const auto& m : matches) {
    const auto& a = kps_a.at(static_cast<std::size_t>(m.query_index));
    const auto& b = kps_b.at(static_cast<std::size_t>(m.train_index));
    pts.push_back({a.x, a.y, b.x, b.y});
  }
  return pts;
}

/// RANSAC over descriptor matches; the homography maps image A (query side) into image B.
inline RansacResult ransac_homography(const std::vector<Match>& matches, const std::vector<Keypoint>& kps_a,
                                      const std::vector<Keypoint>& kps_b, const RansacParams& params = {}) {
  require(matches.size() >= 4, Errc::InsufficientMatches, "RANSAC needs at least 4 matches");
  return ransac_homography(correspondences(matches, kps_a, kps_b), params);
}

/// t_r = sum(A_i) / n.
inline double true_match_ratio(const InlierMask& mask) {
  require(mask.size() >= 1, Errc::EmptyMask, "mask must contain at least one match");
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

inline constexpr int kImprovedOrbTopMatches = 30;

struct ImprovedOrbOutcome {
  std::vector<Match> matches;  // the top matches handed to RANSAC
  std::optional<RansacResult> fit;
  double true_ratio = 0.0;
  bool degenerate = false;
};

/// Cross-checked Hamming matches, the 30 best, then RANSAC. Fewer than 4 matches is degenerate.
inline ImprovedOrbOutcome improved_orb_match(const OrbFeatures& a, const OrbFeatures& b, const RansacParams& ransac = {}) {
  ImprovedOrbOutcome out;
  if (a.descriptors.empty() || b.descriptors.empty()) {
    out.degenerate = true;
    return out;
  }
  out.matches = top_k_matches(match_hamming(a.descriptors, b.descriptors, true), kImprovedOrbTopMatches);
  if (out.matches.size() < 4) {
    out.degenerate = true;
    return out;
  }
  try {
    out.fit = ransac_homography(out.matches, a.keypoints, b.keypoints, ransac);
    out.true_ratio = true_match_ratio(out.fit->mask);
  } catch (const Error& e) {
    if (e.code() != Errc::NoConsensus) throw;
    out.true_ratio = 0.0;
  }
  return out;
}

inline SimilarityVerdict improved_orb_verdict(const OrbFeatures& fa, const OrbFeatures& fb,
                                              double threshold = default_threshold(MethodKind::ImprovedOrb),
                                              const RansacParams& ransac = {}) {
  const auto outcome = improved_orb_match(fa, fb, ransac);
  return SimilarityVerdict::make(MethodKind::ImprovedOrb, outcome.degenerate ? 0.0 : outcome.true_ratio, threshold,
                                 outcome.degenerate);
}

inline SimilarityVerdict improved_orb_similarity(const RasterImage& a, const RasterImage& b,
                                                 double threshold = default_threshold(MethodKind::ImprovedOrb),
                                                 const OrbParams& orb = {}, const RansacParams& ransac = {}) {
  return improved_orb_verdict(orb_detect_and_describe(to_gray(a), orb), orb_detect_and_describe(to_gray(b), orb), threshold,
                              ransac);
}

}  // namespace dupscope
