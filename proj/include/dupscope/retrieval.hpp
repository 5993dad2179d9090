#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dupscope/cnn.hpp"
#include "dupscope/codec.hpp"
#include "dupscope/daisy.hpp"
#include "dupscope/features.hpp"
#include "dupscope/geometry.hpp"
#include "dupscope/histogram.hpp"
#include "dupscope/ingest.hpp"
#include "dupscope/matching.hpp"
#include "dupscope/parallel.hpp"
#include "dupscope/verdict.hpp"

namespace dupscope {

/// A similarity technique with its threshold and parameters.
struct Method {
  MethodKind kind = MethodKind::ImprovedOrb;
  double threshold = default_threshold(MethodKind::ImprovedOrb);
  OrbParams orb;
  RansacParams ransac;
  DaisySimilarityParams daisy;
  std::shared_ptr<const cnn::Model> model;  // required for Cnn
  std::string checkpoint;                   // where `model` was loaded from, if anywhere

  static Method make(MethodKind kind, std::optional<double> threshold = std::nullopt) {
    Method m;
    m.kind = kind;
    m.threshold = threshold.value_or(default_threshold(kind));
    return m;
  }

  /// Cnn methods load their model from `checkpoint`.
  static Method make(MethodKind kind, std::optional<double> threshold, const std::string& checkpoint) {
    Method m = make(kind, threshold);
    if (kind == MethodKind::Cnn) {
      require(!checkpoint.empty(), Errc::InvalidArgument, "the cnn method needs a checkpoint");
      m.model = std::make_shared<const cnn::Model>(cnn::load_checkpoint(checkpoint).model);
      m.checkpoint = checkpoint;
    }
    return m;
  }

  std::string name() const { return std::string(method_name(kind)); }

  void validate() const { validate_threshold(threshold); }

  /// Thresholds must lie in the technique's score domain.
  void validate_threshold(double t) const {
    const auto bad = [&](const char* domain) {
      fail(Errc::InvalidArgument, "threshold " + std::to_string(t) + " outside " + name() + " domain " + domain);
    };
    if (!std::isfinite(t)) bad("(finite)");
    switch (kind) {
      case MethodKind::Histogram:
        if (t <= 0 || t > 1) bad("(0,1]");
        break;
      case MethodKind::Daisy:
        if (t <= 0) bad("(0,inf)");
        break;
      case MethodKind::Orb:
        if (t <= 0 || t > 256) bad("(0,256]");
        break;
      case MethodKind::ImprovedOrb:
      case MethodKind::Cnn:
        if (t < 0 || t > 1) bad("[0,1]");
        break;
    }
    if (kind == MethodKind::Cnn && !model) fail(Errc::InvalidArgument, "the cnn method needs a loaded model");
  }
};

/// Comparison function bound to one query image; per-query work (features, histogram) is done once.
class Comparator {
 public:
  Comparator(Method method, const RasterImage& query) : method_(std::move(method)), query_(query) {
    method_.validate();
    switch (method_.kind) {
      case MethodKind::Histogram: hist_ = rgb_histogram(query_); break;
      case MethodKind::Orb:
      case MethodKind::ImprovedOrb: orb_ = orb_detect_and_describe(to_gray(query_), method_.orb); break;
      case MethodKind::Daisy: daisy_ = daisy_features(query_, method_.daisy); break;
      case MethodKind::Cnn: break;
    }
  }

  const Method& method() const noexcept { return method_; }

  /// Verdict at `threshold` (the method's own threshold when absent).
  SimilarityVerdict compare(const RasterImage& other, std::optional<double> threshold = std::nullopt) const {
    const double t = threshold.value_or(method_.threshold);
    switch (method_.kind) {
      case MethodKind::Histogram:
        return SimilarityVerdict::make(MethodKind::Histogram, bhattacharyya_distance(*hist_, rgb_histogram(other)), t);
      case MethodKind::Orb: return orb_verdict(*orb_, orb_detect_and_describe(to_gray(other), method_.orb), t);
      case MethodKind::ImprovedOrb:
        return improved_orb_verdict(*orb_, orb_detect_and_describe(to_gray(other), method_.orb), t, method_.ransac);
      case MethodKind::Daisy: return daisy_verdict(*daisy_, daisy_features(other, method_.daisy), t);
      case MethodKind::Cnn: return cnn::cnn_similarity(*method_.model, query_, other, t);
    }
    fail(Errc::InvalidArgument, "unknown method");
  }

 private:
  Method method_;
  RasterImage query_;
  std::optional<Histogram3D> hist_;
  std::optional<OrbFeatures> orb_;
  std::optional<std::vector<DaisyDescriptor>> daisy_;
};

/// The comparison function C: dispatches to the technique's pipeline.
inline SimilarityVerdict compare(const Method& method, const RasterImage& a, const RasterImage& b) {
  return Comparator(method, a).compare(b);
}

/// Verdict plus wall-clock seconds, for timing observability.
struct TimedVerdict {
  SimilarityVerdict verdict;
  double seconds = 0;
};

inline TimedVerdict timed_compare(const Method& method, const RasterImage& a, const RasterImage& b) {
  const auto t0 = std::chrono::steady_clock::now();
  TimedVerdict out{compare(method, a, b), 0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Higher means more confident "similar", whatever the technique's polarity.
inline double confidence(const SimilarityVerdict& v) {
  return polarity_of(v.method) == Polarity::LowerIsSimilar ? -v.score : v.score;
}

// ---- search ----

struct ResultEntry {
  std::string sha256;
  std::string path;
  SimilarityVerdict verdict;
  double seconds = 0;
};

/// I_B: the retrieved subset of corpus I_C, most confident first.
struct ResultSet {
  std::string query;
  std::string corpus_id;
  MethodKind method = MethodKind::ImprovedOrb;
  double threshold = 0;
  std::vector<ResultEntry> entries;  // retrieved only; every verdict is similar
  std::size_t corpus_size = 0;       // m = |I_C|
  std::size_t compared = 0;
  std::size_t skipped = 0;           // undecodable corpus entries
  double total_seconds = 0;
  double mean_seconds_per_pair = 0;

  std::size_t retrieved() const noexcept { return entries.size(); }
};

/// (1 - retrieved/corpus) * 100.
inline double search_space_reduction(long long corpus_size, long long retrieved_size) {
  require(corpus_size >= 1 && retrieved_size >= 0 && retrieved_size <= corpus_size, Errc::InvalidCounts,
          "need 0 <= retrieved (" + std::to_string(retrieved_size) + ") <= corpus (" + std::to_string(corpus_size) +
              ") and corpus >= 1");
  return (1.0 - static_cast<double>(retrieved_size) / static_cast<double>(corpus_size)) * 100.0;
}

inline double reduction_pct(const ResultSet& r) {
  if (r.corpus_size == 0) return 0.0;
  return search_space_reduction(static_cast<long long>(r.corpus_size), static_cast<long long>(r.retrieved()));
}

/// Asserts I_B ⊆ I_C, n <= m and that every retrieved verdict is similar.
inline bool satisfies_search_contract(const ResultSet& r, const Corpus& c) {
  if (r.retrieved() > r.corpus_size || r.corpus_size != c.images.size()) return false;
  std::set<std::string> seen;
  for (const auto& e : r.entries) {
    if (!c.find_image(e.sha256) || !e.verdict.similar || !seen.insert(e.sha256).second) return false;
  }
  return true;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Compares the query against every corpus image; comparisons run in parallel.
inline ResultSet search(const Method& method, const RasterImage& query, const Corpus& corpus,
                        const std::string& query_name = {}, const ProgressFn& progress = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Comparator cmp(method, query);
  const std::size_t m = corpus.images.size();
  struct Slot {
    std::optional<SimilarityVerdict> verdict;
    double seconds = 0;
  };
  std::vector<Slot> slots(m);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  if (progress) progress(0, m);
  parallel_for(m, [&](std::size_t i) {
    const auto& rec = corpus.images[i];
    try {
      const RasterImage img = load_image(corpus.image_path(rec));
      const auto p0 = std::chrono::steady_clock::now();
      slots[i].verdict = cmp.compare(img);
      slots[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - p0).count();
    } catch (const Error& e) {
      if (e.code() != Errc::MalformedImage && e.code() != Errc::UnsupportedFormat && e.code() != Errc::IoError &&
          e.code() != Errc::ImageTooSmall && e.code() != Errc::ZeroDimension)
        throw;
      std::cerr << "warning: skipping " << rec.file << ": " << e.what() << '\n';
    }
    const std::size_t d = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(d, m);
    }
  });

  ResultSet r;
  r.query = query_name;
  r.corpus_id = corpus.corpus_id;
  r.method = method.kind;
  r.threshold = method.threshold;
  r.corpus_size = m;
  double pair_seconds = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!slots[i].verdict) {
      ++r.skipped;
      continue;
    }
    ++r.compared;
    pair_seconds += slots[i].seconds;
    if (slots[i].verdict->similar)
      r.entries.push_back({corpus.images[i].sha256, corpus.images[i].file, *slots[i].verdict, slots[i].seconds});
  }
  std::stable_sort(r.entries.begin(), r.entries.end(), [](const ResultEntry& a, const ResultEntry& b) {
    const double ca = confidence(a.verdict), cb = confidence(b.verdict);
    if (ca != cb) return ca > cb;
    return a.path < b.path;
  });
  r.mean_seconds_per_pair = r.compared ? pair_seconds / static_cast<double>(r.compared) : 0.0;
  r.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline ResultSet search(const Method& method, const std::filesystem::path& query_path,
                        const std::filesystem::path& corpus_dir, const ProgressFn& progress = {}) {
  require(std::filesystem::is_directory(corpus_dir), Errc::CorpusNotFound, "no corpus at " + corpus_dir.string());
  if (!std::filesystem::is_regular_file(corpus_dir / "meta.json"))
    fail(Errc::CorpusNotFound, "no corpus metadata in " + corpus_dir.string());
  const Corpus corpus = load_corpus(corpus_dir);
  RasterImage query;
  try {
    query = load_image(query_path);
  } catch (const Error& e) {
    fail(Errc::UndecodableQuery, query_path.string() + ": " + e.what());
  }
  return search(method, query, corpus, query_path.string(), progress);
}

inline nlohmann::json verdict_json(const SimilarityVerdict& v) {
  return {{"score", v.score},
          {"threshold", v.threshold},
          {"similar", v.similar},
          {"method", method_name(v.method)},
          {"degenerate", v.degenerate}};
}

/// results.json schema.
inline nlohmann::json to_json(const ResultSet& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"sha256", e.sha256},
                       {"path", e.path},
                       {"score", e.verdict.score},
                       {"similar", e.verdict.similar},
                       {"degenerate", e.verdict.degenerate},
                       {"seconds", e.seconds}});
  return {{"query", r.query},
          {"corpus_id", r.corpus_id},
          {"method", method_name(r.method)},
          {"threshold", r.threshold},
          {"corpus_size", r.corpus_size},
          {"compared", r.compared},
          {"skipped", r.skipped},
          {"retrieved", r.retrieved()},
          {"reduction_pct", reduction_pct(r)},
          {"total_seconds", r.total_seconds},
          {"mean_seconds_per_pair", r.mean_seconds_per_pair},
          {"results", entries}};
}

// ---- evaluation ----

enum class Label { Similar, Dissimilar };

/// One query image and labelled candidates. CSV form: `path,label` rows with label in
/// {query, similar, dissimilar}; exactly one query row; relative paths resolve against the CSV.
struct AnnotatedSet {
  std::string name;
  std::filesystem::path query_image;
  std::vector<std::pair<std::filesystem::path, Label>> entries;
};

inline AnnotatedSet read_annotated_set(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) fail(Errc::IoError, "cannot read annotated set " + csv.string());
  AnnotatedSet set;
  set.name = csv.stem().string();
  const auto base = csv.parent_path();
  std::string line;
  int n = 0;
  bool have_query = false;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    const std::string where = csv.string() + ":" + std::to_string(n);
    require(comma != std::string::npos, Errc::InvalidArgument, where + ": expected path,label");
    const std::string path = line.substr(0, comma), label = ascii_lower(line.substr(comma + 1));
    if (n == 1 && ascii_lower(path) == "path" && label == "label") continue;
    const std::filesystem::path p = std::filesystem::path(path).is_absolute() ? std::filesystem::path(path) : base / path;
    if (label == "query") {
      require(!have_query, Errc::InvalidArgument, where + ": more than one query row");
      set.query_image = p;
      have_query = true;
    } else if (label == "similar") {
      set.entries.emplace_back(p, Label::Similar);
    } else if (label == "dissimilar") {
      set.entries.emplace_back(p, Label::Dissimilar);
    } else {
      fail(Errc::InvalidArgument, where + ": label must be query, similar or dissimilar, got '" + label + "'");
    }
  }
  require(have_query, Errc::InvalidArgument, csv.string() + ": no query row");
  return set;
}

inline void write_annotated_set(const AnnotatedSet& set, const std::filesystem::path& csv) {
  std::ofstream out(csv, std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write " + csv.string());
  out << "path,label\n" << set.query_image.string() << ",query\n";
  for (const auto& [p, l] : set.entries) out << p.string() << ',' << (l == Label::Similar ? "similar" : "dissimilar") << '\n';
}

/// (TP + TN) / total.
inline double accuracy(const std::vector<bool>& predicted_similar, const std::vector<Label>& truth) {
  require(predicted_similar.size() == truth.size(), Errc::LengthMismatch, "prediction and label counts differ");
  require(!truth.empty(), Errc::EmptySet, "cannot score an empty set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted_similar[i] == (truth[i] == Label::Similar);
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

/// Scores of every set entry against the query (threshold independent).
inline std::vector<SimilarityVerdict> score_set(const Method& method, const AnnotatedSet& set) {
  require(!set.entries.empty(), Errc::EmptySet, "annotated set " + set.name + " has no entries");
  RasterImage query;
  try {
    query = load_image(set.query_image);
  } catch (const Error& e) {
    fail(Errc::UndecodableQuery, set.query_image.string() + ": " + e.what());
  }
  const Comparator cmp(method, query);
  std::vector<std::optional<SimilarityVerdict>> out(set.entries.size());
  parallel_for(set.entries.size(), [&](std::size_t i) { out[i] = cmp.compare(load_image(set.entries[i].first)); });
  std::vector<SimilarityVerdict> verdicts;
  for (auto& v : out) verdicts.push_back(*v);
  return verdicts;
}

inline std::vector<Label> labels_of(const AnnotatedSet& set) {
  std::vector<Label> l;
  for (const auto& e : set.entries) l.push_back(e.second);
  return l;
}

/// Re-applies the decision rule to precomputed verdicts at another threshold.
inline bool similar_at(const SimilarityVerdict& v, double threshold) {
  return !v.degenerate && classify(polarity_of(v.method), v.score, threshold);
}

inline double evaluate_accuracy(const Method& method, const AnnotatedSet& set, std::optional<double> threshold = std::nullopt) {
  const double t = threshold.value_or(method.threshold);
  method.validate_threshold(t);
  const auto verdicts = score_set(method, set);
  std::vector<bool> pred;
  for (const auto& v : verdicts) pred.push_back(similar_at(v, t));
  return accuracy(pred, labels_of(set));
}

struct CurvePoint {
  double threshold = 0;
  double accuracy = 0;
  std::size_t retrieved = 0;  // entries classified similar
};

struct Curve {
  std::string set_name;
  std::vector<CurvePoint> points;
};

/// Accuracy at each threshold from one scoring pass.
inline Curve sweep_verdicts(const std::string& name, const std::vector<SimilarityVerdict>& verdicts,
                            const std::vector<Label>& truth, const std::vector<double>& thresholds) {
  Curve c{name, {}};
  for (double t : thresholds) {
    std::vector<bool> pred;
    std::size_t retrieved = 0;
    for (const auto& v : verdicts) {
      pred.push_back(similar_at(v, t));
      retrieved += pred.back();
    }
    c.points.push_back({t, accuracy(pred, truth), retrieved});
  }
  return c;
}

inline Curve threshold_sweep(const Method& method, const AnnotatedSet& set, const std::vector<double>& thresholds) {
  require(!thresholds.empty(), Errc::InvalidArgument, "no thresholds to sweep");
  for (double t : thresholds) method.validate_threshold(t);
  return sweep_verdicts(set.name, score_set(method, set), labels_of(set), thresholds);
}

/// "t1..t2:step" -> t1, t1+step, ..., t2 (inclusive within rounding).
inline std::vector<double> parse_threshold_range(const std::string& spec) {
  const auto dots = spec.find(".."), colon = spec.rfind(':');
  require(dots != std::string::npos && colon != std::string::npos && colon > dots, Errc::InvalidArgument,
          "threshold range must look like t1..t2:step, got '" + spec + "'");
  double lo, hi, step;
  try {
    lo = std::stod(spec.substr(0, dots));
    hi = std::stod(spec.substr(dots + 2, colon - dots - 2));
    step = std::stod(spec.substr(colon + 1));
  } catch (const std::exception&) {
    fail(Errc::InvalidArgument, "unparseable threshold range '" + spec + "'");
  }
  require(step > 0 && hi >= lo, Errc::InvalidArgument, "threshold range needs step > 0 and t2 >= t1");
  const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  require(n <= 100000, Errc::InvalidArgument, "threshold range has too many points");
  std::vector<double> out;
  for (long long i = 0; i < n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return out;
}

/// Mean over `points` of the population variance (percent units) of accuracy across curves.
inline double variance_at(const std::vector<Curve>& curves, const std::vector<double>& points) {
  require(!curves.empty(), Errc::EmptySet, "no curves");
  require(!points.empty(), Errc::InvalidArgument, "no points");
  double total = 0;
  for (double p : points) {
    std::vector<double> acc;
    for (const auto& c : curves) {
      const auto it = std::find_if(c.points.begin(), c.points.end(),
                                   [&](const CurvePoint& q) { return std::abs(q.threshold - p) < 1e-9; });
      require(it != c.points.end(), Errc::MissingPoint,
              "curve " + c.set_name + " has no point at threshold " + std::to_string(p));
      acc.push_back(it->accuracy * 100.0);
    }
    double mean = 0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0;
    for (double a : acc) var += (a - mean) * (a - mean);
    total += var / static_cast<double>(acc.size());
  }
  return total / static_cast<double>(points.size());
}

/// curve.csv schema: set,threshold,accuracy,retrieved.
inline std::string curves_csv(const std::vector<Curve>& curves) {
  std::ostringstream out;
  out << "set,threshold,accuracy,retrieved\n";
  out << std::setprecision(10);
  for (const auto& c : curves)
    for (const auto& p : c.points) out << c.set_name << ',' << p.threshold << ',' << p.accuracy << ',' << p.retrieved << '\n';
  return out.str();
}

/// Reference average-variance figures reported for the original Twitter events; not
/// reproducible without that data and kept for comparison only.
struct ReportedVariance {
  MethodKind method;
  double value;
};
inline constexpr ReportedVariance kReportedVariance[] = {{MethodKind::Histogram, 104.24},
                                                         {MethodKind::Daisy, 196.58},
                                                         {MethodKind::Orb, 17.6},
                                                         {MethodKind::ImprovedOrb, 6.2},
                                                         {MethodKind::Cnn, 0.71}};

}  // namespace dupscope
