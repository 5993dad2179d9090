#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dupscope/error.hpp"
#include "dupscope/ingest.hpp"
#include "dupscope/lexicon_data.hpp"
#include "dupscope/retrieval.hpp"

namespace dupscope {

enum class SentimentLabel { Positive, Negative, Neutral };

constexpr const char* sentiment_name(SentimentLabel l) {
  switch (l) {
    case SentimentLabel::Positive: return "positive";
    case SentimentLabel::Negative: return "negative";
    default: return "neutral";
  }
}

/// Token -> integer polarity. Text format: token<TAB>polarity per line, '#' comments.
class Lexicon {
 public:
  static Lexicon parse(const std::string& text) {
    Lexicon lex;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      require(tab != std::string::npos, Errc::InvalidArgument, "lexicon line " + std::to_string(n) + ": expected token<TAB>polarity");
      int v;
      try {
        std::size_t used = 0;
        v = std::stoi(line.substr(tab + 1), &used);
        require(used == line.size() - tab - 1, Errc::InvalidArgument, "trailing characters");
      } catch (const std::exception&) {
        fail(Errc::InvalidArgument, "lexicon line " + std::to_string(n) + ": polarity must be an integer");
      }
      lex.scores_[ascii_lower(line.substr(0, tab))] = v;
    }
    return lex;
  }

  static Lexicon load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot read lexicon " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  static const Lexicon& bundled() {
    static const Lexicon lex = parse(kBundledLexicon);
    return lex;
  }

  std::optional<int> score(const std::string& token) const {
    const auto it = scores_.find(token);
    if (it == scores_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return scores_.size(); }

 private:
  std::unordered_map<std::string, int> scores_;
};

/// Lower-cased runs of ASCII letters, digits and apostrophes.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '\'') {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool is_negator(const std::string& token) {
  static const std::set<std::string> kNegators{"not", "no", "never", "don't", "dont", "isn't", "isnt", "wasn't",
                                               "aren't", "won't", "can't", "cannot", "didn't", "doesn't", "nothing"};
  return kNegators.count(token) == 1;
}

/// Pluggable sentiment source; the default scores text against the bundled lexicon.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual SentimentLabel classify(const std::string& text) const = 0;
};

/// Sum of token polarities; a lexicon token directly after a negator counts with flipped sign.
class LexiconSentiment : public SentimentProvider {
 public:
  explicit LexiconSentiment(const Lexicon& lexicon = Lexicon::bundled()) : lexicon_(lexicon) {}

  int score(const std::string& text) const {
    const auto tokens = tokenize(text);
    int sum = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto s = lexicon_.score(tokens[i]);
      if (!s) continue;
      sum += (i > 0 && is_negator(tokens[i - 1])) ? -*s : *s;
    }
    return sum;
  }

  SentimentLabel classify(const std::string& text) const override {
    const int s = score(text);
    return s > 0 ? SentimentLabel::Positive : s < 0 ? SentimentLabel::Negative : SentimentLabel::Neutral;
  }

 private:
  const Lexicon& lexicon_;
};

inline SentimentLabel sentiment(const std::string& text) { return LexiconSentiment().classify(text); }

struct SentimentSummary {
  double positive_pct = 0;
  double negative_pct = 0;
  double neutral_pct = 0;
  std::size_t post_count = 0;
};

inline SentimentSummary sentiment_summary(const std::vector<Post>& posts, const SentimentProvider& provider = LexiconSentiment()) {
  require(!posts.empty(), Errc::EmptyPostSet, "sentiment summary needs at least one post");
  std::size_t pos = 0, neg = 0;
  for (const auto& p : posts) {
    const auto l = provider.classify(p.text);
    pos += l == SentimentLabel::Positive;
    neg += l == SentimentLabel::Negative;
  }
  const double n = static_cast<double>(posts.size());
  const std::size_t neu = posts.size() - pos - neg;
  return {100.0 * static_cast<double>(pos) / n, 100.0 * static_cast<double>(neg) / n, 100.0 * static_cast<double>(neu) / n,
          posts.size()};
}

/// Percentage of posts that are retweets.
inline double retweet_summary(const std::vector<Post>& posts) {
  require(!posts.empty(), Errc::EmptyPostSet, "retweet summary needs at least one post");
  const auto rt = std::count_if(posts.begin(), posts.end(), [](const Post& p) { return p.is_retweet; });
  return 100.0 * static_cast<double>(rt) / static_cast<double>(posts.size());
}

/// Posts referencing any retrieved image, in corpus order.
inline std::vector<Post> contributing_posts(const ResultSet& result, const Corpus& corpus) {
  require(result.corpus_id == corpus.corpus_id, Errc::CorpusNotFound,
          "result set belongs to corpus " + result.corpus_id + ", not " + corpus.corpus_id);
  std::set<std::string> ids;
  for (const auto& e : result.entries) {
    const auto* rec = corpus.find_image(e.sha256);
    require(rec != nullptr, Errc::CorpusNotFound, "retrieved image " + e.sha256 + " is not in corpus " + corpus.corpus_id);
    ids.insert(rec->post_ids.begin(), rec->post_ids.end());
  }
  std::vector<Post> out;
  for (const auto& p : corpus.posts)
    if (ids.count(p.post_id)) out.push_back(p);
  return out;
}

struct UserCount {
  UserProfile user;
  std::size_t posts = 0;
};

/// Authors of contributing posts, deduplicated by username; most active first, then by username.
/// The profile shown is the one from the user's earliest contributing post.
inline std::vector<UserCount> propagating_users(const std::vector<Post>& posts) {
  std::map<std::string, UserCount> by_name;
  for (const auto& p : posts) {
    auto [it, inserted] = by_name.try_emplace(p.author.username, UserCount{p.author, 0});
    ++it->second.posts;
  }
  std::vector<UserCount> out;
  for (auto& [name, uc] : by_name) out.push_back(std::move(uc));
  std::stable_sort(out.begin(), out.end(), [](const UserCount& a, const UserCount& b) {
    if (a.posts != b.posts) return a.posts > b.posts;
    return a.user.username < b.user.username;
  });
  return out;
}

inline std::vector<UserCount> propagating_users(const ResultSet& result, const Corpus& corpus) {
  return propagating_users(contributing_posts(result, corpus));
}

/// Spread of the retrieved content. Sentiment and retweet figures are absent when no post
/// references a retrieved image.
struct SpreadReport {
  std::vector<UserCount> users;
  std::optional<SentimentSummary> sentiment;
  std::optional<double> retweet_pct;
  double reduction_pct = 0;
  std::size_t post_count = 0;
};

inline SpreadReport spread_report(const ResultSet& result, const Corpus& corpus,
                                  const SentimentProvider& provider = LexiconSentiment()) {
  const auto posts = contributing_posts(result, corpus);
  SpreadReport r;
  r.users = propagating_users(posts);
  r.post_count = posts.size();
  r.reduction_pct = reduction_pct(result);
  if (!posts.empty()) {
    r.sentiment = sentiment_summary(posts, provider);
    r.retweet_pct = retweet_summary(posts);
  }
  return r;
}

inline nlohmann::json users_json(const std::vector<UserCount>& users) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& u : users) {
    auto j = to_json(u.user);
    j["post_count"] = u.posts;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline nlohmann::json sentiment_json(const SpreadReport& r) {
  if (!r.sentiment) return {{"positive_pct", nullptr}, {"negative_pct", nullptr}, {"neutral_pct", nullptr}, {"post_count", 0}};
  return {{"positive_pct", r.sentiment->positive_pct},
          {"negative_pct", r.sentiment->negative_pct},
          {"neutral_pct", r.sentiment->neutral_pct},
          {"post_count", r.sentiment->post_count}};
}

inline nlohmann::json retweets_json(const SpreadReport& r) {
  nlohmann::json j{{"post_count", r.post_count}};
  if (r.retweet_pct) {
    j["retweet_pct"] = *r.retweet_pct;
    j["original_pct"] = 100.0 - *r.retweet_pct;
  } else {
    j["retweet_pct"] = nullptr;
    j["original_pct"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json(const SpreadReport& r) {
  return {{"users", users_json(r.users)},
          {"sentiment", sentiment_json(r)},
          {"retweets", retweets_json(r)},
          {"reduction_pct", r.reduction_pct},
          {"post_count", r.post_count}};
}

}  // namespace dupscope
