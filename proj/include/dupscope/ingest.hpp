#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dupscope/codec.hpp"
#include "dupscope/error.hpp"
#include "dupscope/parallel.hpp"
#include "dupscope/util/fetch.hpp"
#include "dupscope/util/sha256.hpp"
#include "dupscope/util/time.hpp"

namespace dupscope {

struct UserProfile {
  std::string username;
  std::string display_name;
  std::string description;
  std::string location;
  std::string profile_image_url;
  std::string profile_url;

  bool operator==(const UserProfile&) const = default;
};

struct Post {
  std::string post_id;
  std::string text;
  UserProfile author;
  UtcTime created_at{};
  bool is_retweet = false;
  std::vector<std::string> image_urls;

  bool operator==(const Post&) const = default;
};

/// One stored image, keyed by the SHA-256 of its bytes.
struct ImageRecord {
  std::string sha256;
  std::string file;  // relative to the corpus directory: images/<sha256>.<ext>
  std::vector<std::string> source_urls;
  std::vector<std::string> post_ids;

  bool operator==(const ImageRecord&) const = default;
};

struct FetchFailure {
  std::string url;
  std::string reason;
  std::vector<std::string> post_ids;

  bool operator==(const FetchFailure&) const = default;
};

struct Corpus {
  std::string corpus_id;
  std::vector<std::string> keywords;
  std::string source;
  UtcTime created_at{};
  std::vector<Post> posts;
  std::vector<ImageRecord> images;  // sorted by sha256
  std::vector<FetchFailure> failures;
  std::filesystem::path root;       // directory the corpus lives in (not serialized)

  const ImageRecord* find_image(const std::string& sha) const {
    const auto it = std::lower_bound(images.begin(), images.end(), sha,
                                     [](const ImageRecord& r, const std::string& s) { return r.sha256 < s; });
    return it != images.end() && it->sha256 == sha ? &*it : nullptr;
  }

  std::filesystem::path image_path(const ImageRecord& r) const { return root / r.file; }
};

// ---- feed wire format ----
//
// One JSON object per line:
//   {"post_id": str, "text": str, "created_at": RFC 3339, "is_retweet": bool,
//    "image_urls": [str], "author": {"username": str, "display_name": str, "description": str,
//    "location": str, "profile_image_url": str, "profile_url": str}}
// Only post_id, created_at and author.username are required.

inline nlohmann::json to_json(const UserProfile& u) {
  return {{"username", u.username},       {"display_name", u.display_name},
          {"description", u.description}, {"location", u.location},
          {"profile_image_url", u.profile_image_url}, {"profile_url", u.profile_url}};
}

inline nlohmann::json to_json(const Post& p) {
  return {{"post_id", p.post_id},       {"text", p.text},
          {"author", to_json(p.author)}, {"created_at", format_rfc3339(p.created_at)},
          {"is_retweet", p.is_retweet}, {"image_urls", p.image_urls}};
}

namespace detail {

inline std::string opt_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  if (!j.at(key).is_string()) fail(Errc::MalformedFeedRecord, std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace detail

inline UserProfile user_from_json(const nlohmann::json& j) {
  require(j.is_object(), Errc::MalformedFeedRecord, "author must be an object");
  UserProfile u;
  u.username = detail::opt_string(j, "username");
  require(!u.username.empty(), Errc::MalformedFeedRecord, "author.username is required");
  u.display_name = detail::opt_string(j, "display_name");
  u.description = detail::opt_string(j, "description");
  u.location = detail::opt_string(j, "location");
  u.profile_image_url = detail::opt_string(j, "profile_image_url");
  u.profile_url = detail::opt_string(j, "profile_url");
  return u;
}

inline Post post_from_json(const nlohmann::json& j) {
  require(j.is_object(), Errc::MalformedFeedRecord, "record is not a JSON object");
  Post p;
  p.post_id = detail::opt_string(j, "post_id");
  require(!p.post_id.empty(), Errc::MalformedFeedRecord, "post_id is required");
  p.text = detail::opt_string(j, "text");
  require(j.contains("author"), Errc::MalformedFeedRecord, "author is required");
  p.author = user_from_json(j.at("author"));
  const auto ts = parse_rfc3339(detail::opt_string(j, "created_at"));
  require(ts.has_value(), Errc::MalformedFeedRecord, "created_at must be an RFC 3339 timestamp");
  p.created_at = *ts;
  if (j.contains("is_retweet")) {
    require(j.at("is_retweet").is_boolean(), Errc::MalformedFeedRecord, "is_retweet must be a boolean");
    p.is_retweet = j.at("is_retweet").get<bool>();
  }
  if (j.contains("image_urls")) {
    const auto& urls = j.at("image_urls");
    require(urls.is_array(), Errc::MalformedFeedRecord, "image_urls must be an array");
    for (const auto& u : urls) {
      require(u.is_string(), Errc::MalformedFeedRecord, "image_urls entries must be strings");
      p.image_urls.push_back(u.get<std::string>());
    }
  }
  return p;
}

inline Post parse_post_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedFeedRecord, std::string("invalid JSON: ") + e.what());
  }
  return post_from_json(j);
}

// ---- feed sources ----

struct FeedPage {
  std::vector<std::string> lines;
  std::optional<std::string> next_cursor;
};

/// A paged NDJSON post source.
class FeedSource {
 public:
  virtual ~FeedSource() = default;
  virtual FeedPage fetch(const std::optional<std::string>& cursor) = 0;
  virtual std::string descriptor() const = 0;
};

namespace detail {

inline std::vector<std::string> split_lines(const std::string& body) {
  std::vector<std::string> lines;
  std::istringstream in(body);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

/// Whole file as a single page.
class FileFeedSource : public FeedSource {
 public:
  explicit FileFeedSource(std::filesystem::path path) : path_(std::move(path)) {}

  FeedPage fetch(const std::optional<std::string>&) override {
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(Errc::SourceUnreachable, "cannot open feed file " + path_.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return {detail::split_lines(ss.str()), std::nullopt};
  }

  std::string descriptor() const override { return path_.string(); }

 private:
  std::filesystem::path path_;
};

/// GET <url>[?|&]cursor=<c>; the next cursor arrives in the X-Next-Cursor response header.
class HttpFeedSource : public FeedSource {
 public:
  explicit HttpFeedSource(std::string url, int timeout_seconds = 10) : url_(std::move(url)), timeout_(timeout_seconds) {}

  FeedPage fetch(const std::optional<std::string>& cursor) override {
    std::string url = url_;
    if (cursor) url += (url.find('?') == std::string::npos ? "?cursor=" : "&cursor=") + httplib::detail::encode_query_param(*cursor);
    const auto res = http_get(url, timeout_);
    require(res.status == 200, Errc::SourceUnreachable, url + ": HTTP status " + std::to_string(res.status));
    FeedPage page{detail::split_lines(res.body), std::nullopt};
    const std::string next = res.header("X-Next-Cursor");
    if (!next.empty()) page.next_cursor = next;
    return page;
  }

  std::string descriptor() const override { return url_; }

 private:
  std::string url_;
  int timeout_;
};

/// http:// URLs use HttpFeedSource; file:// URLs and bare paths use FileFeedSource.
inline std::unique_ptr<FeedSource> open_feed(const std::string& source) {
  if (source.rfind("http://", 0) == 0) return std::make_unique<HttpFeedSource>(source);
  if (source.rfind("file://", 0) == 0) return std::make_unique<FileFeedSource>(source.substr(7));
  require(source.find("://") == std::string::npos, Errc::InvalidArgument, "unsupported feed source " + source);
  return std::make_unique<FileFeedSource>(source);
}

struct FetchStats {
  std::size_t records = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::size_t pages = 0;
};

inline std::string ascii_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

/// Case-insensitive substring match against any keyword.
inline bool matches_keywords(const std::string& text, const std::vector<std::string>& keywords) {
  const std::string lower = ascii_lower(text);
  return std::any_of(keywords.begin(), keywords.end(),
                     [&](const std::string& k) { return lower.find(ascii_lower(k)) != std::string::npos; });
}

/// Keyword-matched posts in feed order, following cursors until max_posts or exhaustion.
/// Malformed records and repeated post ids are skipped and counted.
inline std::vector<Post> fetch_posts(FeedSource& source, const std::vector<std::string>& keywords, std::size_t max_posts,
                                     FetchStats* stats = nullptr) {
  const bool any_keyword = std::any_of(keywords.begin(), keywords.end(), [](const std::string& k) { return !k.empty(); });
  require(any_keyword, Errc::InvalidArgument, "at least one non-empty keyword is required");
  require(max_posts >= 1, Errc::InvalidArgument, "max_posts must be >= 1");
  std::vector<std::string> kws;
  for (const auto& k : keywords)
    if (!k.empty()) kws.push_back(k);

  FetchStats local;
  std::vector<Post> out;
  std::set<std::string> seen;
  std::optional<std::string> cursor;
  std::set<std::string> visited_cursors;
  do {
    FeedPage page = source.fetch(cursor);
    ++local.pages;
    for (const auto& line : page.lines) {
      ++local.records;
      Post p;
      try {
        p = parse_post_line(line);
      } catch (const Error& e) {
        ++local.malformed;
        std::cerr << "warning: skipping feed record " << local.records << ": " << e.what() << '\n';
        continue;
      }
      if (!seen.insert(p.post_id).second) {
        ++local.duplicates;
        continue;
      }
      if (!matches_keywords(p.text, kws)) continue;
      out.push_back(std::move(p));
      if (out.size() >= max_posts) break;
    }
    cursor = page.next_cursor;
    // A cursor seen before would loop forever.
    if (cursor && !visited_cursors.insert(*cursor).second) cursor.reset();
  } while (cursor && out.size() < max_posts);
  if (stats) *stats = local;
  return out;
}

inline std::vector<Post> filter_image_posts(const std::vector<Post>& posts) {
  std::vector<Post> out;
  std::copy_if(posts.begin(), posts.end(), std::back_inserter(out), [](const Post& p) { return !p.image_urls.empty(); });
  return out;
}

// ---- image download ----

struct CorpusDelta {
  std::vector<ImageRecord> images;  // sorted by sha256
  std::vector<FetchFailure> failures;
};

namespace detail {

inline void sorted_unique(std::vector<std::string>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

/// Writes through a temporary sibling so readers never observe partial files.
inline void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  try {
    write_file(tmp, bytes);
    std::filesystem::rename(tmp, path);
  } catch (const std::exception& e) {
    fail(Errc::StoreWriteError, "cannot write " + path.string() + ": " + e.what());
  }
}

inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
  atomic_write(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace detail

/// Fetches each distinct URL once (up to `parallelism` at a time) and stores the bytes at
/// <store>/images/<sha256>.<ext>. Identical content from different URLs shares one record.
/// Fetch failures and non-PNG/JPEG payloads are returned as failures.
inline CorpusDelta download_images(const std::vector<Post>& posts, const std::filesystem::path& store,
                                   unsigned parallelism = 0) {
  namespace fs = std::filesystem;
  std::vector<std::string> urls;
  std::map<std::string, std::vector<std::string>> url_posts;
  for (const auto& p : posts)
    for (const auto& u : p.image_urls) {
      auto& ids = url_posts[u];
      if (ids.empty()) urls.push_back(u);
      ids.push_back(p.post_id);
    }
  try {
    fs::create_directories(store / "images");
  } catch (const fs::filesystem_error& e) {
    fail(Errc::StoreWriteError, e.what());
  }

  struct Slot {
    std::string sha, file, error;
  };
  std::vector<Slot> slots(urls.size());
  parallel_for(
      urls.size(),
      [&](std::size_t i) {
        try {
          const auto bytes = fetch_bytes(urls[i]);
          const ImageFormat fmt = sniff_format(bytes);
          if (fmt == ImageFormat::Unknown) fail(Errc::FetchFailed, urls[i] + ": payload is not a PNG or JPEG image");
          slots[i].sha = sha256_hex(bytes);
          slots[i].file = "images/" + slots[i].sha + "." + extension_for(fmt);
          const fs::path dst = store / slots[i].file;
          // Two URLs with the same bytes race benignly: both write identical content.
          if (!fs::exists(dst)) detail::atomic_write(dst, bytes);
        } catch (const Error& e) {
          if (e.code() == Errc::StoreWriteError) throw;
          slots[i].error = e.what();
        }
      },
      parallelism);

  CorpusDelta delta;
  std::map<std::string, ImageRecord> by_sha;
  for (std::size_t i = 0; i < urls.size(); ++i) {
    auto ids = url_posts[urls[i]];
    detail::sorted_unique(ids);
    if (!slots[i].error.empty()) {
      delta.failures.push_back({urls[i], slots[i].error, ids});
      continue;
    }
    auto& rec = by_sha[slots[i].sha];
    rec.sha256 = slots[i].sha;
    if (rec.file.empty()) rec.file = slots[i].file;
    rec.source_urls.push_back(urls[i]);
    rec.post_ids.insert(rec.post_ids.end(), ids.begin(), ids.end());
  }
  for (auto& [sha, rec] : by_sha) {
    detail::sorted_unique(rec.source_urls);
    detail::sorted_unique(rec.post_ids);
    delta.images.push_back(std::move(rec));
  }
  return delta;
}

// ---- persistence ----

inline nlohmann::json to_json(const ImageRecord& r) {
  return {{"sha256", r.sha256}, {"file", r.file}, {"source_urls", r.source_urls}, {"post_ids", r.post_ids}};
}

inline nlohmann::json to_json(const FetchFailure& f) {
  return {{"url", f.url}, {"reason", f.reason}, {"post_ids", f.post_ids}};
}

/// Layout: meta.json (id, keywords, source, created_at, image records), posts.ndjson,
/// images/<sha256>.<ext>, failures.ndjson.
inline void save_corpus(const Corpus& c, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  try {
    fs::create_directories(dir / "images");
  } catch (const fs::filesystem_error& e) {
    fail(Errc::StoreWriteError, e.what());
  }
  nlohmann::json images = nlohmann::json::array();
  for (const auto& r : c.images) images.push_back(to_json(r));
  const nlohmann::json meta{{"corpus_id", c.corpus_id},
                            {"keywords", c.keywords},
                            {"source", c.source},
                            {"created_at", format_rfc3339(c.created_at)},
                            {"images", images}};
  std::string posts, failures;
  for (const auto& p : c.posts) posts += to_json(p).dump() + "\n";
  for (const auto& f : c.failures) failures += to_json(f).dump() + "\n";
  detail::atomic_write(dir / "posts.ndjson", posts);
  detail::atomic_write(dir / "failures.ndjson", failures);
  // meta.json last: its presence marks a complete corpus.
  detail::atomic_write(dir / "meta.json", meta.dump(2) + "\n");
}

namespace detail {

inline std::vector<std::string> string_list(const nlohmann::json& j, const char* key, const std::string& where) {
  require(j.contains(key) && j.at(key).is_array(), Errc::MissingMetadata, where + ": missing array '" + key + "'");
  std::vector<std::string> out;
  for (const auto& v : j.at(key)) {
    require(v.is_string(), Errc::MissingMetadata, where + ": '" + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline std::string req_string(const nlohmann::json& j, const char* key, const std::string& where) {
  require(j.contains(key) && j.at(key).is_string(), Errc::MissingMetadata, where + ": missing string '" + key + "'");
  return j.at(key).get<std::string>();
}

}  // namespace detail

/// Loads and validates a corpus directory: content hashes, record references and stray files.
inline Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const fs::path meta_path = dir / "meta.json", posts_path = dir / "posts.ndjson";
  require(fs::is_regular_file(meta_path), Errc::MissingMetadata, "missing " + meta_path.string());
  require(fs::is_regular_file(posts_path), Errc::MissingMetadata, "missing " + posts_path.string());
  nlohmann::json meta;
  try {
    std::ifstream in(meta_path);
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MissingMetadata, meta_path.string() + ": " + e.what());
  }
  const std::string where = meta_path.string();
  Corpus c;
  c.root = dir;
  c.corpus_id = detail::req_string(meta, "corpus_id", where);
  c.keywords = detail::string_list(meta, "keywords", where);
  c.source = detail::req_string(meta, "source", where);
  const auto ts = parse_rfc3339(detail::req_string(meta, "created_at", where));
  require(ts.has_value(), Errc::MissingMetadata, where + ": created_at is not RFC 3339");
  c.created_at = *ts;

  {
    std::ifstream in(posts_path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (line.empty()) continue;
      try {
        c.posts.push_back(parse_post_line(line));
      } catch (const Error& e) {
        fail(Errc::MissingMetadata, posts_path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }
  std::map<std::string, const Post*> posts_by_id;
  for (const auto& p : c.posts)
    require(posts_by_id.emplace(p.post_id, &p).second, Errc::MissingMetadata,
            posts_path.string() + ": duplicate post_id " + p.post_id);

  require(meta.contains("images") && meta.at("images").is_array(), Errc::MissingMetadata, where + ": missing 'images'");
  std::set<std::string> referenced_files;
  for (const auto& j : meta.at("images")) {
    ImageRecord r;
    r.sha256 = detail::req_string(j, "sha256", where);
    r.file = detail::req_string(j, "file", where);
    r.source_urls = detail::string_list(j, "source_urls", where);
    r.post_ids = detail::string_list(j, "post_ids", where);
    require(is_sha256_hex(r.sha256), Errc::MissingMetadata, where + ": malformed sha256 '" + r.sha256 + "'");
    const fs::path file = dir / r.file;
    require(fs::is_regular_file(file), Errc::MissingMetadata, "image file missing: " + file.string());
    const auto bytes = read_file(file);
    require(sha256_hex(bytes) == r.sha256, Errc::HashMismatch,
            file.string() + " does not hash to its record key " + r.sha256);
    require(!r.post_ids.empty(), Errc::OrphanImage, file.string() + " is not referenced by any post");
    for (const auto& id : r.post_ids)
      require(posts_by_id.count(id) == 1, Errc::OrphanImage, file.string() + " references unknown post " + id);
    referenced_files.insert(fs::path(r.file).filename().string());
    c.images.push_back(std::move(r));
  }
  std::sort(c.images.begin(), c.images.end(), [](const ImageRecord& a, const ImageRecord& b) { return a.sha256 < b.sha256; });
  for (std::size_t i = 1; i < c.images.size(); ++i)
    require(c.images[i].sha256 != c.images[i - 1].sha256, Errc::MissingMetadata, where + ": duplicate image record");
  if (fs::is_directory(dir / "images"))
    for (const auto& e : fs::directory_iterator(dir / "images")) {
      if (!e.is_regular_file() || e.path().extension() == ".tmp") continue;
      require(referenced_files.count(e.path().filename().string()) == 1, Errc::OrphanImage,
              e.path().string() + " has no image record");
    }

  const fs::path failures_path = dir / "failures.ndjson";
  if (fs::is_regular_file(failures_path)) {
    std::ifstream in(failures_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        c.failures.push_back({j.at("url"), j.at("reason"), j.at("post_ids")});
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::MissingMetadata, failures_path.string() + ": " + e.what());
      }
    }
  }
  return c;
}

struct IngestOptions {
  std::string source;
  std::vector<std::string> keywords;
  std::size_t max_posts = 1000;
  unsigned parallelism = 0;
  std::optional<std::string> corpus_id;  // default: derived from source and keywords
};

struct IngestReport {
  FetchStats fetch;
  std::size_t matched_posts = 0;
  std::size_t image_posts = 0;
};

/// fetch_posts -> filter_image_posts -> download_images -> save_corpus. Re-running into an
/// existing corpus directory keeps its id and creation time, so identical input is a no-op.
inline Corpus ingest(const IngestOptions& opt, const std::filesystem::path& out_dir, IngestReport* report = nullptr) {
  auto source = open_feed(opt.source);
  IngestReport local;
  const auto matched = fetch_posts(*source, opt.keywords, opt.max_posts, &local.fetch);
  local.matched_posts = matched.size();
  Corpus c;
  c.posts = filter_image_posts(matched);
  local.image_posts = c.posts.size();
  c.keywords = opt.keywords;
  c.source = source->descriptor();
  std::string key = c.source;
  for (const auto& k : c.keywords) key += "\n" + k;
  c.corpus_id = opt.corpus_id.value_or(sha256_hex(key).substr(0, 16));
  c.created_at = utc_now();
  if (std::filesystem::is_regular_file(out_dir / "meta.json")) {
    try {
      std::ifstream in(out_dir / "meta.json");
      const auto meta = nlohmann::json::parse(in);
      if (const auto ts = parse_rfc3339(meta.value("created_at", ""))) c.created_at = *ts;
      if (!opt.corpus_id) c.corpus_id = meta.value("corpus_id", c.corpus_id);
    } catch (const nlohmann::json::exception&) {
    }
  }
  auto delta = download_images(c.posts, out_dir, opt.parallelism);
  c.images = std::move(delta.images);
  c.failures = std::move(delta.failures);
  c.root = out_dir;
  save_corpus(c, out_dir);
  if (report) *report = local;
  return c;
}

}  // namespace dupscope
