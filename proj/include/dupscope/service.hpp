#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dupscope/util/http.hpp"
#include <nlohmann/json.hpp>

#include "dupscope/analytics.hpp"
#include "dupscope/codec.hpp"
#include "dupscope/error.hpp"
#include "dupscope/ingest.hpp"
#include "dupscope/retrieval.hpp"
#include "dupscope/util/base64.hpp"
#include "dupscope/util/fetch.hpp"
#include "dupscope/util/time.hpp"

namespace dupscope::service {

namespace fs = std::filesystem;

enum class JobState { Queued, Ingesting, Comparing, Complete, Failed };

constexpr const char* state_name(JobState s) {
  switch (s) {
    case JobState::Queued: return "queued";
    case JobState::Ingesting: return "ingesting";
    case JobState::Comparing: return "comparing";
    case JobState::Complete: return "complete";
    case JobState::Failed: return "failed";
  }
  return "unknown";
}

inline JobState parse_state(const std::string& s) {
  for (auto st : {JobState::Queued, JobState::Ingesting, JobState::Comparing, JobState::Complete, JobState::Failed})
    if (s == state_name(st)) return st;
  fail(Errc::InvalidArgument, "unknown job state '" + s + "'");
}

constexpr bool is_terminal(JobState s) { return s == JobState::Complete || s == JobState::Failed; }

struct JobRequest {
  std::vector<std::string> keywords;
  MethodKind method = MethodKind::ImprovedOrb;
  double threshold = default_threshold(MethodKind::ImprovedOrb);
  std::string source;
  std::size_t max_posts = 1000;
  std::string image_url;   // empty when the query was uploaded
  std::string query_file;  // relative to the job directory once the query bytes are stored
};

struct PhaseTimings {
  std::optional<double> ingest_seconds;
  std::optional<double> compare_seconds;
  std::optional<double> analyze_seconds;
};

struct JobRecord {
  std::string job_id;
  JobRequest request;
  JobState state = JobState::Queued;
  std::size_t done = 0;
  std::size_t total = 0;
  std::string reason;
  std::string corpus_id;
  PhaseTimings timings;
  std::optional<double> mean_seconds_per_pair;
  UtcTime created_at{};
  UtcTime updated_at{};
};

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

inline std::optional<double> opt_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline nlohmann::json to_json(const JobRecord& r) {
  nlohmann::json j{{"job_id", r.job_id},
                   {"state", state_name(r.state)},
                   {"request",
                    {{"keywords", r.request.keywords},
                     {"method", method_name(r.request.method)},
                     {"threshold", r.request.threshold},
                     {"source", r.request.source},
                     {"max_posts", r.request.max_posts},
                     {"image_url", r.request.image_url},
                     {"query_file", r.request.query_file}}},
                   {"progress", {{"done", r.done}, {"total", r.total}}},
                   {"reason", r.state == JobState::Failed ? nlohmann::json(r.reason) : nlohmann::json(nullptr)},
                   {"corpus_id", r.corpus_id.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.corpus_id)},
                   {"timings",
                    {{"ingest_seconds", opt_json(r.timings.ingest_seconds)},
                     {"compare_seconds", opt_json(r.timings.compare_seconds)},
                     {"analyze_seconds", opt_json(r.timings.analyze_seconds)}}},
                   {"mean_seconds_per_pair", opt_json(r.mean_seconds_per_pair)},
                   {"created_at", format_rfc3339(r.created_at)},
                   {"updated_at", format_rfc3339(r.updated_at)}};
  return j;
}

inline JobRecord job_from_json(const nlohmann::json& j) {
  JobRecord r;
  r.job_id = j.at("job_id");
  r.state = parse_state(j.at("state"));
  const auto& q = j.at("request");
  r.request.keywords = q.at("keywords").get<std::vector<std::string>>();
  r.request.method = parse_method(q.at("method").get<std::string>());
  r.request.threshold = q.at("threshold");
  r.request.source = q.at("source");
  r.request.max_posts = q.at("max_posts");
  r.request.image_url = q.value("image_url", "");
  r.request.query_file = q.value("query_file", "");
  r.done = j.at("progress").at("done");
  r.total = j.at("progress").at("total");
  if (j.contains("reason") && j.at("reason").is_string()) r.reason = j.at("reason");
  if (j.contains("corpus_id") && j.at("corpus_id").is_string()) r.corpus_id = j.at("corpus_id");
  const auto& t = j.at("timings");
  r.timings = {opt_double(t, "ingest_seconds"), opt_double(t, "compare_seconds"), opt_double(t, "analyze_seconds")};
  r.mean_seconds_per_pair = opt_double(j, "mean_seconds_per_pair");
  if (const auto ts = parse_rfc3339(j.at("created_at"))) r.created_at = *ts;
  if (const auto ts = parse_rfc3339(j.at("updated_at"))) r.updated_at = *ts;
  return r;
}

inline std::string make_uuid() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}() ^ static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
  std::uint64_t hi, lo;
  {
    std::lock_guard lock(m);
    hi = rng();
    lo = rng();
  }
  hi = (hi & 0xFFFFFFFFFFFF0FFFull) | 0x0000000000004000ull;
  lo = (lo & 0x3FFFFFFFFFFFFFFFull) | 0x8000000000000000ull;
  char buf[37];
  std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                static_cast<unsigned>((hi >> 16) & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFull));
  return buf;
}

inline bool is_uuid(const std::string& s) {
  if (s.size() != 36) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool dash = i == 8 || i == 13 || i == 18 || i == 23;
    if (dash ? s[i] != '-' : !std::isxdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

/// Job records and artifacts under <root>/jobs/<id>/. Every file is replaced atomically.
class JobStore {
 public:
  explicit JobStore(fs::path data_root) : root_(std::move(data_root)) { fs::create_directories(root_ / "jobs"); }

  const fs::path& root() const noexcept { return root_; }
  fs::path job_dir(const std::string& id) const { return root_ / "jobs" / id; }
  fs::path corpus_dir(const std::string& corpus_id) const { return root_ / "corpora" / corpus_id; }

  void save(const JobRecord& r) {
    fs::create_directories(job_dir(r.job_id));
    detail::atomic_write(job_dir(r.job_id) / "job.json", to_json(r).dump(2));
  }

  std::optional<JobRecord> load(const std::string& id) const {
    if (!is_uuid(id)) return std::nullopt;
    const auto path = job_dir(id) / "job.json";
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
      return job_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
      std::cerr << "warning: unreadable job record " << path << ": " << e.what() << '\n';
      return std::nullopt;
    }
  }

  /// All readable jobs, oldest first.
  std::vector<JobRecord> list() const {
    std::vector<JobRecord> out;
    for (const auto& e : fs::directory_iterator(root_ / "jobs"))
      if (e.is_directory())
        if (auto r = load(e.path().filename().string())) out.push_back(std::move(*r));
    std::stable_sort(out.begin(), out.end(), [](const JobRecord& a, const JobRecord& b) {
      if (a.created_at != b.created_at) return a.created_at < b.created_at;
      return a.job_id < b.job_id;
    });
    return out;
  }

  void write_artifact(const std::string& id, const std::string& name, const nlohmann::json& j) {
    detail::atomic_write(job_dir(id) / name, j.dump(2));
  }

  void write_bytes(const std::string& id, const std::string& name, std::span<const std::uint8_t> bytes) {
    fs::create_directories(job_dir(id));
    detail::atomic_write(job_dir(id) / name, bytes);
  }

  std::optional<std::string> read_artifact(const std::string& id, const std::string& name) const {
    std::ifstream in(job_dir(id) / name, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

 private:
  fs::path root_;
};

struct ServiceConfig {
  fs::path data_root = "data";
  std::string host = "127.0.0.1";
  int port = 8080;
  unsigned workers = 1;
  MethodKind default_method = MethodKind::ImprovedOrb;
  std::optional<double> default_threshold;
  std::string default_source;
  std::string checkpoint;  // enables the cnn method
  std::size_t default_max_posts = 1000;
  unsigned download_parallelism = 4;
};

/// Request rejected before a job is created.
struct RequestError {
  int status;
  std::string message;
};

class Service {
 public:
  explicit Service(ServiceConfig cfg) : cfg_(std::move(cfg)), store_(cfg_.data_root) {
    if (!cfg_.checkpoint.empty())
      cnn_model_ = std::make_shared<const cnn::Model>(cnn::load_checkpoint(cfg_.checkpoint).model);
    recover();
    routes();
    for (unsigned i = 0; i < std::max(1u, cfg_.workers); ++i) workers_.emplace_back([this] { work(); });
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ~Service() {
    stop();
    {
      std::lock_guard lock(queue_mutex_);
      shutting_down_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : workers_) t.join();
  }

  JobStore& store() noexcept { return store_; }
  httplib::Server& http() noexcept { return server_; }

  /// Blocks serving HTTP until stop().
  bool listen() { return server_.listen(cfg_.host, cfg_.port); }

  /// Serves from a background thread; returns the bound port (an ephemeral one when cfg.port is 0).
  int start() {
    const int port = cfg_.port == 0 ? server_.bind_to_any_port(cfg_.host) : (server_.bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1);
    require(port > 0, Errc::IoError, "cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
    listener_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (listener_.joinable()) listener_.join();
  }

  /// Validates a request, stores the query, persists a Queued record and enqueues it.
  std::string submit(JobRequest req, const std::vector<std::uint8_t>& upload) {
    JobRecord r;
    r.job_id = make_uuid();
    r.created_at = r.updated_at = utc_now();
    if (!upload.empty()) {
      const auto fmt = sniff_format(upload);
      req.query_file = "query." + extension_for(fmt);
      store_.write_bytes(r.job_id, req.query_file, upload);
    }
    r.request = std::move(req);
    store_.save(r);
    enqueue(r.job_id);
    return r.job_id;
  }

  /// Parses and validates a POST /jobs body. Throws RequestError.
  std::pair<JobRequest, std::vector<std::uint8_t>> parse_request(const httplib::Request& http_req) const {
    JobRequest req;
    std::vector<std::uint8_t> upload;
    std::string method = std::string(method_name(cfg_.default_method));
    std::optional<double> threshold = cfg_.default_threshold;
    std::vector<std::string> keywords;
    req.source = cfg_.default_source;
    req.max_posts = cfg_.default_max_posts;

    const auto split_keywords = [](const std::string& s) {
      std::vector<std::string> out;
      std::stringstream ss(s);
      std::string k;
      while (std::getline(ss, k, ','))
        if (!k.empty()) out.push_back(k);
      return out;
    };
    const auto bad = [](int status, std::string msg) -> RequestError { return {status, std::move(msg)}; };

    if (http_req.is_multipart_form_data()) {
      const auto field = [&](const char* key) -> std::optional<std::string> {
        if (!http_req.has_file(key)) return std::nullopt;
        return http_req.get_file_value(key).content;
      };
      if (auto v = field("keywords")) keywords = split_keywords(*v);
      if (auto v = field("method")) method = *v;
      if (auto v = field("threshold")) {
        try {
          threshold = std::stod(*v);
        } catch (const std::exception&) {
          throw bad(400, "threshold must be a number");
        }
      }
      if (auto v = field("source")) req.source = *v;
      if (auto v = field("max_posts")) {
        try {
          req.max_posts = std::stoul(*v);
        } catch (const std::exception&) {
          throw bad(400, "max_posts must be a positive integer");
        }
      }
      if (auto v = field("image_url")) req.image_url = *v;
      if (auto v = field("image")) upload.assign(v->begin(), v->end());
    } else {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(http_req.body);
      } catch (const nlohmann::json::exception&) {
        throw bad(400, "request body must be JSON or multipart/form-data");
      }
      if (!body.is_object()) throw bad(400, "request body must be a JSON object");
      try {
        if (body.contains("keywords")) {
          const auto& k = body.at("keywords");
          if (k.is_string())
            keywords = split_keywords(k.get<std::string>());
          else
            keywords = k.get<std::vector<std::string>>();
        }
        method = body.value("method", method);
        if (body.contains("threshold") && !body.at("threshold").is_null()) threshold = body.at("threshold").get<double>();
        req.source = body.value("source", req.source);
        if (body.contains("max_posts")) {
          const auto n = body.at("max_posts").get<long long>();
          if (n < 1) throw bad(400, "max_posts must be a positive integer");
          req.max_posts = static_cast<std::size_t>(n);
        }
        req.image_url = body.value("image_url", "");
        if (body.contains("image_base64")) {
          try {
            upload = base64_decode(body.at("image_base64").get<std::string>());
          } catch (const Error& e) {
            throw bad(422, std::string("undecodable image: ") + e.what());
          }
        }
      } catch (const nlohmann::json::exception& e) {
        throw bad(400, std::string("malformed field: ") + e.what());
      }
    }

    try {
      req.method = parse_method(method);
    } catch (const Error& e) {
      throw bad(400, e.what());
    }
    std::erase_if(keywords, [](const std::string& k) { return k.empty(); });
    if (keywords.empty()) throw bad(400, "at least one keyword is required");
    req.keywords = std::move(keywords);
    if (req.source.empty()) throw bad(400, "no feed source given and none configured");
    if (req.max_posts < 1) throw bad(400, "max_posts must be a positive integer");
    if (upload.empty() == req.image_url.empty()) throw bad(400, "provide exactly one of image upload or image_url");
    if (req.method == MethodKind::Cnn && !cnn_model_) throw bad(400, "the cnn method is not available: service has no checkpoint");
    try {
      Method m = make_method(req.method, threshold);
      m.validate();
      req.threshold = m.threshold;
    } catch (const Error& e) {
      throw bad(400, e.what());
    }
    if (!upload.empty()) {
      try {
        decode_image(upload);
      } catch (const Error& e) {
        throw bad(422, std::string("undecodable image: ") + e.what());
      }
    }
    return {std::move(req), std::move(upload)};
  }

  /// Blocks until the job is terminal or the timeout elapses; returns the last seen record.
  std::optional<JobRecord> wait_for(const std::string& id, std::chrono::milliseconds timeout) const {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      auto r = store_.load(id);
      if (!r || is_terminal(r->state) || std::chrono::steady_clock::now() >= deadline) return r;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }

 private:
  Method make_method(MethodKind kind, std::optional<double> threshold) const {
    Method m = Method::make(kind, threshold);
    if (kind == MethodKind::Cnn) {
      m.model = cnn_model_;
      m.checkpoint = cfg_.checkpoint;
    }
    return m;
  }

  /// Jobs caught mid-flight by a crash fail; queued jobs resume.
  void recover() {
    for (auto& r : store_.list()) {
      if (r.state == JobState::Ingesting || r.state == JobState::Comparing) {
        r.state = JobState::Failed;
        r.reason = "interrupted by service restart";
        r.updated_at = utc_now();
        store_.save(r);
      } else if (r.state == JobState::Queued) {
        queue_.push_back(r.job_id);
      }
    }
  }

  void enqueue(const std::string& id) {
    {
      std::lock_guard lock(queue_mutex_);
      queue_.push_back(id);
    }
    queue_cv_.notify_one();
  }

  void work() {
    for (;;) {
      std::string id;
      {
        std::unique_lock lock(queue_mutex_);
        queue_cv_.wait(lock, [&] { return shutting_down_ || !queue_.empty(); });
        if (shutting_down_) return;
        id = queue_.front();
        queue_.pop_front();
      }
      run_job(id);
    }
  }

  void advance(JobRecord& r, JobState next) {
    require(static_cast<int>(next) >= static_cast<int>(r.state) && !is_terminal(r.state), Errc::InvalidArgument,
            std::string("illegal job transition ") + state_name(r.state) + " -> " + state_name(next));
    r.state = next;
    r.updated_at = utc_now();
    store_.save(r);
  }

  std::mutex& corpus_mutex(const std::string& corpus_id) {
    std::lock_guard lock(corpus_mutexes_guard_);
    auto& m = corpus_mutexes_[corpus_id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
  }

  void run_job(const std::string& id) {
    auto loaded = store_.load(id);
    if (!loaded || loaded->state != JobState::Queued) return;
    JobRecord r = std::move(*loaded);
    using clock = std::chrono::steady_clock;
    const auto seconds_since = [](clock::time_point t) { return std::chrono::duration<double>(clock::now() - t).count(); };
    try {
      advance(r, JobState::Ingesting);
      auto t0 = clock::now();
      if (r.request.query_file.empty()) {
        std::vector<std::uint8_t> bytes;
        try {
          bytes = fetch_bytes(r.request.image_url);
        } catch (const Error& e) {
          fail(Errc::FetchFailed, "query image " + r.request.image_url + ": " + e.what());
        }
        r.request.query_file = "query." + extension_for(sniff_format(bytes));
        store_.write_bytes(id, r.request.query_file, bytes);
        store_.save(r);
      }
      RasterImage query;
      try {
        query = load_image(store_.job_dir(id) / r.request.query_file);
      } catch (const Error& e) {
        fail(Errc::UndecodableQuery, std::string("query image: ") + e.what());
      }

      IngestOptions opt;
      opt.source = r.request.source;
      opt.keywords = r.request.keywords;
      opt.max_posts = r.request.max_posts;
      opt.parallelism = cfg_.download_parallelism;
      std::string key = open_feed(opt.source)->descriptor();
      for (const auto& k : opt.keywords) key += "\n" + k;
      r.corpus_id = sha256_hex(key).substr(0, 16);
      opt.corpus_id = r.corpus_id;
      const fs::path corpus_path = store_.corpus_dir(r.corpus_id);
      Corpus corpus;
      {
        std::lock_guard lock(corpus_mutex(r.corpus_id));
        ingest(opt, corpus_path);
        corpus = load_corpus(corpus_path);
      }
      r.timings.ingest_seconds = seconds_since(t0);
      r.total = corpus.images.size();
      advance(r, JobState::Comparing);

      t0 = clock::now();
      const Method method = make_method(r.request.method, r.request.threshold);
      const ResultSet result = search(method, query, corpus, r.request.query_file, [&](std::size_t done, std::size_t total) {
        r.done = done;
        r.total = total;
        r.updated_at = utc_now();
        store_.save(r);
      });
      r.timings.compare_seconds = seconds_since(t0);
      r.mean_seconds_per_pair = result.mean_seconds_per_pair;

      t0 = clock::now();
      const SpreadReport spread = spread_report(result, corpus);
      store_.write_artifact(id, "results.json", to_json(result));
      store_.write_artifact(id, "users.json", users_json(spread.users));
      store_.write_artifact(id, "sentiment.json", sentiment_json(spread));
      store_.write_artifact(id, "retweets.json", retweets_json(spread));
      r.timings.analyze_seconds = seconds_since(t0);
      advance(r, JobState::Complete);
    } catch (const std::exception& e) {
      r.reason = e.what();
      if (!is_terminal(r.state)) advance(r, JobState::Failed);
    }
  }

  static void send_json(httplib::Response& res, int status, const nlohmann::json& j) {
    res.status = status;
    res.set_content(j.dump(2), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
  }

  void routes() {
    server_.set_payload_max_length(64u << 20);

    server_.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { res.set_content("ok", "text/plain"); });

    server_.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        auto [job, upload] = parse_request(req);
        const auto id = submit(std::move(job), upload);
        send_json(res, 202, {{"job_id", id}, {"state", state_name(JobState::Queued)}});
      } catch (const RequestError& e) {
        nlohmann::json j{{"error", e.message}};
        if (e.message.find("method") != std::string::npos) j["valid_methods"] = split_methods();
        send_json(res, e.status, j);
      }
    });

    server_.Get("/jobs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      const auto r = store_.load(req.path_params.at("id"));
      if (!r) return send_error(res, 404, "unknown job " + req.path_params.at("id"));
      send_json(res, 200, to_json(*r));
    });

    for (const std::string artifact : {"results", "users", "sentiment", "retweets"}) {
      server_.Get("/jobs/:id/" + artifact, [this, artifact](const httplib::Request& req, httplib::Response& res) {
        const auto& id = req.path_params.at("id");
        const auto r = store_.load(id);
        if (!r) return send_error(res, 404, "unknown job " + id);
        if (r->state != JobState::Complete)
          return send_json(res, 409, {{"error", "job is not complete"}, {"state", state_name(r->state)}});
        const auto body = store_.read_artifact(id, artifact + ".json");
        if (!body) return send_error(res, 500, "missing artifact " + artifact + ".json for job " + id);
        res.status = 200;
        res.set_content(*body, "application/json");
      });
    }

    server_.Get("/images/:sha", [this](const httplib::Request& req, httplib::Response& res) {
      const auto& sha = req.path_params.at("sha");
      if (!is_sha256_hex(sha)) return send_error(res, 404, "not a sha256 digest");
      const auto corpora = store_.root() / "corpora";
      if (fs::is_directory(corpora)) {
        for (const auto& c : fs::directory_iterator(corpora)) {
          for (const char* ext : {".png", ".jpg"}) {
            const auto p = c.path() / "images" / (sha + ext);
            if (fs::is_regular_file(p)) {
              const auto bytes = read_file(p);
              res.set_content(std::string(bytes.begin(), bytes.end()), ext == std::string(".png") ? "image/png" : "image/jpeg");
              return;
            }
          }
        }
      }
      send_error(res, 404, "unknown image " + sha);
    });

    server_.Get("/corpora", [this](const httplib::Request&, httplib::Response& res) { send_json(res, 200, corpora_json()); });
  }

  static nlohmann::json split_methods() {
    nlohmann::json arr = nlohmann::json::array();
    for (auto k : {MethodKind::Histogram, MethodKind::Daisy, MethodKind::Orb, MethodKind::ImprovedOrb, MethodKind::Cnn})
      arr.push_back(std::string(method_name(k)));
    return arr;
  }

  nlohmann::json corpora_json() const {
    nlohmann::json arr = nlohmann::json::array();
    const auto corpora = store_.root() / "corpora";
    if (!fs::is_directory(corpora)) return arr;
    std::vector<fs::path> dirs;
    for (const auto& c : fs::directory_iterator(corpora))
      if (c.is_directory()) dirs.push_back(c.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      std::ifstream in(d / "meta.json");
      if (!in) continue;
      try {
        const auto meta = nlohmann::json::parse(in);
        arr.push_back({{"corpus_id", meta.at("corpus_id")},
                       {"keywords", meta.at("keywords")},
                       {"source", meta.at("source")},
                       {"created_at", meta.at("created_at")},
                       {"image_count", meta.at("images").size()}});
      } catch (const nlohmann::json::exception&) {
      }
    }
    return arr;
  }

  ServiceConfig cfg_;
  JobStore store_;
  std::shared_ptr<const cnn::Model> cnn_model_;
  httplib::Server server_;
  std::thread listener_;
  std::vector<std::thread> workers_;
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<std::string> queue_;
  bool shutting_down_ = false;
  std::mutex corpus_mutexes_guard_;
  std::map<std::string, std::unique_ptr<std::mutex>> corpus_mutexes_;
};

}  // namespace dupscope::service
