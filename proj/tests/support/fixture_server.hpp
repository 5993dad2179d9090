#pragma once

// In-process HTTP feed: NDJSON post pages with cursor pagination plus image downloads.

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dupscope/util/http.hpp"
#include <nlohmann/json.hpp>

namespace dupscope::testkit {

class FixtureServer {
 public:
  FixtureServer() {
    server_.Get("/feed", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex_);
      ++feed_requests_;
      std::size_t start = 0;
      if (req.has_param("cursor")) start = std::stoul(req.get_param_value("cursor").substr(1));
      std::string body;
      const std::size_t end = std::min(lines_.size(), start + page_size_);
      for (std::size_t i = start; i < end; ++i) body += lines_[i] + "\n";
      if (end < lines_.size()) res.set_header("X-Next-Cursor", "p" + std::to_string(end));
      res.set_content(body, "application/x-ndjson");
    });
    server_.Get("/img/:name", [this](const httplib::Request& req, httplib::Response& res) {
      std::this_thread::sleep_for(image_delay_.load());
      std::lock_guard lock(mutex_);
      ++image_requests_[req.path_params.at("name")];
      const auto it = images_.find(req.path_params.at("name"));
      if (it == images_.end()) {
        res.status = 404;
        return;
      }
      res.set_content(it->second, "application/octet-stream");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;
  ~FixtureServer() {
    server_.stop();
    thread_.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string feed_url() const { return base() + "/feed"; }
  std::string image_url(const std::string& name) const { return base() + "/img/" + name; }

  void add_image(const std::string& name, const std::vector<std::uint8_t>& bytes) {
    std::lock_guard lock(mutex_);
    images_[name] = std::string(bytes.begin(), bytes.end());
  }
  void add_line(const std::string& line) {
    std::lock_guard lock(mutex_);
    lines_.push_back(line);
  }
  void add_post(const nlohmann::json& post) { add_line(post.dump()); }
  void set_page_size(std::size_t n) { page_size_ = n; }
  void set_image_delay(std::chrono::milliseconds d) { image_delay_ = d; }

  int feed_requests() const {
    std::lock_guard lock(mutex_);
    return feed_requests_;
  }
  int image_requests(const std::string& name) const {
    std::lock_guard lock(mutex_);
    const auto it = image_requests_.find(name);
    return it == image_requests_.end() ? 0 : it->second;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
  std::map<std::string, std::string> images_;
  std::map<std::string, int> image_requests_;
  std::size_t page_size_ = 7;
  std::atomic<std::chrono::milliseconds> image_delay_{std::chrono::milliseconds(0)};
  int feed_requests_ = 0;
};

/// Feed record with the given fields and a derived author profile.
inline nlohmann::json make_post(const std::string& id, const std::string& text, const std::string& user, bool retweet,
                                const std::vector<std::string>& image_urls) {
  return {{"post_id", id},
          {"text", text},
          {"created_at", "2018-05-01T12:00:00Z"},
          {"is_retweet", retweet},
          {"image_urls", image_urls},
          {"author",
           {{"username", user},
            {"display_name", "Display " + user},
            {"description", "about " + user},
            {"location", "Delhi"},
            {"profile_image_url", "http://example.invalid/" + user + ".png"},
            {"profile_url", "http://example.invalid/" + user}}}};
}

}  // namespace dupscope::testkit
