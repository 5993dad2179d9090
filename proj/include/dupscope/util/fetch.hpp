#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dupscope/util/http.hpp"

#include "dupscope/codec.hpp"
#include "dupscope/error.hpp"

namespace dupscope {

struct Url {
  std::string scheme;  // "http" or "file"
  std::string host;    // "host[:port]" for http
  std::string path;    // path plus query for http; filesystem path for file
};

/// Accepts http://host[:port]/path?query and file:///abs/path (or file://relative).
inline Url parse_url(const std::string& url) {
  const auto sep = url.find("://");
  require(sep != std::string::npos, Errc::InvalidArgument, "not a URL: " + url);
  Url u;
  u.scheme = url.substr(0, sep);
  const std::string rest = url.substr(sep + 3);
  if (u.scheme == "file") {
    u.path = rest;
    require(!u.path.empty(), Errc::InvalidArgument, "empty file URL: " + url);
    return u;
  }
  require(u.scheme == "http", Errc::InvalidArgument, "unsupported URL scheme '" + u.scheme + "' in " + url);
  const auto slash = rest.find('/');
  u.host = rest.substr(0, slash);
  u.path = slash == std::string::npos ? "/" : rest.substr(slash);
  require(!u.host.empty(), Errc::InvalidArgument, "URL has no host: " + url);
  return u;
}

struct HttpResponse {
  int status = 0;
  std::string body;
  std::multimap<std::string, std::string> headers;

  std::string header(const std::string& key) const {
    for (const auto& [k, v] : headers)
      if (k.size() == key.size() && std::equal(k.begin(), k.end(), key.begin(), [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
          }))
        return v;
    return {};
  }
};

inline HttpResponse http_get(const std::string& url, int timeout_seconds = 10) {
  const Url u = parse_url(url);
  require(u.scheme == "http", Errc::InvalidArgument, "http_get needs an http:// URL: " + url);
  httplib::Client client("http://" + u.host);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  auto res = client.Get(u.path);
  if (!res) fail(Errc::SourceUnreachable, url + ": " + httplib::to_string(res.error()));
  HttpResponse out;
  out.status = res->status;
  out.body = std::move(res->body);
  for (const auto& [k, v] : res->headers) out.headers.emplace(k, v);
  return out;
}

/// Fetches the bytes behind an http:// or file:// URL; failures raise FetchFailed.
inline std::vector<std::uint8_t> fetch_bytes(const std::string& url, int timeout_seconds = 10) {
  Url u;
  try {
    u = parse_url(url);
  } catch (const Error& e) {
    fail(Errc::FetchFailed, e.what());
  }
  if (u.scheme == "file") {
    try {
      return read_file(u.path);
    } catch (const Error& e) {
      fail(Errc::FetchFailed, url + ": " + e.what());
    }
  }
  HttpResponse res;
  try {
    res = http_get(url, timeout_seconds);
  } catch (const Error& e) {
    fail(Errc::FetchFailed, e.what());
  }
  require(res.status == 200, Errc::FetchFailed, url + ": HTTP status " + std::to_string(res.status));
  return {res.body.begin(), res.body.end()};
}

}  // namespace dupscope
