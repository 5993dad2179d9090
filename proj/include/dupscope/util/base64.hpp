#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "dupscope/error.hpp"

namespace dupscope {

/// Standard alphabet with padding; whitespace is ignored.
inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  require(s.size() % 4 == 0, Errc::InvalidArgument, "base64 length must be a multiple of 4");
  if (s.empty()) return {};
  std::vector<std::uint8_t> out(s.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(s.data()), static_cast<int>(s.size()));
  require(n >= 0, Errc::InvalidArgument, "invalid base64 payload");
  std::size_t pad = 0;
  if (s.back() == '=') ++pad;
  if (s.size() >= 2 && s[s.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  if (bytes.empty()) return {};
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace dupscope
