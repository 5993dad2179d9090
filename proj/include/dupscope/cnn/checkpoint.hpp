#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dupscope/cnn/model.hpp"
#include "dupscope/cnn/train.hpp"

namespace dupscope::cnn {

// Layout: magic, u64 little-endian header length, JSON header, little-endian float32 payload.
inline constexpr char kCheckpointMagic[8] = {'D', 'S', 'C', 'K', 'P', 'T', '1', '\n'};
inline constexpr int kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

struct Checkpoint {
  Model model;
  History history;
};

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"input_size", c.input_size},
          {"filters", c.filters},
          {"strides", c.strides},
          {"pooled", c.pooled},
          {"pooling", c.pooling == PoolKind::Max ? "max" : "average"},
          {"leaky_slope", c.leaky_slope},
          {"batchnorm_eps", c.batchnorm_eps},
          {"batchnorm_momentum", c.batchnorm_momentum}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_size = j.at("input_size");
  c.filters = j.at("filters");
  c.strides = j.at("strides");
  c.pooled = j.at("pooled");
  const std::string pooling = j.at("pooling");
  require(pooling == "max" || pooling == "average", Errc::BadCheckpoint, "unknown pooling '" + pooling + "'");
  c.pooling = pooling == "max" ? PoolKind::Max : PoolKind::Average;
  c.leaky_slope = j.at("leaky_slope");
  c.batchnorm_eps = j.at("batchnorm_eps");
  c.batchnorm_momentum = j.at("batchnorm_momentum");
  return c;
}

inline nlohmann::json history_to_json(const History& h) {
  auto arr = nlohmann::json::array();
  for (const auto& e : h) arr.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
  return arr;
}

inline History history_from_json(const nlohmann::json& j) {
  History h;
  for (const auto& e : j) h.push_back({e.at("epoch"), e.at("loss"), e.at("accuracy")});
  return h;
}

/// Written to a temporary sibling and renamed into place.
inline void save_checkpoint(const std::filesystem::path& path, const Model& model, const History& history = {}) {
  nlohmann::json groups = nlohmann::json::array(), buffers = nlohmann::json::array();
  std::vector<float> payload;
  for (const auto& p : model.params()) {
    groups.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", payload.size()}});
    payload.insert(payload.end(), p.value.begin(), p.value.end());
  }
  for (int l = 0; l < kConvLayers; ++l) {
    const auto& rm = model.running_mean()[static_cast<std::size_t>(l)];
    const auto& rv = model.running_var()[static_cast<std::size_t>(l)];
    if (rm.empty()) continue;
    const std::string id = "bn" + std::to_string(l + 1);
    buffers.push_back({{"name", id + ".running_mean"}, {"size", rm.size()}, {"offset", payload.size()}});
    payload.insert(payload.end(), rm.begin(), rm.end());
    buffers.push_back({{"name", id + ".running_var"}, {"size", rv.size()}, {"offset", payload.size()}});
    payload.insert(payload.end(), rv.begin(), rv.end());
  }
  const nlohmann::json header{{"version", kCheckpointVersion},
                              {"config", config_to_json(model.config())},
                              {"groups", groups},
                              {"buffers", buffers},
                              {"history", history_to_json(history)},
                              {"payload_floats", payload.size()}};
  const std::string text = header.dump();
  const std::uint64_t len = text.size();

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::IoError, "cannot write checkpoint " + tmp.string());
    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) fail(Errc::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot read checkpoint " + path.string());
  char magic[sizeof kCheckpointMagic];
  in.read(magic, sizeof magic);
  require(in && std::memcmp(magic, kCheckpointMagic, sizeof magic) == 0, Errc::BadCheckpoint,
          path.string() + " is not a dupscope checkpoint");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  require(in && len > 0 && len < (1u << 30), Errc::BadCheckpoint, "corrupt checkpoint header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), Errc::BadCheckpoint, "truncated checkpoint header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::BadCheckpoint, std::string("unparseable checkpoint header: ") + e.what());
  }
  require(header.value("version", 0) == kCheckpointVersion, Errc::BadCheckpoint, "unsupported checkpoint version");

  const std::size_t count = header.at("payload_floats");
  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(count * sizeof(float)));
  require(static_cast<bool>(in), Errc::BadCheckpoint, "truncated checkpoint payload");

  Checkpoint ck{Model(config_from_json(header.at("config"))), history_from_json(header.at("history"))};
  auto& params = ck.model.params();
  const auto& groups = header.at("groups");
  require(groups.size() == params.size(), Errc::BadCheckpoint, "parameter group count does not match the config");
  for (std::size_t g = 0; g < params.size(); ++g) {
    const auto& j = groups[g];
    require(j.at("name") == params[g].name, Errc::BadCheckpoint, "unexpected parameter group " + j.at("name").get<std::string>());
    require(j.at("shape").get<std::vector<std::size_t>>() == params[g].shape, Errc::BadCheckpoint,
            "shape mismatch for " + params[g].name);
    const std::size_t off = j.at("offset");
    require(off + params[g].value.size() <= payload.size(), Errc::BadCheckpoint, "payload too short for " + params[g].name);
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), params[g].value.size(), params[g].value.begin());
  }
  for (const auto& b : header.at("buffers")) {
    const std::string name = b.at("name");
    const auto dot = name.find('.');
    require(name.rfind("bn", 0) == 0 && dot != std::string::npos, Errc::BadCheckpoint, "bad buffer name " + name);
    const int layer = std::stoi(name.substr(2, dot - 2)) - 1;
    require(layer >= 0 && layer < kConvLayers, Errc::BadCheckpoint, "bad buffer layer in " + name);
    auto& dst = name.substr(dot + 1) == "running_mean" ? ck.model.running_mean()[static_cast<std::size_t>(layer)]
                                                       : ck.model.running_var()[static_cast<std::size_t>(layer)];
    const std::size_t size = b.at("size"), off = b.at("offset");
    require(size == dst.size() && off + size <= payload.size(), Errc::BadCheckpoint, "buffer size mismatch for " + name);
    std::copy_n(payload.begin() + static_cast<std::ptrdiff_t>(off), size, dst.begin());
  }
  return ck;
}

}  // namespace dupscope::cnn
