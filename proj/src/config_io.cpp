#include "dragonfly/config_io.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "dragonfly/error.hpp"
#include "json.hpp"

namespace dragonfly {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

json grids_to_json(const std::vector<GridSpec>& grids) {
  json arr = json::array();
  for (const auto& g : grids) arr.push_back({g.cols, g.rows});
  return arr;
}

std::vector<GridSpec> grids_from_json(const json& j, const char* key) {
  if (!j.is_array()) config_error(std::string(key) + " must be a list of [cols, rows] pairs");
  std::vector<GridSpec> out;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
      config_error(std::string(key) + " entries must be [cols, rows] with non-negative integers");
    }
    out.push_back({pair[0].get<std::uint32_t>(), pair[1].get<std::uint32_t>()});
  }
  return out;
}

ChannelStats stats_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) config_error(std::string(key) + " must have 3 numbers");
  ChannelStats s{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!j[i].is_number()) config_error(std::string(key) + " must have 3 numbers");
    s[i] = j[i].get<float>();
  }
  return s;
}

std::uint32_t u32_from_json(const json& j, const char* key) {
  if (!j.is_number_unsigned() || j.get<std::uint64_t>() > 0xFFFFFFFFull) {
    config_error(std::string(key) + " must be a non-negative 32-bit integer");
  }
  return j.get<std::uint32_t>();
}

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["resolution"] = c.resolution;
  j["patch_size"] = c.patch_size;
  j["medium_grids"] = grids_to_json(c.medium_grids);
  j["high_grids"] = grids_to_json(c.high_grids);
  j["pool_stride"] = c.pool_stride;
  j["encoder_dim"] = c.encoder_dim;
  j["projection_dim"] = c.projection_dim;
  j["mean"] = c.mean;
  j["std"] = c.std;
  j["separator_policy"] = std::string(to_string(c.separator_policy));
  j["separator_value"] = c.separator_value;
  j["seed"] = c.seed;
  j["projection"] = c.projection;
  return j.dump();
}

PipelineConfig parse_config_json(std::string_view text, const PipelineConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  PipelineConfig c = base;
  for (const auto& [key, value] : j.items()) {
    if (key == "resolution") c.resolution = u32_from_json(value, "resolution");
    else if (key == "patch_size") c.patch_size = u32_from_json(value, "patch_size");
    else if (key == "pool_stride") c.pool_stride = u32_from_json(value, "pool_stride");
    else if (key == "encoder_dim") c.encoder_dim = u32_from_json(value, "encoder_dim");
    else if (key == "projection_dim") c.projection_dim = u32_from_json(value, "projection_dim");
    else if (key == "medium_grids") c.medium_grids = grids_from_json(value, "medium_grids");
    else if (key == "high_grids") c.high_grids = grids_from_json(value, "high_grids");
    else if (key == "mean") c.mean = stats_from_json(value, "mean");
    else if (key == "std") c.std = stats_from_json(value, "std");
    else if (key == "separator_policy") {
      if (!value.is_string()) config_error("separator_policy must be a string");
      c.separator_policy = parse_separator_policy(value.get<std::string>());
    } else if (key == "separator_value") {
      if (!value.is_number()) config_error("separator_value must be a number");
      c.separator_value = value.get<float>();
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) config_error("seed must be a non-negative integer");
      c.seed = value.get<std::uint64_t>();
    } else if (key == "projection") {
      if (!value.is_string()) config_error("projection must be a string");
      c.projection = value.get<std::string>();
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  return c;
}

PipelineConfig load_config_file(const std::filesystem::path& path, const PipelineConfig& base) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str(), base);
}

std::string config_digest(const PipelineConfig& config) {
  const std::string canonical = config_to_json(config);
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::ConfigError, "digest computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 0xF]);
  }
  return hex;
}

}  // namespace dragonfly
