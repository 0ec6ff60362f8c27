#pragma once

// Reproducibility manifests. The config hash is SHA-256 over the canonical
// serialization (sorted keys, no whitespace) of the effective config.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "ringlaw/errors.hpp"
#include "ringlaw/rng.hpp"

namespace ringlaw {

inline constexpr const char* kLibraryVersion = "ringlaw 0.1.0";

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

/// nlohmann objects keep keys sorted; dump() without indent has no whitespace.
inline std::string canonical(const nlohmann::json& j) { return j.dump(); }

inline std::string config_hash(const nlohmann::json& cfg) { return sha256_hex(canonical(cfg)); }

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct ExperimentManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string generator_id = kGeneratorId;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::string> outputs;
  nlohmann::json summary = nlohmann::json::object();
  unsigned threads = 1;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    j["seed"] = seed;
    j["generator_id"] = generator_id;
    j["seed_derivation"] = "task k draws from child_seed(seed, k)";
    j["config"] = config;
    j["started"] = utc_timestamp(started);
    j["finished"] = utc_timestamp(finished);
    j["wall_time_s"] = std::chrono::duration<double>(finished - started).count();
    j["outputs"] = outputs;
    j["library_version"] = kLibraryVersion;
    j["threads"] = threads;
    j["summary"] = summary;
    return j;
  }
};

inline bool is_manifest(const nlohmann::json& j) {
  return j.is_object() && j.contains("config") && j.contains("config_hash") && j.contains("generator_id");
}

/// Reads a config file; a manifest yields its echoed config after the hash is checked.
inline nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("", "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (is_manifest(j)) {
    if (config_hash(j["config"]) != j["config_hash"])
      throw ValidationError("/config_hash", "does not match the echoed config");
    return j["config"];
  }
  return j;
}

}  // namespace ringlaw
