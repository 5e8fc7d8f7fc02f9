#include "commod/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "commod/util.hpp"

namespace commod {

std::string digest_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for digest");
  std::ostringstream ss;
  ss << in.rdbuf();
  return digest_hex(fnv1a64(ss.str()));
}

void RunManifest::set_input(const std::string& key, const std::string& path) {
  inputs_.emplace_back(key, path + ":" + file_digest_hex(path));
}

void RunManifest::set_config(const std::string& key, const std::string& value) {
  config_.emplace_back(key, value);
}

void RunManifest::add_seed(std::uint64_t seed) { seeds_.push_back(seed); }

void RunManifest::add_artifact(const std::string& path) {
  artifacts_.emplace_back(path, file_digest_hex(path));
}

void RunManifest::add_timing(const std::string& step, double seconds) {
  timings_.emplace_back(step, seconds);
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["command"] = command_;
  for (const auto& [k, v] : inputs_) j["inputs"][k] = v;
  for (const auto& [k, v] : config_) j["config"][k] = v;
  j["seeds"] = seeds_;
  nlohmann::json arts = nlohmann::json::array();
  for (const auto& [p, digest] : artifacts_) {
    arts.push_back({{"path", p}, {"digest", digest}});
  }
  j["artifacts"] = arts;
  for (const auto& [k, v] : timings_) j["timings_seconds"][k] = v;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

}  // namespace commod
