#pragma once

#include <string>
#include <utility>
#include <vector>

namespace commod {

// Run manifest: config snapshot, input digests, seeds, timings, and every
// artifact a command produced. Written as JSON next to the artifacts.
class RunManifest {
 public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  void set_input(const std::string& key, const std::string& path);
  void set_config(const std::string& key, const std::string& value);
  void add_seed(std::uint64_t seed);
  void add_artifact(const std::string& path);
  void add_timing(const std::string& step, double seconds);

  void write(const std::string& path) const;

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> inputs_;   // key -> path:digest
  std::vector<std::pair<std::string, std::string>> config_;
  std::vector<std::uint64_t> seeds_;
  std::vector<std::pair<std::string, std::string>> artifacts_;  // path -> digest
  std::vector<std::pair<std::string, double>> timings_;
};

}  // namespace commod
