#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowplan/common.hpp"
#include "flowplan/version.hpp"

namespace flowplan {

// Reproducibility record emitted next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a64
  std::map<std::string, std::string> config;         // echoed settings
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  bool has_seed = false;

  void add_input(const std::filesystem::path& path) {
    input_digests[path.string()] = fnv1a64_hex(read_file(path));
  }

  std::string to_json_text() const {
    nlohmann::ordered_json j;
    j["tool"] = "flowplan";
    j["version"] = kVersion;
    j["command"] = command;
    j["argv"] = argv;
    if (has_seed) j["seed"] = seed;
    j["inputs"] = nlohmann::ordered_json::object();
    for (const auto& [p, d] : input_digests) j["inputs"][p] = d;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config) j["config"][k] = v;
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
  }

  void write(const std::filesystem::path& path) const { atomic_write_file(path, to_json_text()); }
};

}  // namespace flowplan
