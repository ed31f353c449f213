#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace zson {

// Reproducibility record written next to every artifact set. Contains no
// timestamps or host details, so identical runs write identical manifests.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, std::string> inputs;   // path -> content hash
  std::map<std::string, std::string> outputs;  // path relative to out dir -> hash
  std::map<std::string, uint64_t> seeds;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// Hash of a file's bytes, as 16 hex digits.
std::string file_hash_hex(const std::string& path);

// Records the given relative output files (hashing each) and writes
// out_dir/manifest.json.
void write_manifest(const std::string& out_dir, RunManifest m,
                    const std::vector<std::string>& output_files);

}  // namespace zson
