#include "zson/manifest.hpp"

#include "zson/errors.hpp"
#include "zson/serialize.hpp"
#include "zson/version.hpp"

namespace zson {

using nlohmann::json;

std::string file_hash_hex(const std::string& path) {
  return hex64(fnv1a64_file(path));
}

json RunManifest::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tool_version"] = kVersion;
  j["command"] = command;
  j["args"] = args;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  json s = json::object();
  for (const auto& [k, v] : seeds) s[k] = v;
  j["seeds"] = s;
  j["extra"] = extra;
  return j;
}

void write_manifest(const std::string& out_dir, RunManifest m,
                    const std::vector<std::string>& output_files) {
  for (const auto& rel : output_files)
    m.outputs[rel] = file_hash_hex(out_dir + "/" + rel);
  write_text_file(out_dir + "/manifest.json", m.to_json().dump(2) + "\n");
}

}  // namespace zson
