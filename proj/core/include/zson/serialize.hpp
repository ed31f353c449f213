#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

namespace zson {

static_assert(std::endian::native == std::endian::little,
              "artifact formats assume a little-endian host");

std::string base64_encode(const uint8_t* data, size_t n);
std::string base64_encode(const std::vector<uint8_t>& data);
// throws ZsonError on malformed input
std::vector<uint8_t> base64_decode(const std::string& s);

// f32 little-endian payloads used by episode/encoder/checkpoint artifacts
std::string floats_to_base64(const std::vector<float>& v);
std::vector<float> base64_to_floats(const std::string& s);

inline uint64_t fnv1a64(const void* data, size_t n,
                        uint64_t h = 0xcbf29ce484222325ull) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

uint64_t fnv1a64_file(const std::string& path);  // throws if unreadable

std::string hex64(uint64_t h);  // 16 lowercase hex digits

// whole-file helpers (binary-exact)
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace zson
