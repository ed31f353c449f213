#include "zson/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "zson/errors.hpp"

namespace zson {

namespace {
constexpr char kAlphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char ch) {
  if (ch >= 'A' && ch <= 'Z') return ch - 'A';
  if (ch >= 'a' && ch <= 'z') return ch - 'a' + 26;
  if (ch >= '0' && ch <= '9') return ch - '0' + 52;
  if (ch == '+') return 62;
  if (ch == '/') return 63;
  return -1;
}
}  // namespace

std::string base64_encode(const uint8_t* data, size_t n) {
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= n; i += 3) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8 |
                 uint32_t(data[i + 2]);
    out.push_back(kAlphabet[v >> 18]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i + 1 == n) {
    uint32_t v = uint32_t(data[i]) << 16;
    out.push_back(kAlphabet[v >> 18]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (i + 2 == n) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8;
    out.push_back(kAlphabet[v >> 18]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string base64_encode(const std::vector<uint8_t>& data) {
  return base64_encode(data.data(), data.size());
}

std::vector<uint8_t> base64_decode(const std::string& s) {
  if (s.size() % 4 != 0) throw ZsonError("base64: length not a multiple of 4");
  std::vector<uint8_t> out;
  out.reserve(s.size() / 4 * 3);
  for (size_t i = 0; i < s.size(); i += 4) {
    int pad = 0;
    uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      char ch = s[i + k];
      if (ch == '=') {
        if (i + 4 != s.size() || k < 2) throw ZsonError("base64: stray padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw ZsonError("base64: data after padding");
      int d = decode_char(ch);
      if (d < 0) throw ZsonError(std::string("base64: bad character '") + ch + "'");
      v = v << 6 | uint32_t(d);
    }
    out.push_back(uint8_t(v >> 16));
    if (pad < 2) out.push_back(uint8_t(v >> 8));
    if (pad < 1) out.push_back(uint8_t(v));
  }
  return out;
}

std::string floats_to_base64(const std::vector<float>& v) {
  return base64_encode(reinterpret_cast<const uint8_t*>(v.data()),
                       v.size() * sizeof(float));
}

std::vector<float> base64_to_floats(const std::string& s) {
  std::vector<uint8_t> bytes = base64_decode(s);
  if (bytes.size() % sizeof(float) != 0)
    throw ZsonError("base64: payload size not a multiple of 4 bytes");
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

uint64_t fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ZsonError("cannot open file for hashing: " + path);
  uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a64(buf, size_t(in.gcount()), h);
  }
  return h;
}

std::string hex64(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return std::string(buf);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ZsonError("cannot open file: " + path);
  std::string out((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ZsonError("cannot open file for writing: " + path);
  out.write(content.data(), std::streamsize(content.size()));
  if (!out) throw ZsonError("short write: " + path);
}

}  // namespace zson
