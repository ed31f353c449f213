#include "zson/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "zson/errors.hpp"

namespace zson {

namespace {

void put_u32(std::ostream& os, uint32_t x) { os.write(reinterpret_cast<const char*>(&x), 4); }
void put_u64(std::ostream& os, uint64_t x) { os.write(reinterpret_cast<const char*>(&x), 8); }
void put_i64(std::ostream& os, int64_t x) { os.write(reinterpret_cast<const char*>(&x), 8); }
void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, uint32_t(s.size()));
  os.write(s.data(), std::streamsize(s.size()));
}
void put_floats(std::ostream& os, const float* p, size_t n) {
  os.write(reinterpret_cast<const char*>(p), std::streamsize(n * 4));
}

struct Reader {
  std::ifstream is;
  std::string path;
  explicit Reader(const std::string& p) : is(p, std::ios::binary), path(p) {
    if (!is) throw ZsonError("cannot open checkpoint: " + p);
  }
  void bytes(void* dst, size_t n) {
    is.read(reinterpret_cast<char*>(dst), std::streamsize(n));
    if (is.gcount() != std::streamsize(n))
      throw ZsonError("truncated checkpoint: " + path);
  }
  uint32_t u32() { uint32_t x; bytes(&x, 4); return x; }
  uint64_t u64() { uint64_t x; bytes(&x, 8); return x; }
  int64_t i64() { int64_t x; bytes(&x, 8); return x; }
  std::string str() {
    uint32_t n = u32();
    if (n > (1u << 20)) throw ZsonError("corrupt checkpoint string length: " + path);
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void floats(float* p, size_t n) { bytes(p, n * 4); }
  uint8_t u8() { uint8_t x; bytes(&x, 1); return x; }
};

void read_header(Reader& r, NetConfig& cfg) {
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw ZsonError("not a checkpoint file: " + r.path);
  uint32_t ver = r.u32();
  if (ver != kCheckpointVersion)
    throw ZsonError("unsupported checkpoint version " + std::to_string(ver) +
                    " in " + r.path);
  uint64_t stored_hash = r.u64();
  std::string canonical = r.str();
  cfg = NetConfig::parse_canonical(canonical);
  if (cfg.hash() != stored_hash)
    throw ZsonError("checkpoint header hash does not match its config: " + r.path);
}

void read_body(Reader& r, PolicyNetwork<float>& net, AdamState* adam,
               bool* had_adam, TrainProgress* progress) {
  auto ps = net.params();
  uint32_t n_blocks = r.u32();
  if (n_blocks != ps.size())
    throw ZsonError("checkpoint has " + std::to_string(n_blocks) +
                    " parameter blocks, network expects " +
                    std::to_string(ps.size()));
  for (auto* p : ps) {
    std::string name = r.str();
    uint64_t count = r.u64();
    if (name != p->name || count != p->size())
      throw ZsonError("checkpoint block '" + name + "' (" +
                      std::to_string(count) + " values) does not match '" +
                      p->name + "' (" + std::to_string(p->size()) + ")");
    r.floats(p->v.data(), p->size());
  }
  uint8_t has_opt = r.u8();
  if (has_opt) {
    AdamState st;
    st.t = r.i64();
    for (auto* p : ps) {
      st.m.emplace_back(p->size());
      r.floats(st.m.back().data(), p->size());
    }
    for (auto* p : ps) {
      st.v.emplace_back(p->size());
      r.floats(st.v.back().data(), p->size());
    }
    if (adam) *adam = std::move(st);
    if (had_adam) *had_adam = true;
  } else {
    if (had_adam) *had_adam = false;
  }
  TrainProgress pr;
  pr.env_steps = r.i64();
  pr.updates = r.i64();
  if (progress) *progress = pr;
}

}  // namespace

void save_checkpoint(const std::string& path, PolicyNetwork<float>& net,
                     const AdamState* adam, const TrainProgress* progress) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ZsonError("cannot write checkpoint: " + tmp);
    os.write(kCheckpointMagic, 8);
    put_u32(os, kCheckpointVersion);
    put_u64(os, net.cfg.hash());
    put_str(os, net.cfg.canonical());
    auto ps = net.params();
    put_u32(os, uint32_t(ps.size()));
    for (auto* p : ps) {
      put_str(os, p->name);
      put_u64(os, p->size());
      put_floats(os, p->v.data(), p->size());
    }
    if (adam && !adam->empty()) {
      if (adam->m.size() != ps.size())
        throw ZsonError("optimizer state does not match network parameters");
      os.put(char(1));
      put_i64(os, adam->t);
      for (const auto& m : adam->m) put_floats(os, m.data(), m.size());
      for (const auto& v : adam->v) put_floats(os, v.data(), v.size());
    } else {
      os.put(char(0));
    }
    TrainProgress pr = progress ? *progress : TrainProgress{};
    put_i64(os, pr.env_steps);
    put_i64(os, pr.updates);
    if (!os) throw ZsonError("write failed for checkpoint: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ZsonError("cannot move checkpoint into place: " + path +
                          " (" + ec.message() + ")");
}

void load_checkpoint(const std::string& path, PolicyNetwork<float>& net,
                     AdamState* adam, TrainProgress* progress) {
  Reader r(path);
  NetConfig stored;
  read_header(r, stored);
  if (!(stored == net.cfg))
    throw ZsonError("checkpoint architecture mismatch: file has [" +
                    stored.canonical() + "], network is [" +
                    net.cfg.canonical() + "]");
  read_body(r, net, adam, nullptr, progress);
}

LoadedCheckpoint load_checkpoint_auto(const std::string& path) {
  Reader r(path);
  LoadedCheckpoint out;
  read_header(r, out.cfg);
  out.net = std::make_unique<PolicyNetwork<float>>(out.cfg);
  read_body(r, *out.net, &out.adam, &out.has_adam, &out.progress);
  return out;
}

NetConfig peek_checkpoint_config(const std::string& path) {
  Reader r(path);
  NetConfig cfg;
  read_header(r, cfg);
  return cfg;
}

}  // namespace zson
