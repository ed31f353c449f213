// Checkpoint tests: bit-exact round trips for weights, optimizer state, and
// progress counters, plus corruption and mismatch handling.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "zson/checkpoint.hpp"

using namespace zson;
namespace fs = std::filesystem;

namespace {

NetConfig small_cfg() {
  NetConfig cfg;
  cfg.obs_dim = 8;
  cfg.goal_dim = 8;
  cfg.obs_hidden = 16;
  cfg.rnn_hidden = 16;
  cfg.act_emb_dim = 8;
  cfg.rnn_layers = 2;
  return cfg;
}

PolicyNetwork<float> make_net(uint64_t seed) {
  PolicyNetwork<float> net(small_cfg());
  Rng rng(seed);
  net.init(rng);
  return net;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "zson_ckpt_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<float> forward_once(PolicyNetwork<float>& net) {
  std::vector<float> obs(8), goal(8), logits(4);
  Rng data(99);
  for (auto& x : obs) x = float(data.normal());
  for (auto& x : goal) x = float(data.normal());
  auto st = net.initial_state();
  float value;
  net.forward(obs.data(), goal.data(), kStartActionToken, st, logits.data(),
              &value);
  logits.push_back(value);
  return logits;
}

}  // namespace

TEST_CASE("weights round trip bit for bit") {
  PolicyNetwork<float> net = make_net(1);
  fs::path path = scratch("weights.bin");
  save_checkpoint(path.string(), net);

  PolicyNetwork<float> back = make_net(2);  // different init, same shape
  load_checkpoint(path.string(), back);

  auto pa = net.params();
  auto pb = back.params();
  for (size_t k = 0; k < pa.size(); ++k) {
    REQUIRE(pa[k]->v.size() == pb[k]->v.size());
    for (size_t i = 0; i < pa[k]->v.size(); ++i)
      CHECK(pa[k]->v[i] == pb[k]->v[i]);
  }
  CHECK(forward_once(net) == forward_once(back));
  fs::remove(path);
}

TEST_CASE("optimizer state and progress round trip") {
  PolicyNetwork<float> net = make_net(3);
  AdamState adam;
  for (auto* p : net.params())
    for (size_t i = 0; i < p->g.size(); ++i) p->g[i] = 0.01f * float(i % 7) - 0.02f;
  adam_step(net, adam, AdamConfig{});
  adam_step(net, adam, AdamConfig{});
  TrainProgress prog{12345, 67};

  fs::path path = scratch("full.bin");
  save_checkpoint(path.string(), net, &adam, &prog);

  PolicyNetwork<float> back = make_net(4);
  AdamState adam2;
  TrainProgress prog2;
  load_checkpoint(path.string(), back, &adam2, &prog2);

  CHECK(adam2.t == adam.t);
  REQUIRE(adam2.m.size() == adam.m.size());
  for (size_t k = 0; k < adam.m.size(); ++k) {
    CHECK(adam2.m[k] == adam.m[k]);
    CHECK(adam2.v[k] == adam.v[k]);
  }
  CHECK(prog2.env_steps == 12345);
  CHECK(prog2.updates == 67);
  fs::remove(path);
}

TEST_CASE("auto-load rebuilds the stored architecture") {
  PolicyNetwork<float> net = make_net(5);
  AdamState adam;
  net.zero_grad();
  adam_step(net, adam, AdamConfig{});
  TrainProgress prog{500, 2};
  fs::path path = scratch("auto.bin");
  save_checkpoint(path.string(), net, &adam, &prog);

  LoadedCheckpoint lc = load_checkpoint_auto(path.string());
  CHECK(lc.cfg == net.cfg);
  CHECK(lc.has_adam);
  CHECK(lc.adam.t == 1);
  CHECK(lc.progress.env_steps == 500);
  CHECK(lc.progress.updates == 2);
  REQUIRE(lc.net != nullptr);
  CHECK(forward_once(*lc.net) == forward_once(net));
  fs::remove(path);
}

TEST_CASE("weights-only checkpoint reports no optimizer state") {
  PolicyNetwork<float> net = make_net(6);
  fs::path path = scratch("bare.bin");
  save_checkpoint(path.string(), net);
  LoadedCheckpoint lc = load_checkpoint_auto(path.string());
  CHECK_FALSE(lc.has_adam);
  CHECK(lc.progress.env_steps == 0);
  fs::remove(path);
}

TEST_CASE("peek reads the architecture without a network") {
  PolicyNetwork<float> net = make_net(7);
  fs::path path = scratch("peek.bin");
  save_checkpoint(path.string(), net);
  NetConfig cfg = peek_checkpoint_config(path.string());
  CHECK(cfg == net.cfg);
  fs::remove(path);
}

TEST_CASE("architecture mismatch is a named error") {
  PolicyNetwork<float> net = make_net(8);
  fs::path path = scratch("mismatch.bin");
  save_checkpoint(path.string(), net);

  NetConfig other = small_cfg();
  other.rnn_hidden = 32;
  PolicyNetwork<float> wrong(other);
  Rng rng(9);
  wrong.init(rng);
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string(), wrong),
                       doctest::Contains("architecture mismatch"), ZsonError);
  fs::remove(path);
}

TEST_CASE("garbage and truncated files are rejected") {
  fs::path bad = scratch("bad.bin");
  {
    std::ofstream out(bad, std::ios::binary);
    out << "GARBAGE!danger";
  }
  PolicyNetwork<float> net = make_net(10);
  CHECK_THROWS_WITH_AS(load_checkpoint(bad.string(), net),
                       doctest::Contains("not a checkpoint file"), ZsonError);

  fs::path good = scratch("good.bin");
  save_checkpoint(good.string(), net);
  fs::path cut = scratch("cut.bin");
  {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(cut.string(), net), ZsonError);

  CHECK_THROWS_WITH_AS(load_checkpoint(scratch("absent.bin").string(), net),
                       doctest::Contains("cannot open checkpoint"), ZsonError);
  fs::remove(bad);
  fs::remove(good);
  fs::remove(cut);
}

TEST_CASE("saving leaves no temp files and overwrites atomically") {
  fs::path dir = fs::temp_directory_path() / "zson_ckpt_atomic";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::path path = dir / "ck.bin";

  PolicyNetwork<float> a = make_net(11);
  save_checkpoint(path.string(), a);
  PolicyNetwork<float> b = make_net(12);
  save_checkpoint(path.string(), b);  // overwrite in place

  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);  // no stray temp file

  PolicyNetwork<float> back = make_net(13);
  load_checkpoint(path.string(), back);
  CHECK(forward_once(back) == forward_once(b));
  fs::remove_all(dir);
}
