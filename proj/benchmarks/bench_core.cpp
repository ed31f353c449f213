#include <benchmark/benchmark.h>

#include "zson/embedding.hpp"
#include "zson/network.hpp"
#include "zson/sensing.hpp"
#include "zson/world.hpp"
#include "zson/worldgen.hpp"

using namespace zson;

namespace {

GridWorld make_world(uint64_t seed, int size) {
  WorldGenParams p;
  p.width = size;
  p.height = size;
  return generate_world(seed, p);
}

void BM_WorldGen(benchmark::State& state) {
  WorldGenParams p;
  p.width = int(state.range(0));
  p.height = int(state.range(0));
  uint64_t seed = 1;
  for (auto _ : state) {
    GridWorld w = generate_world(seed++, p);
    benchmark::DoNotOptimize(w.occupancy.data());
  }
}
BENCHMARK(BM_WorldGen)->Arg(16)->Arg(32);

void BM_DistanceField(benchmark::State& state) {
  GridWorld w = make_world(3, int(state.range(0)));
  Vec2 goal = w.cell_center(w.height / 2, w.width / 2);
  if (w.blocked(w.height / 2, w.width / 2))
    for (int r = 0; r < w.height; ++r)
      for (int c = 0; c < w.width; ++c)
        if (!w.blocked(r, c)) goal = w.cell_center(r, c);
  for (auto _ : state) {
    DistanceField f = compute_distance_field(w, goal);
    benchmark::DoNotOptimize(f.dist.data());
  }
}
BENCHMARK(BM_DistanceField)->Arg(16)->Arg(32);

void BM_Observe(benchmark::State& state) {
  GridWorld w = make_world(3, 16);
  auto vocab = ConceptVocabulary::defaults();
  KinematicsConfig kin;
  AgentPose pose;
  for (int r = 0; r < w.height && pose.position.x == 0.0; ++r)
    for (int c = 0; c < w.width; ++c)
      if (!w.blocked(r, c)) {
        pose.position = w.cell_center(r, c);
        break;
      }
  for (auto _ : state) {
    ObservationFeature f = observe(w, pose, kin, vocab);
    benchmark::DoNotOptimize(f.values.data());
  }
}
BENCHMARK(BM_Observe);

void BM_EncodeView(benchmark::State& state) {
  auto vocab = ConceptVocabulary::defaults();
  EncoderParams enc = EncoderParams::create(vocab, 64, 1, 0.1);
  ConceptBag bag;
  bag.add("sink");
  bag.add("stove");
  bag.add("kitchen");
  uint64_t noise_seed = 9;
  for (auto _ : state) {
    SemanticGoal g = encode_image_view(bag, enc, noise_seed++);
    benchmark::DoNotOptimize(g.v.data());
  }
}
BENCHMARK(BM_EncodeView);

void BM_PolicyForward(benchmark::State& state) {
  NetConfig cfg;
  cfg.obs_dim = 122;
  cfg.goal_dim = 64;
  cfg.rnn_hidden = int(state.range(0));
  cfg.obs_hidden = int(state.range(0));
  PolicyNetwork<float> net(cfg);
  Rng rng(7);
  net.init(rng);
  std::vector<float> obs(size_t(cfg.obs_dim)), goal(size_t(cfg.goal_dim));
  for (auto& x : obs) x = float(rng.uniform01());
  for (auto& x : goal) x = float(rng.uniform01());
  auto st = net.initial_state();
  std::vector<float> logits(size_t(cfg.n_actions));
  float value = 0.0f;
  for (auto _ : state) {
    net.forward(obs.data(), goal.data(), 0, st, logits.data(), &value);
    benchmark::DoNotOptimize(value);
  }
}
BENCHMARK(BM_PolicyForward)->Arg(64)->Arg(128);

void BM_PolicyBackward(benchmark::State& state) {
  NetConfig cfg;
  cfg.obs_dim = 122;
  cfg.goal_dim = 64;
  cfg.rnn_hidden = int(state.range(0));
  cfg.obs_hidden = int(state.range(0));
  PolicyNetwork<float> net(cfg);
  Rng rng(7);
  net.init(rng);
  std::vector<float> obs(size_t(cfg.obs_dim)), goal(size_t(cfg.goal_dim));
  for (auto& x : obs) x = float(rng.uniform01());
  for (auto& x : goal) x = float(rng.uniform01());
  const int T = 16;
  for (auto _ : state) {
    auto st = net.initial_state();
    SequenceTape<float> tape(T);
    std::vector<StepGrad<float>> grads(T);
    std::vector<float> logits(size_t(cfg.n_actions));
    float value = 0.0f;
    for (int t = 0; t < T; ++t) {
      net.forward(obs.data(), goal.data(), 0, st, logits.data(), &value,
                  &tape[size_t(t)]);
      grads[size_t(t)].dlogits.assign(size_t(cfg.n_actions), 0.1f);
      grads[size_t(t)].dvalue = 0.1f;
    }
    net.zero_grad();
    net.backward(tape, grads);
    benchmark::DoNotOptimize(net.pi_w.g.data());
  }
}
BENCHMARK(BM_PolicyBackward)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
