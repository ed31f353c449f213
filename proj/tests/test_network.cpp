// Policy network tests. The centerpiece is a finite-difference check of the
// full BPTT backward pass in double precision, including mid-sequence state
// resets. The rest pins softmax/log-prob/entropy math, init structure, and
// the exact-recompute property the ratio-free update relies on.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "zson/network.hpp"
#include "zson/rng.hpp"

using namespace zson;

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

struct Sequence {
  std::vector<std::vector<double>> obs, goal;
  std::vector<int> acts;
  std::vector<char> resets;
};

Sequence make_sequence(int T, uint64_t seed) {
  Sequence s;
  Rng rng(seed);
  s.obs.resize(T);
  s.goal.resize(T);
  s.acts.resize(T);
  s.resets.assign(T, 0);
  s.resets[0] = 1;
  if (T > 4) s.resets[4] = 1;  // mid-sequence episode boundary
  for (int t = 0; t < T; ++t) {
    s.obs[t].resize(8);
    s.goal[t].resize(8);
    for (auto& x : s.obs[t]) x = rng.normal();
    for (auto& x : s.goal[t]) x = rng.normal();
    s.acts[t] = rng.uniform_int(4);
  }
  return s;
}

// sum_t log_prob(a_t) + 0.5 * value_t^2 over the sequence
double loss_of(PolicyNetwork<double>& net, const Sequence& s) {
  auto st = net.initial_state();
  std::vector<double> logits(size_t(net.cfg.n_actions));
  double value = 0, total = 0;
  int prev = kStartActionToken;
  for (size_t t = 0; t < s.acts.size(); ++t) {
    if (s.resets[t]) {
      st.zero();
      prev = kStartActionToken;
    }
    net.forward(s.obs[t].data(), s.goal[t].data(), prev, st, logits.data(),
                &value);
    total += log_prob(logits.data(), int(logits.size()), s.acts[t]) +
             0.5 * value * value;
    prev = s.acts[t];
  }
  return total;
}

void backward_of(PolicyNetwork<double>& net, const Sequence& s) {
  SequenceTape<double> tape;
  std::vector<StepGrad<double>> grads;
  auto st = net.initial_state();
  std::vector<double> logits(4);
  double value;
  int prev = kStartActionToken;
  for (size_t t = 0; t < s.acts.size(); ++t) {
    if (s.resets[t]) {
      st.zero();
      prev = kStartActionToken;
    }
    StepTrace<double> tr;
    net.forward(s.obs[t].data(), s.goal[t].data(), prev, st, logits.data(),
                &value, &tr);
    tr.reset_before = s.resets[t] != 0;
    StepGrad<double> g;
    g.dlogits.resize(4);
    log_prob(logits.data(), 4, s.acts[t], g.dlogits.data());
    g.dvalue = value;  // d(0.5 v^2)/dv
    tape.push_back(std::move(tr));
    grads.push_back(std::move(g));
    prev = s.acts[t];
  }
  net.zero_grad();
  net.backward(tape, grads);
}

}  // namespace

TEST_CASE("backward matches central finite differences everywhere") {
  PolicyNetwork<double> net(small_cfg());
  Rng rng(42);
  net.init(rng);
  Sequence s = make_sequence(7, 43);
  backward_of(net, s);

  const double eps = 1e-6;
  for (auto* p : net.params()) {
    CAPTURE(p->name);
    double worst = 0;
    for (size_t i = 0; i < p->v.size(); ++i) {
      double keep = p->v[i];
      p->v[i] = keep + eps;
      double up = loss_of(net, s);
      p->v[i] = keep - eps;
      double dn = loss_of(net, s);
      p->v[i] = keep;
      double fd = (up - dn) / (2 * eps);
      double an = p->g[i];
      double rel = std::fabs(fd - an) /
                   std::max(1.0, std::max(std::fabs(fd), std::fabs(an)));
      worst = std::max(worst, rel);
    }
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("softmax is translation invariant and normalized") {
  double a[4] = {0.3, -1.2, 2.0, 0.0};
  double b[4] = {100.3, 98.8, 102.0, 100.0};
  double pa[4], pb[4];
  softmax(a, 4, pa);
  softmax(b, 4, pb);
  double sum = 0;
  for (int i = 0; i < 4; ++i) {
    CHECK(pa[i] == doctest::Approx(pb[i]).epsilon(1e-9));
    sum += pa[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_prob agrees with softmax and its gradient is onehot - p") {
  double l[4] = {0.5, -0.7, 1.3, 0.1};
  double p[4], dl[4];
  softmax(l, 4, p);
  for (int a = 0; a < 4; ++a) {
    double lp = log_prob(l, 4, a, dl);
    CHECK(std::exp(lp) == doctest::Approx(p[a]).epsilon(1e-12));
    for (int i = 0; i < 4; ++i)
      CHECK(dl[i] == doctest::Approx((i == a ? 1.0 : 0.0) - p[i]).epsilon(1e-12));
  }
}

TEST_CASE("entropy: uniform maximum, peaked minimum, gradient checks out") {
  double uni[4] = {7.0, 7.0, 7.0, 7.0};
  CHECK(entropy(uni, 4) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  double peak[4] = {50.0, 0.0, 0.0, 0.0};
  CHECK(entropy(peak, 4) < 1e-12);

  double l[4] = {0.4, -0.2, 1.1, 0.0};
  double dl[4];
  entropy(l, 4, dl);
  const double eps = 1e-7;
  for (int i = 0; i < 4; ++i) {
    double keep = l[i];
    l[i] = keep + eps;
    double up = entropy(l, 4);
    l[i] = keep - eps;
    double dn = entropy(l, 4);
    l[i] = keep;
    CHECK(dl[i] == doctest::Approx((up - dn) / (2 * eps)).epsilon(1e-5));
  }
}

TEST_CASE("zeroed state makes episodes order independent") {
  PolicyNetwork<double> net(small_cfg());
  Rng rng(7);
  net.init(rng);
  Sequence a = make_sequence(3, 100);
  Sequence b = make_sequence(3, 200);

  auto run = [&](const Sequence& s, RecurrentState<double>& st) {
    std::vector<double> logits(4);
    double value;
    int prev = kStartActionToken;
    for (size_t t = 0; t < s.acts.size(); ++t) {
      net.forward(s.obs[t].data(), s.goal[t].data(), prev, st, logits.data(),
                  &value);
      prev = s.acts[t];
    }
    return logits;
  };

  auto st_fresh = net.initial_state();
  std::vector<double> fresh = run(b, st_fresh);

  auto st = net.initial_state();
  run(a, st);
  st.zero();  // episode boundary
  std::vector<double> after_reset = run(b, st);

  for (int i = 0; i < 4; ++i) CHECK(fresh[i] == after_reset[i]);  // bitwise
}

TEST_CASE("repeated forward from the same state is bitwise identical") {
  PolicyNetwork<float> net(small_cfg());
  Rng rng(5);
  net.init(rng);
  std::vector<float> obs(8), goal(8);
  Rng data(6);
  for (auto& x : obs) x = float(data.normal());
  for (auto& x : goal) x = float(data.normal());

  auto st1 = net.initial_state();
  auto st2 = net.initial_state();
  std::vector<float> l1(4), l2(4);
  float v1, v2;
  net.forward(obs.data(), goal.data(), kStartActionToken, st1, l1.data(), &v1);
  net.forward(obs.data(), goal.data(), kStartActionToken, st2, l2.data(), &v2);
  CHECK(v1 == v2);
  for (int i = 0; i < 4; ++i) CHECK(l1[i] == l2[i]);
  for (int l = 0; l < 2; ++l)
    for (int j = 0; j < 16; ++j) {
      CHECK(st1.h[l][j] == st2.h[l][j]);
      CHECK(st1.c[l][j] == st2.c[l][j]);
    }
}

TEST_CASE("gradients flow only where the graph connects") {
  PolicyNetwork<double> net(small_cfg());
  Rng rng(9);
  net.init(rng);
  std::vector<double> obs(8, 0.1), goal(8, -0.2), logits(4);
  double value;

  auto one_step = [&](double dvalue, bool with_dlogits) {
    auto st = net.initial_state();
    StepTrace<double> tr;
    net.forward(obs.data(), goal.data(), kStartActionToken, st, logits.data(),
                &value, &tr);
    tr.reset_before = true;
    StepGrad<double> g;
    g.dlogits.assign(4, 0.0);
    if (with_dlogits) log_prob(logits.data(), 4, 2, g.dlogits.data());
    g.dvalue = dvalue;
    net.zero_grad();
    net.backward({tr}, {g});
    return tr;
  };

  SUBCASE("value-only loss leaves the policy head untouched") {
    one_step(1.0, false);
    for (double g : net.pi_w.g) CHECK(g == 0.0);
    for (double g : net.pi_b.g) CHECK(g == 0.0);
    bool any = false;
    for (double g : net.v_w.g) any = any || g != 0.0;
    CHECK(any);
  }

  SUBCASE("policy-only loss leaves the value head untouched") {
    one_step(0.0, true);
    for (double g : net.v_w.g) CHECK(g == 0.0);
    CHECK(net.v_b.g[0] == 0.0);
    bool any = false;
    for (double g : net.pi_w.g) any = any || g != 0.0;
    CHECK(any);
  }

  SUBCASE("only the used previous-action row gets embedding gradient") {
    one_step(1.0, true);  // prev action = start token, row 4
    const int A = net.cfg.act_emb_dim;
    for (int row = 0; row < 4; ++row)
      for (int j = 0; j < A; ++j) CHECK(net.act_emb.g[size_t(row) * A + j] == 0.0);
    bool any = false;
    for (int j = 0; j < A; ++j)
      any = any || net.act_emb.g[size_t(4) * A + j] != 0.0;
    CHECK(any);
  }

  SUBCASE("head weight gradient is the exact outer product") {
    StepTrace<double> tr = one_step(0.0, true);
    StepGrad<double> g;
    g.dlogits.assign(4, 0.0);
    log_prob(tr.logits.data(), 4, 2, g.dlogits.data());
    const auto& top = tr.h_out[1];
    for (int i = 0; i < 16; ++i)
      for (int a = 0; a < 4; ++a)
        CHECK(net.pi_w.g[size_t(i) * 4 + a] == top[i] * g.dlogits[a]);
  }
}

TEST_CASE("init: hidden-to-hidden gate blocks are orthogonal") {
  PolicyNetwork<double> net(small_cfg());
  Rng rng(11);
  net.init(rng);
  const int H = 16;
  for (const auto& layer : net.lstm) {
    for (int gate = 0; gate < 4; ++gate) {
      for (int a = 0; a < H; ++a)
        for (int b = 0; b < H; ++b) {
          double dot = 0;
          for (int i = 0; i < H; ++i)
            dot += layer.w_hh.v[size_t(i) * 4 * H + gate * H + a] *
                   layer.w_hh.v[size_t(i) * 4 * H + gate * H + b];
          CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
        }
    }
  }
}

TEST_CASE("init: forget gate bias is one, all other biases zero") {
  PolicyNetwork<float> net(small_cfg());
  Rng rng(12);
  net.init(rng);
  const int H = 16;
  for (const auto& layer : net.lstm)
    for (int k = 0; k < 4 * H; ++k) {
      float expect = (k >= H && k < 2 * H) ? 1.0f : 0.0f;
      CHECK(layer.b.v[size_t(k)] == expect);
    }
  for (float b : net.obs_b1.v) CHECK(b == 0.0f);
  for (float b : net.obs_b2.v) CHECK(b == 0.0f);
  for (float b : net.pi_b.v) CHECK(b == 0.0f);
  CHECK(net.v_b.v[0] == 0.0f);
}

TEST_CASE("init is deterministic in the seed") {
  PolicyNetwork<float> a(small_cfg()), b(small_cfg()), c(small_cfg());
  Rng r1(33), r2(33), r3(34);
  a.init(r1);
  b.init(r2);
  c.init(r3);
  auto pa = a.params();
  auto pb = b.params();
  auto pc = c.params();
  bool all_equal_ac = true;
  for (size_t k = 0; k < pa.size(); ++k) {
    REQUIRE(pa[k]->v.size() == pb[k]->v.size());
    for (size_t i = 0; i < pa[k]->v.size(); ++i)
      CHECK(pa[k]->v[i] == pb[k]->v[i]);
    for (size_t i = 0; i < pa[k]->v.size(); ++i)
      all_equal_ac = all_equal_ac && pa[k]->v[i] == pc[k]->v[i];
  }
  CHECK_FALSE(all_equal_ac);
}

TEST_CASE("config canonical form round trips and rejects junk") {
  NetConfig cfg = small_cfg();
  NetConfig back = NetConfig::parse_canonical(cfg.canonical());
  CHECK(back == cfg);
  CHECK(back.hash() == cfg.hash());
  CHECK_THROWS_AS(NetConfig::parse_canonical("pi=3"), ZsonError);

  NetConfig bad = cfg;
  bad.rnn_layers = 0;
  CHECK_THROWS_AS(PolicyNetwork<float>{bad}, ConfigError);
}

TEST_CASE("forward rejects malformed inputs") {
  PolicyNetwork<float> net(small_cfg());
  Rng rng(3);
  net.init(rng);
  auto st = net.initial_state();
  std::vector<float> obs(8, 0.f), goal(8, 0.f), logits(4);
  float value;
  CHECK_THROWS_AS(net.forward(obs.data(), goal.data(), 5, st, logits.data(),
                              &value),
                  ZsonError);
  std::vector<float> short_obs(3, 0.f);
  CHECK_THROWS_AS(net.forward(short_obs, goal, 0, st, logits, value),
                  ZsonError);
}
