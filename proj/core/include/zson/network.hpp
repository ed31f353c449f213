#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "zson/errors.hpp"
#include "zson/rng.hpp"
#include "zson/serialize.hpp"
#include "zson/tensor.hpp"

namespace zson {

// Index fed to the previous-action embedding on the first step of an episode,
// when no real action has been taken yet.
inline constexpr int kStartActionToken = 4;

struct NetConfig {
  int obs_dim = 0;
  int goal_dim = 64;
  int obs_hidden = 128;
  int rnn_hidden = 128;
  int act_emb_dim = 32;
  int n_actions = 4;
  int rnn_layers = 2;

  void validate() const {
    if (obs_dim < 1 || goal_dim < 1 || obs_hidden < 1 || rnn_hidden < 1 ||
        act_emb_dim < 1 || rnn_layers < 1)
      throw ConfigError("network dimensions must be positive");
    if (n_actions < 2) throw ConfigError("need at least two actions");
  }

  int rnn_input_dim(int layer) const {
    return layer == 0 ? obs_hidden + goal_dim + act_emb_dim : rnn_hidden;
  }

  // Stable key=value form, stored in checkpoints and parsed back when loading.
  std::string canonical() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "obs_dim=%d goal_dim=%d obs_hidden=%d rnn_hidden=%d "
                  "act_emb_dim=%d n_actions=%d rnn_layers=%d",
                  obs_dim, goal_dim, obs_hidden, rnn_hidden, act_emb_dim,
                  n_actions, rnn_layers);
    return buf;
  }

  static NetConfig parse_canonical(const std::string& text) {
    NetConfig cfg;
    int got = std::sscanf(text.c_str(),
                          "obs_dim=%d goal_dim=%d obs_hidden=%d rnn_hidden=%d "
                          "act_emb_dim=%d n_actions=%d rnn_layers=%d",
                          &cfg.obs_dim, &cfg.goal_dim, &cfg.obs_hidden,
                          &cfg.rnn_hidden, &cfg.act_emb_dim, &cfg.n_actions,
                          &cfg.rnn_layers);
    if (got != 7) throw ZsonError("unparseable network config: " + text);
    cfg.validate();
    return cfg;
  }

  uint64_t hash() const { return fnv1a64(canonical()); }
  bool operator==(const NetConfig&) const = default;
};

template <typename S>
struct RecurrentState {
  std::vector<std::vector<S>> h, c;  // [layer][hidden]

  static RecurrentState zeros(int layers, int hidden) {
    RecurrentState st;
    st.h.assign(layers, std::vector<S>(hidden, S(0)));
    st.c.assign(layers, std::vector<S>(hidden, S(0)));
    return st;
  }
  void zero() {
    for (auto& x : h) std::fill(x.begin(), x.end(), S(0));
    for (auto& x : c) std::fill(x.begin(), x.end(), S(0));
  }
};

// Everything the backward pass needs about one forward step. `gates` holds the
// post-nonlinearity activations packed [i f g o], 4*hidden per layer.
template <typename S>
struct StepTrace {
  std::vector<S> obs, goal;
  int prev_action = 0;
  bool reset_before = false;  // recurrent state was zeroed before this step
  std::vector<S> x1, x2;      // obs MLP activations (post-tanh)
  std::vector<std::vector<S>> h_prev, c_prev, gates, tanh_c, h_out;
  std::vector<S> logits;
  S value = S(0);
};

template <typename S>
using SequenceTape = std::vector<StepTrace<S>>;

// Upstream gradient for one step: d(loss)/d(logits) and d(loss)/d(value).
template <typename S>
struct StepGrad {
  std::vector<S> dlogits;
  S dvalue = S(0);
};

// probs[i] = softmax(logits)[i], computed with the usual max shift
template <typename S>
inline void softmax(const S* logits, int n, S* probs) {
  S m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  S sum = S(0);
  for (int i = 0; i < n; ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (int i = 0; i < n; ++i) probs[i] /= sum;
}

// Returns log softmax(logits)[action]. If dlogits is given it is OVERWRITTEN
// with the gradient of the returned value: onehot(action) - softmax(logits).
template <typename S>
inline S log_prob(const S* logits, int n, int action, S* dlogits = nullptr) {
  S m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  S sum = S(0);
  for (int i = 0; i < n; ++i) sum += std::exp(logits[i] - m);
  S lse = std::log(sum) + m;
  if (dlogits) {
    for (int i = 0; i < n; ++i) dlogits[i] = -std::exp(logits[i] - lse);
    dlogits[action] += S(1);
  }
  return logits[action] - lse;
}

// Returns the entropy of softmax(logits). If dlogits is given it is
// OVERWRITTEN with dH/dlogits[j] = -p_j * (log p_j + H).
template <typename S>
inline S entropy(const S* logits, int n, S* dlogits = nullptr) {
  S m = logits[0];
  for (int i = 1; i < n; ++i) m = std::max(m, logits[i]);
  S sum = S(0);
  for (int i = 0; i < n; ++i) sum += std::exp(logits[i] - m);
  S lse = std::log(sum) + m;
  S ent = S(0);
  for (int i = 0; i < n; ++i) {
    S lp = logits[i] - lse;
    ent -= std::exp(lp) * lp;
  }
  if (dlogits)
    for (int i = 0; i < n; ++i) {
      S lp = logits[i] - lse;
      dlogits[i] = -std::exp(lp) * (lp + ent);
    }
  return ent;
}

namespace detail {

// Q factor of a Gaussian matrix via Householder QR, with column signs fixed so
// the implied R has positive diagonal. Done in double regardless of S.
inline std::vector<double> random_orthogonal(int n, Rng& rng) {
  std::vector<double> R(size_t(n) * n);
  for (auto& x : R) x = rng.normal();
  std::vector<std::vector<double>> vs(n);
  for (int k = 0; k < n; ++k) {
    double nx = 0;
    for (int i = k; i < n; ++i) nx += R[size_t(i) * n + k] * R[size_t(i) * n + k];
    nx = std::sqrt(nx);
    if (nx == 0) continue;
    double alpha = R[size_t(k) * n + k] > 0 ? -nx : nx;
    std::vector<double> v(n, 0.0);
    v[k] = R[size_t(k) * n + k] - alpha;
    for (int i = k + 1; i < n; ++i) v[i] = R[size_t(i) * n + k];
    double vn2 = 0;
    for (int i = k; i < n; ++i) vn2 += v[i] * v[i];
    if (vn2 == 0) continue;
    for (int j = k; j < n; ++j) {
      double dot = 0;
      for (int i = k; i < n; ++i) dot += v[i] * R[size_t(i) * n + j];
      double f = 2.0 * dot / vn2;
      for (int i = k; i < n; ++i) R[size_t(i) * n + j] -= f * v[i];
    }
    vs[k] = std::move(v);
  }
  std::vector<double> Q(size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) Q[size_t(i) * n + i] = 1.0;
  for (int k = n - 1; k >= 0; --k) {
    const auto& v = vs[k];
    if (v.empty()) continue;
    double vn2 = 0;
    for (int i = k; i < n; ++i) vn2 += v[i] * v[i];
    for (int j = 0; j < n; ++j) {
      double dot = 0;
      for (int i = k; i < n; ++i) dot += v[i] * Q[size_t(i) * n + j];
      double f = 2.0 * dot / vn2;
      for (int i = k; i < n; ++i) Q[size_t(i) * n + j] -= f * v[i];
    }
  }
  for (int k = 0; k < n; ++k)
    if (R[size_t(k) * n + k] < 0)
      for (int i = 0; i < n; ++i) Q[size_t(i) * n + k] = -Q[size_t(i) * n + k];
  return Q;
}

}  // namespace detail

// Recurrent actor-critic:
//   obs -> 2-layer tanh MLP, concat with goal embedding and an embedding of
//   the previous action, through a stacked LSTM, then linear policy logits
//   and a linear value head off the top hidden state.
// Templated on the scalar so the same arithmetic runs in float for training
// and double for finite-difference checks.
template <typename S>
class PolicyNetwork {
 public:
  NetConfig cfg;
  ParamTensor<S> obs_w1, obs_b1, obs_w2, obs_b2;
  ParamTensor<S> act_emb;  // (n_actions + 1) x act_emb_dim, last row = start token
  struct LstmLayer {
    ParamTensor<S> w_ih, w_hh, b;
  };
  std::vector<LstmLayer> lstm;
  ParamTensor<S> pi_w, pi_b, v_w, v_b;

  explicit PolicyNetwork(const NetConfig& c) : cfg(c) {
    cfg.validate();
    obs_w1.init_shape("obs.w1", cfg.obs_dim, cfg.obs_hidden);
    obs_b1.init_shape("obs.b1", 1, cfg.obs_hidden);
    obs_w2.init_shape("obs.w2", cfg.obs_hidden, cfg.obs_hidden);
    obs_b2.init_shape("obs.b2", 1, cfg.obs_hidden);
    act_emb.init_shape("act_emb", cfg.n_actions + 1, cfg.act_emb_dim);
    lstm.resize(cfg.rnn_layers);
    for (int l = 0; l < cfg.rnn_layers; ++l) {
      std::string p = "lstm" + std::to_string(l) + ".";
      lstm[l].w_ih.init_shape(p + "w_ih", cfg.rnn_input_dim(l), 4 * cfg.rnn_hidden);
      lstm[l].w_hh.init_shape(p + "w_hh", cfg.rnn_hidden, 4 * cfg.rnn_hidden);
      lstm[l].b.init_shape(p + "b", 1, 4 * cfg.rnn_hidden);
    }
    pi_w.init_shape("pi.w", cfg.rnn_hidden, cfg.n_actions);
    pi_b.init_shape("pi.b", 1, cfg.n_actions);
    v_w.init_shape("v.w", cfg.rnn_hidden, 1);
    v_b.init_shape("v.b", 1, 1);
  }

  // Registry in a fixed order; defines both the init draw order and the
  // checkpoint block order.
  std::vector<ParamTensor<S>*> params() {
    std::vector<ParamTensor<S>*> ps{&obs_w1, &obs_b1, &obs_w2, &obs_b2, &act_emb};
    for (auto& l : lstm) {
      ps.push_back(&l.w_ih);
      ps.push_back(&l.w_hh);
      ps.push_back(&l.b);
    }
    ps.push_back(&pi_w);
    ps.push_back(&pi_b);
    ps.push_back(&v_w);
    ps.push_back(&v_b);
    return ps;
  }
  std::vector<const ParamTensor<S>*> params() const {
    auto ps = const_cast<PolicyNetwork*>(this)->params();
    return {ps.begin(), ps.end()};
  }

  size_t param_count() const {
    size_t n = 0;
    for (auto* p : params()) n += p->size();
    return n;
  }

  void zero_grad() {
    for (auto* p : params()) p->zero_grad();
  }

  // Glorot-uniform dense weights, orthogonal hidden-to-hidden blocks (one per
  // gate), zero biases except the forget gate's, which starts at 1.
  void init(Rng& rng) {
    glorot(obs_w1, rng);
    glorot(obs_w2, rng);
    glorot(act_emb, rng);
    for (auto& l : lstm) {
      glorot(l.w_ih, rng);
      const int H = cfg.rnn_hidden;
      for (int gate = 0; gate < 4; ++gate) {
        auto Q = detail::random_orthogonal(H, rng);
        for (int i = 0; i < H; ++i)
          for (int j = 0; j < H; ++j)
            l.w_hh.v[size_t(i) * 4 * H + gate * H + j] = S(Q[size_t(i) * H + j]);
      }
      for (int j = 0; j < H; ++j) l.b.v[H + j] = S(1);  // forget gate
    }
    glorot(pi_w, rng);
    glorot(v_w, rng);
  }

  RecurrentState<S> initial_state() const {
    return RecurrentState<S>::zeros(cfg.rnn_layers, cfg.rnn_hidden);
  }

  // Single step. `state` is advanced in place. Pass `tr` to record the
  // activations needed by backward(); the same code runs either way, so a
  // recomputed forward reproduces the sampled log-probs bit for bit.
  void forward(const S* obs, const S* goal, int prev_action,
               RecurrentState<S>& state, S* logits_out, S* value_out,
               StepTrace<S>* tr = nullptr) const {
    const int Ho = cfg.obs_hidden, H = cfg.rnn_hidden, A = cfg.act_emb_dim;
    const int G = cfg.goal_dim, NA = cfg.n_actions, D = cfg.obs_dim;
    if (prev_action < 0 || prev_action > cfg.n_actions)
      throw ZsonError("previous action index out of range");

    std::vector<S> x1(obs_b1.v), x2(obs_b2.v);
    matvec_acc(obs_w1.v.data(), obs, D, Ho, x1.data());
    for (auto& t : x1) t = std::tanh(t);
    matvec_acc(obs_w2.v.data(), x1.data(), Ho, Ho, x2.data());
    for (auto& t : x2) t = std::tanh(t);

    std::vector<S> u(size_t(Ho) + G + A);
    std::copy(x2.begin(), x2.end(), u.begin());
    std::copy(goal, goal + G, u.begin() + Ho);
    const S* emb = act_emb.v.data() + size_t(prev_action) * A;
    std::copy(emb, emb + A, u.begin() + Ho + G);

    if (tr) {
      tr->obs.assign(obs, obs + D);
      tr->goal.assign(goal, goal + G);
      tr->prev_action = prev_action;
      tr->x1 = x1;
      tr->x2 = x2;
      tr->h_prev.resize(cfg.rnn_layers);
      tr->c_prev.resize(cfg.rnn_layers);
      tr->gates.resize(cfg.rnn_layers);
      tr->tanh_c.resize(cfg.rnn_layers);
      tr->h_out.resize(cfg.rnn_layers);
    }

    const std::vector<S>* in_vec = &u;
    for (int l = 0; l < cfg.rnn_layers; ++l) {
      const int in = cfg.rnn_input_dim(l);
      std::vector<S> gates(lstm[l].b.v);
      matvec_acc(lstm[l].w_ih.v.data(), in_vec->data(), in, 4 * H, gates.data());
      matvec_acc(lstm[l].w_hh.v.data(), state.h[l].data(), H, 4 * H, gates.data());
      if (tr) {
        tr->h_prev[l] = state.h[l];
        tr->c_prev[l] = state.c[l];
      }
      std::vector<S> tanh_c(H);
      for (int j = 0; j < H; ++j) {
        S gi = sigmoid(gates[j]);
        S gf = sigmoid(gates[H + j]);
        S gg = std::tanh(gates[2 * H + j]);
        S go = sigmoid(gates[3 * H + j]);
        gates[j] = gi;
        gates[H + j] = gf;
        gates[2 * H + j] = gg;
        gates[3 * H + j] = go;
        S cn = gf * state.c[l][j] + gi * gg;
        state.c[l][j] = cn;
        tanh_c[j] = std::tanh(cn);
        state.h[l][j] = go * tanh_c[j];
      }
      if (tr) {
        tr->gates[l] = std::move(gates);
        tr->tanh_c[l] = std::move(tanh_c);
        tr->h_out[l] = state.h[l];
      }
      in_vec = &state.h[l];
    }

    const std::vector<S>& top = state.h[cfg.rnn_layers - 1];
    std::vector<S> logits(pi_b.v);
    matvec_acc(pi_w.v.data(), top.data(), H, NA, logits.data());
    S value = v_b.v[0];
    for (int j = 0; j < H; ++j) value += top[j] * v_w.v[j];

    if (logits_out) std::copy(logits.begin(), logits.end(), logits_out);
    if (value_out) *value_out = value;
    if (tr) {
      tr->logits = std::move(logits);
      tr->value = value;
    }
  }

  // Convenience wrapper with size checking.
  void forward(const std::vector<S>& obs, const std::vector<S>& goal,
               int prev_action, RecurrentState<S>& state,
               std::vector<S>& logits_out, S& value_out,
               StepTrace<S>* tr = nullptr) const {
    if ((int)obs.size() != cfg.obs_dim)
      throw ZsonError("observation size " + std::to_string(obs.size()) +
                      " does not match network input " +
                      std::to_string(cfg.obs_dim));
    if ((int)goal.size() != cfg.goal_dim)
      throw ZsonError("goal embedding size " + std::to_string(goal.size()) +
                      " does not match network input " +
                      std::to_string(cfg.goal_dim));
    logits_out.resize(cfg.n_actions);
    forward(obs.data(), goal.data(), prev_action, state, logits_out.data(),
            &value_out, tr);
  }

  // Truncated BPTT over one recorded sequence. `grads` supplies
  // d(loss)/d(logits) and d(loss)/d(value) per step; gradients accumulate
  // into the .g buffers. Steps flagged reset_before cut the recurrence.
  void backward(const SequenceTape<S>& tape, const std::vector<StepGrad<S>>& grads) {
    if (tape.empty()) throw ZsonError("backward called with no recorded forward steps");
    if (grads.size() != tape.size())
      throw ZsonError("per-step gradient count does not match tape length");
    const int Ho = cfg.obs_hidden, H = cfg.rnn_hidden, A = cfg.act_emb_dim;
    const int G = cfg.goal_dim, NA = cfg.n_actions, D = cfg.obs_dim;
    const int L = cfg.rnn_layers;

    std::vector<std::vector<S>> dh_carry(L, std::vector<S>(H, S(0)));
    std::vector<std::vector<S>> dc_carry(L, std::vector<S>(H, S(0)));
    std::vector<S> dG(4 * H), dct(H), dx_below;

    for (int t = int(tape.size()) - 1; t >= 0; --t) {
      const StepTrace<S>& tr = tape[t];
      if ((int)tr.logits.size() != NA)
        throw ZsonError("malformed step trace");
      const std::vector<S>& dlogits = grads[t].dlogits;
      if ((int)dlogits.size() != NA)
        throw ZsonError("logit gradient has wrong size");
      S dvalue = grads[t].dvalue;

      // heads feed the top layer's dh
      std::vector<S>& dh_top = dh_carry[L - 1];
      matvec_back_input(pi_w.v.data(), dlogits.data(), H, NA, dh_top.data());
      outer_acc(tr.h_out[L - 1].data(), dlogits.data(), H, NA, pi_w.g.data());
      for (int a = 0; a < NA; ++a) pi_b.g[a] += dlogits[a];
      for (int j = 0; j < H; ++j) {
        dh_top[j] += dvalue * v_w.v[j];
        v_w.g[j] += dvalue * tr.h_out[L - 1][j];
      }
      v_b.g[0] += dvalue;

      for (int l = L - 1; l >= 0; --l) {
        const std::vector<S>& dh = dh_carry[l];
        const S* gi = tr.gates[l].data();
        const S* gf = gi + H;
        const S* gg = gi + 2 * H;
        const S* go = gi + 3 * H;
        for (int j = 0; j < H; ++j) {
          S dhj = dh[j];
          dct[j] = dc_carry[l][j] +
                   dhj * go[j] * (S(1) - tr.tanh_c[l][j] * tr.tanh_c[l][j]);
          S d_i = dct[j] * gg[j];
          S d_f = dct[j] * tr.c_prev[l][j];
          S d_g = dct[j] * gi[j];
          S d_o = dhj * tr.tanh_c[l][j];
          dG[j] = d_i * gi[j] * (S(1) - gi[j]);
          dG[H + j] = d_f * gf[j] * (S(1) - gf[j]);
          dG[2 * H + j] = d_g * (S(1) - gg[j] * gg[j]);
          dG[3 * H + j] = d_o * go[j] * (S(1) - go[j]);
        }
        for (int k = 0; k < 4 * H; ++k) lstm[l].b.g[k] += dG[k];

        const int in = cfg.rnn_input_dim(l);
        std::vector<S> input_l;
        const S* input_ptr;
        if (l == 0) {
          input_l.resize(size_t(Ho) + G + A);
          std::copy(tr.x2.begin(), tr.x2.end(), input_l.begin());
          std::copy(tr.goal.begin(), tr.goal.end(), input_l.begin() + Ho);
          const S* emb = act_emb.v.data() + size_t(tr.prev_action) * A;
          std::copy(emb, emb + A, input_l.begin() + Ho + G);
          input_ptr = input_l.data();
        } else {
          input_ptr = tr.h_out[l - 1].data();
        }
        outer_acc(input_ptr, dG.data(), in, 4 * H, lstm[l].w_ih.g.data());
        outer_acc(tr.h_prev[l].data(), dG.data(), H, 4 * H, lstm[l].w_hh.g.data());

        dx_below.assign(in, S(0));
        matvec_back_input(lstm[l].w_ih.v.data(), dG.data(), in, 4 * H,
                          dx_below.data());
        // carries for step t-1
        std::fill(dh_carry[l].begin(), dh_carry[l].end(), S(0));
        matvec_back_input(lstm[l].w_hh.v.data(), dG.data(), H, 4 * H,
                          dh_carry[l].data());
        for (int j = 0; j < H; ++j) dc_carry[l][j] = dct[j] * gf[j];

        if (l > 0) {
          for (int j = 0; j < H; ++j) dh_carry[l - 1][j] += dx_below[j];
        } else {
          // split dx_below into obs MLP, goal (dropped: it is an input), and
          // the previous-action embedding row
          std::vector<S> dm2(dx_below.begin(), dx_below.begin() + Ho);
          for (int j = 0; j < Ho; ++j)
            dm2[j] *= (S(1) - tr.x2[j] * tr.x2[j]);
          for (int j = 0; j < Ho; ++j) obs_b2.g[j] += dm2[j];
          outer_acc(tr.x1.data(), dm2.data(), Ho, Ho, obs_w2.g.data());
          std::vector<S> dm1(Ho, S(0));
          matvec_back_input(obs_w2.v.data(), dm2.data(), Ho, Ho, dm1.data());
          for (int j = 0; j < Ho; ++j)
            dm1[j] *= (S(1) - tr.x1[j] * tr.x1[j]);
          for (int j = 0; j < Ho; ++j) obs_b1.g[j] += dm1[j];
          outer_acc(tr.obs.data(), dm1.data(), D, Ho, obs_w1.g.data());
          S* emb_g = act_emb.g.data() + size_t(tr.prev_action) * A;
          for (int j = 0; j < A; ++j) emb_g[j] += dx_below[size_t(Ho) + G + j];
        }
      }

      // fresh state before this step: nothing flows to earlier steps
      if (tr.reset_before)
        for (int l = 0; l < L; ++l) {
          std::fill(dh_carry[l].begin(), dh_carry[l].end(), S(0));
          std::fill(dc_carry[l].begin(), dc_carry[l].end(), S(0));
        }
    }
  }

 private:
  static S sigmoid(S x) { return S(1) / (S(1) + std::exp(-x)); }

  void glorot(ParamTensor<S>& p, Rng& rng) {
    double a = std::sqrt(6.0 / (double(p.rows) + double(p.cols)));
    for (auto& x : p.v) x = S(rng.uniform(-a, a));
  }
};

}  // namespace zson
