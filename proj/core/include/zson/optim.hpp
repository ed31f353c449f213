#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "zson/errors.hpp"
#include "zson/tensor.hpp"

namespace zson {

struct AdamConfig {
  float lr = 2.25e-4f;
  float weight_decay = 1e-6f;
  float eps = 1e-5f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
};

// First/second moment buffers, one pair per parameter tensor, in the same
// order as the network's parameter registry.
struct AdamState {
  int64_t t = 0;
  std::vector<std::vector<float>> m, v;

  template <typename Net>
  void init_like(Net& net) {
    t = 0;
    m.clear();
    v.clear();
    for (auto* p : net.params()) {
      m.emplace_back(p->size(), 0.0f);
      v.emplace_back(p->size(), 0.0f);
    }
  }
  bool empty() const { return m.empty(); }
};

// Global L2 norm over every gradient entry, accumulated in double.
template <typename Net>
inline double global_grad_norm(Net& net) {
  double acc = 0.0;
  for (auto* p : net.params())
    for (auto g : p->g) acc += double(g) * double(g);
  return std::sqrt(acc);
}

// Rescales all gradients so their global norm is at most max_norm.
// Returns the norm before clipping.
template <typename Net>
inline double clip_grad_norm(Net& net, double max_norm) {
  double norm = global_grad_norm(net);
  if (norm > max_norm && norm > 0.0) {
    float scale = float(max_norm / norm);
    for (auto* p : net.params())
      for (auto& g : p->g) g *= scale;
  }
  return norm;
}

// One Adam update. Weight decay is added to the gradient (L2 style), moments
// are kept in float, bias-correction factors computed in double.
template <typename Net>
inline void adam_step(Net& net, AdamState& st, const AdamConfig& cfg) {
  auto ps = net.params();
  if (st.empty()) st.init_like(net);
  if (st.m.size() != ps.size())
    throw ZsonError("optimizer state does not match network parameters");
  st.t += 1;
  double bc1 = 1.0 - std::pow(double(cfg.beta1), double(st.t));
  double bc2 = 1.0 - std::pow(double(cfg.beta2), double(st.t));
  float step_size = float(double(cfg.lr) / bc1);
  float bc2_inv_sqrt = float(1.0 / std::sqrt(bc2));
  for (size_t k = 0; k < ps.size(); ++k) {
    auto& p = *ps[k];
    if (st.m[k].size() != p.size())
      throw ZsonError("optimizer state shape mismatch for " + p.name);
    float* m = st.m[k].data();
    float* v = st.v[k].data();
    for (size_t i = 0; i < p.size(); ++i) {
      float g = float(p.g[i]) + cfg.weight_decay * float(p.v[i]);
      m[i] = cfg.beta1 * m[i] + (1.0f - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0f - cfg.beta2) * g * g;
      float denom = std::sqrt(v[i]) * bc2_inv_sqrt + cfg.eps;
      p.v[i] = float(p.v[i]) - step_size * m[i] / denom;
    }
  }
}

}  // namespace zson
