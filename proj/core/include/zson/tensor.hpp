#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace zson {

// One named parameter block with its gradient. Matrices are row-major
// (rows = fan-in, cols = fan-out), so forward passes stream contiguously.
template <typename S>
struct ParamTensor {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<S> v;  // values
  std::vector<S> g;  // d(loss)/d(value)

  void init_shape(std::string n, int r, int c) {
    name = std::move(n);
    rows = r;
    cols = c;
    v.assign(size_t(r) * size_t(c), S(0));
    g.assign(size_t(r) * size_t(c), S(0));
  }
  size_t size() const { return v.size(); }
  void zero_grad() { std::fill(g.begin(), g.end(), S(0)); }
  bool values_finite() const {
    for (S x : v)
      if (!std::isfinite(double(x))) return false;
    return true;
  }
};

// y += x . W  (W is in x out, row-major; inner loop is contiguous in W)
template <typename S>
inline void matvec_acc(const S* W, const S* x, int in, int out, S* y) {
  for (int i = 0; i < in; ++i) {
    S xi = x[i];
    const S* row = W + size_t(i) * out;
    for (int o = 0; o < out; ++o) y[o] += xi * row[o];
  }
}

// dx[i] += dot(dy, W row i); four accumulators combined in a fixed order so
// results do not depend on how the compiler schedules the loop
template <typename S>
inline void matvec_back_input(const S* W, const S* dy, int in, int out, S* dx) {
  for (int i = 0; i < in; ++i) {
    const S* row = W + size_t(i) * out;
    S a0 = 0, a1 = 0, a2 = 0, a3 = 0;
    int o = 0;
    for (; o + 4 <= out; o += 4) {
      a0 += dy[o] * row[o];
      a1 += dy[o + 1] * row[o + 1];
      a2 += dy[o + 2] * row[o + 2];
      a3 += dy[o + 3] * row[o + 3];
    }
    for (; o < out; ++o) a0 += dy[o] * row[o];
    dx[i] += (a0 + a1) + (a2 + a3);
  }
}

// Wg += outer(x, dy)
template <typename S>
inline void outer_acc(const S* x, const S* dy, int in, int out, S* Wg) {
  for (int i = 0; i < in; ++i) {
    S xi = x[i];
    S* row = Wg + size_t(i) * out;
    for (int o = 0; o < out; ++o) row[o] += xi * dy[o];
  }
}

}  // namespace zson
