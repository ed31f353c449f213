#pragma once

// Independent reference implementations used to cross-check the library.
// Deliberately naive: correctness over speed, no shared code with core/.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "zson/world.hpp"

namespace oracle {

// Shortest path over the 8-connected free-cell graph by exhaustive
// relaxation (Bellman-Ford style). Costs are tracked as exact
// (straight, diagonal) step-count pairs and compared without rounding:
// s1 + d1*sqrt(2) < s2 + d2*sqrt(2) is decided in integer arithmetic,
// which is possible because sqrt(2) is irrational.
struct CellCost {
  int64_t s = -1;  // straight steps, -1 = unreachable
  int64_t d = 0;   // diagonal steps
};

inline bool cost_less(int64_t s1, int64_t d1, int64_t s2, int64_t d2) {
  // s1 + d1*r < s2 + d2*r  with  r = sqrt(2)
  //   <=>  (s1 - s2) < (d2 - d1)*r
  int64_t a = s1 - s2;       // integer side
  int64_t b = d2 - d1;       // coefficient of r
  if (b == 0) return a < 0;
  if (b > 0) {
    if (a < 0) return true;
    return a * a < 2 * b * b;  // both sides nonnegative
  }
  if (a >= 0) return false;
  return a * a > 2 * b * b;  // both negative: flip
}

inline std::vector<CellCost> dijkstra_cells(const zson::GridWorld& w, int sr,
                                            int sc) {
  const int H = w.height, W = w.width;
  std::vector<CellCost> cost(size_t(H) * W);
  if (w.blocked(sr, sc)) return cost;
  cost[size_t(sr) * W + sc] = {0, 0};

  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        const CellCost& from = cost[size_t(r) * W + c];
        if (from.s < 0) continue;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            int nr = r + dr, nc = c + dc;
            if (w.blocked(nr, nc)) continue;
            bool diag = dr != 0 && dc != 0;
            int64_t ns = from.s + (diag ? 0 : 1);
            int64_t nd = from.d + (diag ? 1 : 0);
            CellCost& to = cost[size_t(nr) * W + nc];
            if (to.s < 0 || cost_less(ns, nd, to.s, to.d)) {
              to = {ns, nd};
              changed = true;
            }
          }
        }
      }
    }
  }
  return cost;
}

// Same conversion formula as the library so agreeing step counts give
// bitwise-equal doubles.
inline double cost_to_meters(const CellCost& c, double cell_size) {
  if (c.s < 0) return std::numeric_limits<double>::infinity();
  return double(c.s) * cell_size + double(c.d) * (cell_size * std::sqrt(2.0));
}

inline double geodesic(const zson::GridWorld& w, zson::Vec2 from,
                       zson::Vec2 to) {
  auto cost = dijkstra_cells(w, w.cell_row(from.y), w.cell_col(from.x));
  return cost_to_meters(cost[size_t(w.cell_row(to.y)) * w.width +
                             w.cell_col(to.x)],
                        w.cell_size);
}

// Build a world from ASCII art rows ('#' = wall, '.' = free), one room
// covering all free cells. Handy for hand-checkable layouts.
inline zson::GridWorld ascii_world(const std::vector<std::string>& rows,
                                   double cell_size = 0.25,
                                   const std::string& room = "hallway") {
  zson::GridWorld w;
  w.id = "wtest";
  w.cell_size = cell_size;
  w.height = int(rows.size());
  w.width = int(rows[0].size());
  w.occupancy.assign(size_t(w.height) * w.width, 1);
  zson::Room r;
  r.room_concept = room;
  for (int i = 0; i < w.height; ++i) {
    for (int j = 0; j < w.width; ++j) {
      if (rows[size_t(i)][size_t(j)] == '.') {
        w.occupancy[size_t(i) * w.width + j] = 0;
        r.cells.push_back({i, j});
      }
    }
  }
  w.rooms.push_back(std::move(r));
  w.rebuild_cell_index();
  return w;
}

}  // namespace oracle
