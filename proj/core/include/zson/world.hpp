#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zson/geometry.hpp"
#include "zson/vocab.hpp"

namespace zson {

enum class Action : int {
  MOVE_FORWARD = 0,
  TURN_LEFT = 1,
  TURN_RIGHT = 2,
  STOP = 3,
};
constexpr int kNumActions = 4;
const char* action_name(Action a);

struct Room {
  std::string room_concept;
  std::vector<std::pair<int, int>> cells;  // (row, col), sorted
};

struct ObjectInstance {
  std::string object_concept;
  Vec2 position;  // meters
  std::string room_concept;
};

struct AgentPose {
  Vec2 position;    // meters
  int heading = 0;  // degrees, multiple of turn_angle, in [0, 360)
};

struct KinematicsConfig {
  double step_size = 0.25;     // meters per MOVE_FORWARD
  int turn_angle = 30;         // degrees per TURN_LEFT / TURN_RIGHT
  double success_radius = 1.0; // meters
  int hfov = 90;               // degrees
  double view_range = 5.0;     // meters
  int n_view_bins = 9;
};

struct GridWorld {
  std::string id;
  double cell_size = 0.25;
  int height = 0;
  int width = 0;
  std::vector<uint8_t> occupancy;  // row-major, 1 = blocked
  std::vector<Room> rooms;
  std::vector<ObjectInstance> objects;
  uint64_t rng_seed = 0;

  // derived: room index per cell (-1 for blocked / unassigned), rebuilt by
  // rebuild_cell_index() after construction or load
  std::vector<int16_t> room_of_cell;

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < height && c >= 0 && c < width;
  }
  bool blocked(int r, int c) const {
    return !in_bounds(r, c) || occupancy[size_t(r) * width + c] != 0;
  }
  int cell_row(double y) const { return int(std::floor(y / cell_size)); }
  int cell_col(double x) const { return int(std::floor(x / cell_size)); }
  Vec2 cell_center(int r, int c) const {
    return {(c + 0.5) * cell_size, (r + 0.5) * cell_size};
  }
  bool in_free_cell(Vec2 p) const {
    return !blocked(cell_row(p.y), cell_col(p.x));
  }
  int room_index_at(Vec2 p) const {
    int r = cell_row(p.y), c = cell_col(p.x);
    if (!in_bounds(r, c)) return -1;
    return room_of_cell.empty() ? -1 : room_of_cell[size_t(r) * width + c];
  }
  void rebuild_cell_index();
};

// Turns always succeed; STOP is the identity; MOVE_FORWARD translates
// step_size along the heading unless the destination cell is blocked or off
// the grid, in which case the pose is unchanged and collided = true.
std::pair<AgentPose, bool> step_action(const GridWorld& w, const AgentPose& pose,
                                       Action a, const KinematicsConfig& cfg);

// Shortest-path cost from one source cell to every free cell over the
// 8-connected free-cell graph. Axis steps cost cell_size, diagonal steps
// cell_size*sqrt(2). Costs are tracked as exact (straight, diagonal) step
// counts and converted once through a single formula, so any two runs agree
// bitwise and equal-cost paths cannot disagree in the last ulp.
struct DistanceField {
  int height = 0;
  int width = 0;
  std::vector<double> dist;  // +infinity where unreachable

  double at(int r, int c) const { return dist[size_t(r) * width + c]; }
  double at_pos(const GridWorld& w, Vec2 p) const {
    return at(w.cell_row(p.y), w.cell_col(p.x));
  }
};

DistanceField compute_distance_field(const GridWorld& w, Vec2 from);
DistanceField compute_distance_field_cells(
    const GridWorld& w, const std::vector<std::pair<int, int>>& sources);

// Endpoints snap to their cell centers; nullopt = unreachable.
std::optional<double> geodesic_distance(const GridWorld& w, Vec2 from, Vec2 to);

// Every GridWorld invariant, reported as human-readable violations
// (empty = world is well formed).
std::vector<std::string> world_violations(const GridWorld& w);

// canonical JSON (stable bytes); schema documented in README
std::string world_to_json(const GridWorld& w);
GridWorld world_from_json(const std::string& text);  // throws ZsonError
GridWorld load_world(const std::string& path);
void save_world(const GridWorld& w, const std::string& path);

// Shared lookup used by training and evaluation.
struct WorldSet {
  std::vector<GridWorld> worlds;
  std::map<std::string, int> by_id;

  void add(GridWorld w);
  const GridWorld& get(const std::string& id) const;  // throws if unknown
  std::vector<std::string> ids() const;
  static WorldSet load_dir(const std::string& dir);  // *.json, sorted by name
};

}  // namespace zson
