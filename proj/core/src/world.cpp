#include "zson/world.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <queue>
#include <set>

#include "json.hpp"
#include "zson/errors.hpp"
#include "zson/serialize.hpp"
#include "zson/version.hpp"

namespace zson {

using nlohmann::json;

const char* action_name(Action a) {
  switch (a) {
    case Action::MOVE_FORWARD: return "MOVE_FORWARD";
    case Action::TURN_LEFT: return "TURN_LEFT";
    case Action::TURN_RIGHT: return "TURN_RIGHT";
    case Action::STOP: return "STOP";
  }
  return "?";
}

void GridWorld::rebuild_cell_index() {
  room_of_cell.assign(size_t(height) * width, int16_t(-1));
  for (size_t i = 0; i < rooms.size(); ++i) {
    for (auto [r, c] : rooms[i].cells) {
      if (in_bounds(r, c)) room_of_cell[size_t(r) * width + c] = int16_t(i);
    }
  }
}

std::pair<AgentPose, bool> step_action(const GridWorld& w, const AgentPose& pose,
                                       Action a, const KinematicsConfig& cfg) {
  AgentPose out = pose;
  switch (a) {
    case Action::TURN_LEFT:
      out.heading = wrap_deg(pose.heading + cfg.turn_angle);
      return {out, false};
    case Action::TURN_RIGHT:
      out.heading = wrap_deg(pose.heading - cfg.turn_angle);
      return {out, false};
    case Action::STOP:
      return {out, false};
    case Action::MOVE_FORWARD: {
      double h = deg2rad(double(pose.heading));
      Vec2 np{pose.position.x + cfg.step_size * std::cos(h),
              pose.position.y + cfg.step_size * std::sin(h)};
      if (!w.in_free_cell(np)) return {pose, true};
      out.position = np;
      return {out, false};
    }
  }
  return {pose, false};
}

DistanceField compute_distance_field_cells(
    const GridWorld& w, const std::vector<std::pair<int, int>>& sources) {
  const int H = w.height, W = w.width;
  const double diag = w.cell_size * std::sqrt(2.0);

  DistanceField f;
  f.height = H;
  f.width = W;
  f.dist.assign(size_t(H) * W, std::numeric_limits<double>::infinity());

  // exact step counts per cell; the double in f.dist is always derived from
  // these through the one formula below
  std::vector<int32_t> ns(size_t(H) * W, 0), nd(size_t(H) * W, 0);
  auto value_of = [&](int32_t s, int32_t d) {
    return double(s) * w.cell_size + double(d) * diag;
  };

  using Item = std::pair<double, int>;  // (value, cell); index breaks ties
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;

  for (auto [r, c] : sources) {
    if (w.blocked(r, c)) continue;
    int idx = r * W + c;
    if (f.dist[idx] == 0.0) continue;
    ns[idx] = 0;
    nd[idx] = 0;
    f.dist[idx] = 0.0;
    pq.push({0.0, idx});
  }

  static constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
  static constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

  while (!pq.empty()) {
    auto [v, idx] = pq.top();
    pq.pop();
    if (v > f.dist[idx]) continue;  // stale entry
    int r = idx / W, c = idx % W;
    for (int k = 0; k < 8; ++k) {
      int nr = r + kDr[k], nc = c + kDc[k];
      if (w.blocked(nr, nc)) continue;
      bool is_diag = kDr[k] != 0 && kDc[k] != 0;
      int32_t cs = ns[idx] + (is_diag ? 0 : 1);
      int32_t cd = nd[idx] + (is_diag ? 1 : 0);
      double cv = value_of(cs, cd);
      int nidx = nr * W + nc;
      if (cv < f.dist[nidx]) {
        ns[nidx] = cs;
        nd[nidx] = cd;
        f.dist[nidx] = cv;
        pq.push({cv, nidx});
      }
    }
  }
  return f;
}

DistanceField compute_distance_field(const GridWorld& w, Vec2 from) {
  return compute_distance_field_cells(
      w, {{w.cell_row(from.y), w.cell_col(from.x)}});
}

std::optional<double> geodesic_distance(const GridWorld& w, Vec2 from, Vec2 to) {
  int r0 = w.cell_row(from.y), c0 = w.cell_col(from.x);
  int r1 = w.cell_row(to.y), c1 = w.cell_col(to.x);
  if (w.blocked(r0, c0) || w.blocked(r1, c1)) return std::nullopt;
  DistanceField f = compute_distance_field_cells(w, {{r0, c0}});
  double d = f.at(r1, c1);
  if (std::isinf(d)) return std::nullopt;
  return d;
}

std::vector<std::string> world_violations(const GridWorld& w) {
  std::vector<std::string> out;
  if (w.height < 8 || w.width < 8)
    out.push_back("grid smaller than 8x8: " + std::to_string(w.height) + "x" +
                  std::to_string(w.width));
  if (w.cell_size <= 0.0) out.push_back("cell_size must be positive");
  if (w.occupancy.size() != size_t(w.height) * size_t(w.width)) {
    out.push_back("occupancy size does not match grid dimensions");
    return out;  // nothing else is checkable
  }

  // free cells form one 8-connected component
  int first_free = -1, n_free = 0;
  for (size_t i = 0; i < w.occupancy.size(); ++i) {
    if (w.occupancy[i] == 0) {
      ++n_free;
      if (first_free < 0) first_free = int(i);
    }
  }
  if (n_free == 0) {
    out.push_back("no free cells");
    return out;
  }
  {
    std::vector<uint8_t> seen(w.occupancy.size(), 0);
    std::vector<int> stack{first_free};
    seen[size_t(first_free)] = 1;
    int reached = 0;
    while (!stack.empty()) {
      int idx = stack.back();
      stack.pop_back();
      ++reached;
      int r = idx / w.width, c = idx % w.width;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          int nr = r + dr, nc = c + dc;
          if (w.blocked(nr, nc)) continue;
          int nidx = nr * w.width + nc;
          if (!seen[size_t(nidx)]) {
            seen[size_t(nidx)] = 1;
            stack.push_back(nidx);
          }
        }
    }
    if (reached != n_free)
      out.push_back("free cells form " + std::to_string(n_free - reached) +
                    "+1 disconnected components");
  }

  // rooms: disjoint cells, covering all free cells
  std::set<std::pair<int, int>> assigned;
  for (const auto& room : w.rooms) {
    for (auto cell : room.cells) {
      if (!w.in_bounds(cell.first, cell.second)) {
        out.push_back("room '" + room.room_concept + "' has out-of-bounds cell");
        continue;
      }
      if (!assigned.insert(cell).second)
        out.push_back("cell (" + std::to_string(cell.first) + "," +
                      std::to_string(cell.second) + ") assigned to two rooms");
    }
  }
  for (int r = 0; r < w.height; ++r)
    for (int c = 0; c < w.width; ++c)
      if (!w.blocked(r, c) && !assigned.count({r, c}))
        out.push_back("free cell (" + std::to_string(r) + "," +
                      std::to_string(c) + ") belongs to no room");

  // objects: free cell, inside the room they claim
  for (const auto& obj : w.objects) {
    int r = w.cell_row(obj.position.y), c = w.cell_col(obj.position.x);
    if (w.blocked(r, c)) {
      out.push_back("object '" + obj.object_concept + "' sits in a blocked cell");
      continue;
    }
    bool found = false;
    for (const auto& room : w.rooms) {
      if (std::find(room.cells.begin(), room.cells.end(),
                    std::make_pair(r, c)) != room.cells.end()) {
        found = true;
        if (room.room_concept != obj.room_concept)
          out.push_back("object '" + obj.object_concept + "' claims room '" +
                        obj.room_concept + "' but sits in '" +
                        room.room_concept + "'");
        break;
      }
    }
    if (!found)
      out.push_back("object '" + obj.object_concept + "' is outside all rooms");
  }
  return out;
}

std::string world_to_json(const GridWorld& w) {
  json j;
  j["v"] = kSchemaVersion;
  j["id"] = w.id;
  j["cell_size"] = w.cell_size;
  j["rng_seed"] = w.rng_seed;
  std::vector<std::string> grid;
  grid.reserve(size_t(w.height));
  for (int r = 0; r < w.height; ++r) {
    std::string row(size_t(w.width), '0');
    for (int c = 0; c < w.width; ++c)
      if (w.occupancy[size_t(r) * w.width + c]) row[size_t(c)] = '1';
    grid.push_back(std::move(row));
  }
  j["grid"] = grid;
  j["rooms"] = json::array();
  for (const auto& room : w.rooms) {
    json jr;
    jr["concept"] = room.room_concept;
    json cells = json::array();
    for (auto [r, c] : room.cells) cells.push_back(json::array({r, c}));
    jr["cells"] = cells;
    j["rooms"].push_back(jr);
  }
  j["objects"] = json::array();
  for (const auto& obj : w.objects) {
    json jo;
    jo["concept"] = obj.object_concept;
    jo["x"] = obj.position.x;
    jo["y"] = obj.position.y;
    jo["room"] = obj.room_concept;
    j["objects"].push_back(jo);
  }
  return j.dump(2) + "\n";
}

namespace {

const json& require_field(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ZsonError(std::string(where) + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

GridWorld world_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ZsonError(std::string("world json: parse error: ") + e.what());
  }
  const char* ctx = "world json";
  try {
    GridWorld w;
    int v = require_field(j, "v", ctx).get<int>();
    if (v != kSchemaVersion)
      throw ZsonError("world json: schema v" + std::to_string(v) +
                      " found, expected v" + std::to_string(kSchemaVersion));
    w.id = require_field(j, "id", ctx).get<std::string>();
    w.cell_size = require_field(j, "cell_size", ctx).get<double>();
    w.rng_seed = require_field(j, "rng_seed", ctx).get<uint64_t>();
    const json& grid = require_field(j, "grid", ctx);
    if (!grid.is_array() || grid.empty())
      throw ZsonError("world json: 'grid' must be a non-empty array");
    w.height = int(grid.size());
    w.width = int(grid[0].get<std::string>().size());
    w.occupancy.assign(size_t(w.height) * w.width, 0);
    for (int r = 0; r < w.height; ++r) {
      std::string row = grid[size_t(r)].get<std::string>();
      if (int(row.size()) != w.width)
        throw ZsonError("world json: grid row " + std::to_string(r) +
                        " has inconsistent width");
      for (int c = 0; c < w.width; ++c) {
        if (row[size_t(c)] != '0' && row[size_t(c)] != '1')
          throw ZsonError("world json: grid may contain only '0'/'1'");
        w.occupancy[size_t(r) * w.width + c] = row[size_t(c)] == '1' ? 1 : 0;
      }
    }
    for (const json& jr : require_field(j, "rooms", ctx)) {
      Room room;
      room.room_concept = require_field(jr, "concept", "world json room").get<std::string>();
      for (const json& cell : require_field(jr, "cells", "world json room")) {
        if (!cell.is_array() || cell.size() != 2)
          throw ZsonError("world json: room cell must be [row, col]");
        room.cells.emplace_back(cell[0].get<int>(), cell[1].get<int>());
      }
      w.rooms.push_back(std::move(room));
    }
    for (const json& jo : require_field(j, "objects", ctx)) {
      ObjectInstance obj;
      obj.object_concept = require_field(jo, "concept", "world json object").get<std::string>();
      obj.position.x = require_field(jo, "x", "world json object").get<double>();
      obj.position.y = require_field(jo, "y", "world json object").get<double>();
      obj.room_concept = require_field(jo, "room", "world json object").get<std::string>();
      w.objects.push_back(std::move(obj));
    }
    w.rebuild_cell_index();
    return w;
  } catch (const json::exception& e) {
    throw ZsonError(std::string("world json: ") + e.what());
  }
}

GridWorld load_world(const std::string& path) {
  try {
    return world_from_json(read_text_file(path));
  } catch (const ZsonError& e) {
    throw ZsonError(path + ": " + e.what());
  }
}

void save_world(const GridWorld& w, const std::string& path) {
  write_text_file(path, world_to_json(w));
}

void WorldSet::add(GridWorld w) {
  if (by_id.count(w.id)) throw ZsonError("duplicate world id: " + w.id);
  by_id[w.id] = int(worlds.size());
  worlds.push_back(std::move(w));
}

const GridWorld& WorldSet::get(const std::string& id) const {
  auto it = by_id.find(id);
  if (it == by_id.end()) throw ZsonError("unknown world id: " + id);
  return worlds[size_t(it->second)];
}

std::vector<std::string> WorldSet::ids() const {
  std::vector<std::string> out;
  out.reserve(worlds.size());
  for (const auto& w : worlds) out.push_back(w.id);
  return out;
}

WorldSet WorldSet::load_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ZsonError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name == "manifest.json" || name.empty() || name[0] == '.') continue;
    if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw ZsonError("no world files (*.json) in " + dir);
  WorldSet set;
  for (const auto& p : paths) set.add(load_world(p));
  return set;
}

}  // namespace zson
