#include "zson/worldgen.hpp"

#include <algorithm>

#include "zson/errors.hpp"
#include "zson/rng.hpp"
#include "zson/serialize.hpp"

namespace zson {

namespace {

struct Rect {
  int r0, r1, c0, c1;  // half-open
  int rh() const { return r1 - r0; }
  int cw() const { return c1 - c0; }
  long area() const { return long(rh()) * cw(); }
};

struct Split {
  bool row_wall;  // wall occupies one row (children stacked vertically)
  int coord;      // the wall row (or column)
  int a0, a1;     // perpendicular extent, half-open
};

void check_pool(const std::vector<std::string>& pool,
                const ConceptVocabulary& vocab, bool rooms, const char* what) {
  for (const auto& name : pool) {
    bool ok = rooms ? vocab.room_index(name) >= 0 : vocab.object_index(name) >= 0;
    if (!ok)
      throw ConfigError(std::string(what) + ": '" + name +
                        "' is not in the vocabulary");
  }
}

}  // namespace

void WorldGenParams::validate() const {
  if (width < 8 || height < 8)
    throw ConfigError("worldgen: grid must be at least 8x8");
  if (cell_size <= 0.0) throw ConfigError("worldgen: cell_size must be > 0");
  if (min_rooms < 1 || max_rooms < min_rooms)
    throw ConfigError("worldgen: need 1 <= min_rooms <= max_rooms");
  if (min_objects_per_room < 0 || max_objects_per_room < min_objects_per_room)
    throw ConfigError("worldgen: need 0 <= min_objects <= max_objects per room");
  if (min_room_extent < 2)
    throw ConfigError("worldgen: min_room_extent must be >= 2");
  if (max_attempts < 1) throw ConfigError("worldgen: max_attempts must be >= 1");
  vocab.validate();
  check_pool(room_concept_pool, vocab, true, "worldgen room pool");
  check_pool(object_concept_pool, vocab, false, "worldgen object pool");
  check_pool(per_room_objects, vocab, false, "worldgen per_room_objects");
  size_t pool_size = room_concept_pool.empty() ? vocab.room_concepts.size()
                                               : room_concept_pool.size();
  if (distinct_room_concepts && size_t(max_rooms) > pool_size)
    throw ConfigError(
        "worldgen: distinct_room_concepts needs max_rooms <= room pool size");
}

namespace {

// One generation attempt. Returns false when layout constraints cannot be
// met with this RNG draw (caller retries with a fresh stream).
bool try_generate(uint64_t seed, const WorldGenParams& p, Rng& rng,
                  GridWorld& out) {
  const int H = p.height, W = p.width, m = p.min_room_extent;
  Rect interior{1, H - 1, 1, W - 1};
  if (interior.rh() < m || interior.cw() < m) return false;

  std::vector<Rect> leaves{interior};
  std::vector<Split> splits;
  int target = p.min_rooms + rng.uniform_int(p.max_rooms - p.min_rooms + 1);

  while (int(leaves.size()) < target) {
    int best = -1;
    for (size_t i = 0; i < leaves.size(); ++i) {
      const Rect& L = leaves[i];
      bool splittable = L.rh() >= 2 * m + 1 || L.cw() >= 2 * m + 1;
      if (splittable && (best < 0 || L.area() > leaves[size_t(best)].area()))
        best = int(i);
    }
    if (best < 0) return false;
    Rect L = leaves[size_t(best)];
    bool can_row = L.rh() >= 2 * m + 1, can_col = L.cw() >= 2 * m + 1;
    bool row_wall;
    if (can_row && can_col)
      row_wall = L.rh() != L.cw() ? L.rh() > L.cw() : rng.uniform_int(2) == 0;
    else
      row_wall = can_row;
    if (row_wall) {
      int w = L.r0 + m + rng.uniform_int(L.rh() - 2 * m);
      splits.push_back({true, w, L.c0, L.c1});
      leaves[size_t(best)] = {L.r0, w, L.c0, L.c1};
      leaves.push_back({w + 1, L.r1, L.c0, L.c1});
    } else {
      int w = L.c0 + m + rng.uniform_int(L.cw() - 2 * m);
      splits.push_back({false, w, L.r0, L.r1});
      leaves[size_t(best)] = {L.r0, L.r1, L.c0, w};
      leaves.push_back({L.r0, L.r1, w + 1, L.c1});
    }
  }

  GridWorld w;
  w.id = "w" + hex64(seed);
  w.cell_size = p.cell_size;
  w.height = H;
  w.width = W;
  w.rng_seed = seed;
  w.occupancy.assign(size_t(H) * W, 1);

  std::vector<int> leaf_of(size_t(H) * W, -1);
  for (size_t i = 0; i < leaves.size(); ++i) {
    const Rect& L = leaves[i];
    for (int r = L.r0; r < L.r1; ++r)
      for (int c = L.c0; c < L.c1; ++c) {
        w.occupancy[size_t(r) * W + c] = 0;
        leaf_of[size_t(r) * W + c] = int(i);
      }
  }

  // carve one door per split; both across-cells must be leaf cells so every
  // door joins two rooms directly
  std::vector<std::vector<std::pair<int, int>>> door_cells(leaves.size());
  for (const Split& s : splits) {
    std::vector<std::pair<int, int>> cands;  // (perp coord, leaf to join)
    for (int a = s.a0; a < s.a1; ++a) {
      int l1, l2;
      if (s.row_wall) {
        l1 = leaf_of[size_t(s.coord - 1) * W + a];
        l2 = leaf_of[size_t(s.coord + 1) * W + a];
      } else {
        l1 = leaf_of[size_t(a) * W + (s.coord - 1)];
        l2 = leaf_of[size_t(a) * W + (s.coord + 1)];
      }
      if (l1 >= 0 && l2 >= 0) cands.emplace_back(a, l1);
    }
    if (cands.empty()) return false;
    auto [a, owner] = cands[size_t(rng.uniform_int(int(cands.size())))];
    int r = s.row_wall ? s.coord : a;
    int c = s.row_wall ? a : s.coord;
    w.occupancy[size_t(r) * W + c] = 0;
    door_cells[size_t(owner)].emplace_back(r, c);
  }

  // room concepts
  const auto& room_pool =
      p.room_concept_pool.empty() ? p.vocab.room_concepts : p.room_concept_pool;
  std::vector<std::string> names(leaves.size());
  if (p.distinct_room_concepts) {
    std::vector<std::string> pool = room_pool;
    rng.shuffle(pool);
    for (size_t i = 0; i < leaves.size(); ++i) names[i] = pool[i];
  } else {
    for (size_t i = 0; i < leaves.size(); ++i)
      names[i] = room_pool[size_t(rng.uniform_int(int(room_pool.size())))];
  }

  for (size_t i = 0; i < leaves.size(); ++i) {
    Room room;
    room.room_concept = names[i];
    const Rect& L = leaves[i];
    for (int r = L.r0; r < L.r1; ++r)
      for (int c = L.c0; c < L.c1; ++c) room.cells.emplace_back(r, c);
    for (auto cell : door_cells[i]) room.cells.push_back(cell);
    std::sort(room.cells.begin(), room.cells.end());
    w.rooms.push_back(std::move(room));
  }

  // objects on distinct cell centers
  const auto& obj_pool = p.object_concept_pool.empty()
                             ? p.vocab.object_concepts
                             : p.object_concept_pool;
  for (size_t i = 0; i < leaves.size(); ++i) {
    std::vector<std::pair<int, int>> avail = w.rooms[i].cells;
    auto place = [&](const std::string& name) -> bool {
      if (avail.empty()) return false;
      size_t k = size_t(rng.uniform_int(int(avail.size())));
      auto [r, c] = avail[k];
      avail.erase(avail.begin() + long(k));
      ObjectInstance obj;
      obj.object_concept = name;
      obj.position = w.cell_center(r, c);
      obj.room_concept = w.rooms[i].room_concept;
      w.objects.push_back(std::move(obj));
      return true;
    };
    for (const auto& name : p.per_room_objects)
      if (!place(name)) return false;
    int n_extra = p.min_objects_per_room +
                  rng.uniform_int(p.max_objects_per_room - p.min_objects_per_room + 1);
    for (int k = 0; k < n_extra; ++k)
      if (!place(obj_pool[size_t(rng.uniform_int(int(obj_pool.size())))]))
        return false;
  }

  w.rebuild_cell_index();
  if (!world_violations(w).empty()) return false;
  out = std::move(w);
  return true;
}

}  // namespace

GridWorld generate_world(uint64_t seed, const WorldGenParams& params) {
  params.validate();
  if (params.object_concept_pool.empty() && params.vocab.object_concepts.empty() &&
      (params.max_objects_per_room > 0 || !params.per_room_objects.empty()))
    throw ConfigError("worldgen: object placement requested with empty vocabulary");
  for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
    Rng rng(stream_seed(seed, uint64_t(attempt)));
    GridWorld w;
    if (try_generate(seed, params, rng, w)) return w;
  }
  throw ZsonError("world generation failed after " +
                  std::to_string(params.max_attempts) +
                  " attempts (seed=" + std::to_string(seed) + ")");
}

GridWorld make_corridor_world(int corridor_cells, double cell_size) {
  if (corridor_cells < 1) throw ConfigError("corridor needs >= 1 cell");
  GridWorld w;
  int W = std::max(8, corridor_cells + 2);
  int H = 8;
  w.id = "corridor" + std::to_string(corridor_cells);
  w.cell_size = cell_size;
  w.height = H;
  w.width = W;
  w.rng_seed = 0;
  w.occupancy.assign(size_t(H) * W, 1);
  Room room;
  room.room_concept = "hallway";
  int row = H / 2;
  for (int c = 1; c <= corridor_cells; ++c) {
    w.occupancy[size_t(row) * W + c] = 0;
    room.cells.emplace_back(row, c);
  }
  w.rooms.push_back(std::move(room));
  w.rebuild_cell_index();
  return w;
}

}  // namespace zson
