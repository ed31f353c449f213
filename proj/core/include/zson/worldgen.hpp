#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zson/vocab.hpp"
#include "zson/world.hpp"

namespace zson {

struct WorldGenParams {
  int width = 16;   // cells, >= 8
  int height = 16;  // cells, >= 8
  double cell_size = 0.25;
  int min_rooms = 2;
  int max_rooms = 4;
  int min_objects_per_room = 1;
  int max_objects_per_room = 2;
  // Placed in every room before the random fill; lets scenarios guarantee a
  // category exists everywhere (e.g. one sink per room).
  std::vector<std::string> per_room_objects;
  // Empty pools mean "whole vocabulary".
  std::vector<std::string> room_concept_pool;
  std::vector<std::string> object_concept_pool;
  // Assign each room a different concept (requires enough pool entries).
  bool distinct_room_concepts = false;
  int min_room_extent = 3;  // smallest interior width/height of a room
  int max_attempts = 64;    // whole-world regeneration attempts
  ConceptVocabulary vocab = ConceptVocabulary::defaults();

  void validate() const;  // throws ConfigError
};

// Deterministic in (seed, params): recursive rectangle partition with
// one-cell walls and carved doors, rooms labeled from the vocabulary,
// objects dropped on free cell centers. Throws ZsonError if no invariant-
// satisfying world emerges within max_attempts.
GridWorld generate_world(uint64_t seed, const WorldGenParams& params);

// A single free row of `corridor_cells` cells embedded in an all-wall grid;
// one hallway room. The smallest world the invariants allow.
GridWorld make_corridor_world(int corridor_cells = 10, double cell_size = 0.25);

}  // namespace zson
