#pragma once

#include <vector>

#include "zson/vocab.hpp"
#include "zson/world.hpp"

namespace zson {

// Egocentric feature vector: n_view_bins sectors spanning the HFOV, each with
// a normalized central-ray obstacle distance and a multi-hot of visible
// object concepts, followed by a one-hot of the current room concept.
struct ObservationFeature {
  std::vector<float> values;
};

int observation_dim(const ConceptVocabulary& vocab, const KinematicsConfig& cfg);

// Counts of object concepts within view_range, within +-hfov/2 of the
// heading, and not occluded by any blocked cell between the agent's and the
// object's cell. The current room concept is always included with count 1.
ConceptBag visible_concept_bag(const GridWorld& w, const AgentPose& pose,
                               const KinematicsConfig& cfg);

ObservationFeature observe(const GridWorld& w, const AgentPose& pose,
                           const KinematicsConfig& cfg,
                           const ConceptVocabulary& vocab);

// Exposed for tests and benchmarks.
// Center-to-center grid ray; false when any strictly intermediate cell is
// blocked. Exact integer traversal: rays through cell corners step
// diagonally and are not occluded by the two touched side cells.
bool line_of_sight(const GridWorld& w, int r0, int c0, int r1, int c1);

// Distance from a continuous origin along `angle_rad` to the first blocked
// cell boundary (grid edges count as blocked), clamped to max_range.
double ray_obstacle_distance(const GridWorld& w, Vec2 origin, double angle_rad,
                             double max_range);

}  // namespace zson
