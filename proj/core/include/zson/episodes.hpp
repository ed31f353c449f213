#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zson/embedding.hpp"
#include "zson/world.hpp"

namespace zson {

enum class GoalKind { IMAGE, OBJECT };

enum class Tier { EASY, MEDIUM, HARD };
const char* tier_name(Tier t);
std::optional<Tier> tier_from_name(const std::string& name);
// [lo, hi); HARD's upper bound is inclusive
std::pair<double, double> tier_range(Tier t);
bool in_tier(Tier t, double dist);
inline const std::vector<Tier>& all_tiers() {
  static const std::vector<Tier> tiers{Tier::EASY, Tier::MEDIUM, Tier::HARD};
  return tiers;
}

struct Episode {
  std::string id;
  std::string world_id;
  GoalKind kind = GoalKind::IMAGE;
  AgentPose start;
  AgentPose goal_pose;                     // IMAGE goals
  std::vector<std::string> goal_concepts; // OBJECT goals, sorted unique
  SemanticGoal goal_embedding;
  std::optional<Tier> tier;  // IMAGE goals only
  double shortest_path = 0.0;
};

struct EpisodeDataset {
  std::vector<Episode> episodes;
  // provenance (not persisted in the JSONL payload; manifests carry it)
  uint64_t seed = 0;
  uint64_t encoder_hash = 0;

  size_t size() const { return episodes.size(); }
  bool empty() const { return episodes.empty(); }
  void append(const EpisodeDataset& other);
};

// Start/goal pairs rejection-sampled on free cell centers until the geodesic
// distance lands in each requested tier; every accepted goal position yields
// four episodes with goal headings 0/90/180/270. Goal embeddings come from
// the visible bag at the goal pose, with one noise draw per episode fixed at
// generation time. Deterministic in (world, seed).
EpisodeDataset sample_imagenav_episodes(
    const GridWorld& world, int n_per_tier, const EncoderParams& enc,
    uint64_t seed, const KinematicsConfig& kin = {},
    const std::vector<Tier>& tiers = all_tiers());

// Start cells sampled at geodesic distance >= min_start_dist from the
// nearest instance of the goal's object concept; categories cycle round-
// robin; embeddings are noise-free text encodings. A category may contain a
// room concept to form a compound goal.
EpisodeDataset sample_objectnav_episodes(
    const GridWorld& world, int n,
    const std::vector<std::vector<std::string>>& categories,
    const EncoderParams& enc, uint64_t seed, double min_start_dist = 1.5);

// The single object concept of an OBJECT episode's goal (compound goals hold
// exactly one object concept plus optionally one room concept).
std::string object_concept_of(const Episode& ep, const ConceptVocabulary& vocab);
std::optional<std::string> room_concept_of(const Episode& ep,
                                           const ConceptVocabulary& vocab);

// JSON-Lines, one episode per line; embeddings round-trip bitwise.
void save_dataset(const EpisodeDataset& ds, const std::string& path);
EpisodeDataset load_dataset(const std::string& path);
std::string episode_to_jsonl(const Episode& ep);
Episode episode_from_jsonl(const std::string& line);

}  // namespace zson
