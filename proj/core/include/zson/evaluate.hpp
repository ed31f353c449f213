#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "zson/embedding.hpp"
#include "zson/episodes.hpp"
#include "zson/network.hpp"
#include "zson/rollout.hpp"

namespace zson {

struct EvalConfig {
  EnvConfig env;
  int trials = 3;
  bool greedy = false;  // argmax instead of sampling
};

// One evaluated episode run (also the per-episode trace record).
struct EpisodeOutcome {
  std::string id;
  int trial = 0;
  bool success = false;
  double path_length = 0.0;
  int steps = 0;
  AgentPose stop_pose;
  double spl = 0.0;
  bool has_room_goal = false;
  bool room_correct = false;
};

struct GroupStats {
  int n = 0;
  int successes = 0;
  double spl_sum = 0.0;
  double sr() const { return n ? double(successes) / n : 0.0; }
  double spl() const { return n ? spl_sum / n : 0.0; }
};

struct EvalReport {
  std::string task;  // "imagenav" or "objectnav"
  int n_episodes = 0;
  int trials = 0;
  double sr_mean = 0.0, sr_std = 0.0;
  double spl_mean = 0.0, spl_std = 0.0;
  std::vector<double> trial_sr, trial_spl;
  std::map<std::string, GroupStats> per_tier;      // image goals with a tier
  std::map<std::string, GroupStats> per_category;  // object goals
  int room_goal_successes = 0;     // successes on goals naming a room
  int room_correct_successes = 0;  // of those, stop pose in the named room
  double room_correct_rate = -1.0;  // -1 when no goal names a room
  uint64_t vocab_hash = 0;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  std::string to_csv() const;  // per-trial rows plus mean/std rows
};

// 0 on failure, else shortest / max(path, shortest); negative lengths error.
double spl(bool success, double shortest, double path);

EpisodeOutcome run_episode(const PolicyNetwork<float>& net,
                           const WorldSet& worlds,
                           const ConceptVocabulary& vocab, const Episode& ep,
                           const EnvConfig& cfg, uint64_t seed, bool greedy);

// `trials` passes with seeds base_seed+0..trials-1; per-episode action RNG
// keyed by (trial seed, episode id).
EvalReport evaluate(const PolicyNetwork<float>& net, const WorldSet& worlds,
                    const ConceptVocabulary& vocab, const EpisodeDataset& ds,
                    const EvalConfig& cfg, uint64_t base_seed,
                    std::vector<EpisodeOutcome>* traces = nullptr);

// Same protocol with uniform-random actions (baseline).
EvalReport evaluate_random(const WorldSet& worlds,
                           const ConceptVocabulary& vocab,
                           const EpisodeDataset& ds, const EvalConfig& cfg,
                           uint64_t base_seed);

// Greedy SR over the first max_episodes episodes; used for checkpoint
// selection during training.
double greedy_success_rate(const PolicyNetwork<float>& net,
                           const WorldSet& worlds,
                           const ConceptVocabulary& vocab,
                           const EpisodeDataset& ds, const EnvConfig& env_cfg,
                           uint64_t seed, int max_episodes);

struct ZeroShotConfig {
  EvalConfig eval;
  int per_tier = 2;        // image episodes per tier per world
  int n_object = 6;        // object episodes per world
  uint64_t episode_seed = 0;
};

struct ZeroShotResult {
  EvalReport imagenav, objectnav;
  double transfer_gap = 0.0;  // imagenav SR - objectnav SR
  EpisodeDataset image_ds, object_ds;
};

// Generates matched datasets on held-out worlds and evaluates both tasks.
// Any overlap between eval world ids and train_world_ids is an error.
ZeroShotResult zero_shot_protocol(
    const PolicyNetwork<float>& net, const WorldSet& eval_worlds,
    const std::vector<std::string>& train_world_ids,
    const std::vector<std::vector<std::string>>& categories,
    const EncoderParams& enc, const ZeroShotConfig& cfg, uint64_t eval_seed,
    std::vector<EpisodeOutcome>* image_traces = nullptr,
    std::vector<EpisodeOutcome>* object_traces = nullptr);

}  // namespace zson
