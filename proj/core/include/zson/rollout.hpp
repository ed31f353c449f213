#pragma once

#include <cstdint>
#include <vector>

#include "zson/episodes.hpp"
#include "zson/network.hpp"
#include "zson/reward.hpp"
#include "zson/rng.hpp"
#include "zson/sensing.hpp"
#include "zson/world.hpp"

namespace zson {

struct EnvConfig {
  KinematicsConfig kin;
  RewardConfig reward;
  int max_episode_steps = 500;
};

struct EnvStepResult {
  float reward = 0.0f;
  bool done = false;       // episode ended (STOP or step cap)
  bool success = false;    // STOP inside the success radius
  bool truncated = false;  // ended by the step cap
  bool collided = false;
};

// One navigation episode runner. Owns its RNG stream (keyed by seed and env
// index) so a batch of envs behaves identically whether stepped together or
// one at a time.
class NavEnv {
 public:
  NavEnv(const WorldSet& worlds, const ConceptVocabulary& vocab,
         const EpisodeDataset* dataset, const EnvConfig& cfg, uint64_t seed,
         int env_index);

  // Samples the next episode uniformly from the dataset.
  void reset();
  // Starts a specific episode (used by evaluation).
  void load_episode(const Episode& ep);

  EnvStepResult step(Action a);

  const ObservationFeature& observation() const { return obs_; }
  const Episode& episode() const { return ep_; }
  const GridWorld& world() const { return *world_; }
  const AgentPose& pose() const { return pose_; }
  int prev_action() const { return prev_action_; }
  int steps_taken() const { return steps_; }
  double distance_to_goal() const { return dtg_; }
  double angle_to_goal() const { return atg_; }
  Rng& rng() { return rng_; }
  const EnvConfig& config() const { return cfg_; }

 private:
  void refresh_measures();

  const WorldSet* worlds_;
  const ConceptVocabulary* vocab_;
  const EpisodeDataset* dataset_;
  EnvConfig cfg_;
  Rng rng_;
  const GridWorld* world_ = nullptr;
  Episode ep_;
  DistanceField goal_field_;
  AgentPose pose_;
  ObservationFeature obs_;
  double dtg_ = 0.0, atg_ = 0.0;
  int prev_action_ = kStartActionToken;
  int steps_ = 0;
};

// Flat storage for one collection phase, indexed [env][t].
struct RolloutBuffer {
  int n_envs = 0, rollout_len = 0, obs_dim = 0, goal_dim = 0;
  std::vector<float> obs, goals;
  std::vector<int> prev_actions, actions;
  std::vector<float> logp, value, reward;
  std::vector<uint8_t> done;          // env reset after this step
  std::vector<uint8_t> reset_before;  // recurrent state zeroed before this step
  std::vector<RecurrentState<float>> start_state;
  std::vector<float> bootstrap_value;

  void resize(int envs, int len, int od, int gd, const NetConfig& ncfg);
  size_t at(int e, int t) const { return size_t(e) * rollout_len + t; }
  int size() const { return n_envs * rollout_len; }
};

struct CollectStats {
  int64_t steps = 0;
  int episodes = 0;
  int successes = 0;
  double reward_sum = 0.0;
  std::vector<uint8_t> episode_outcomes;  // 1 per finished episode, in order
};

// Fills the buffer: rollout_len transitions per env, actions sampled from the
// policy with each env's own RNG. `states` carry recurrent state across
// collection phases and are zeroed whenever an episode ends.
CollectStats collect_rollouts(std::vector<NavEnv>& envs,
                              std::vector<RecurrentState<float>>& states,
                              const PolicyNetwork<float>& net,
                              RolloutBuffer& buf);

}  // namespace zson
