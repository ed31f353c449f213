#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zson/checkpoint.hpp"
#include "zson/episodes.hpp"
#include "zson/network.hpp"
#include "zson/optim.hpp"
#include "zson/rollout.hpp"

namespace zson {

struct TrainerConfig {
  int n_envs = 8;
  int rollout_len = 64;
  int ppo_epochs = 2;
  int minibatches = 2;
  float clip = 0.2f;
  float gamma = 0.99f;
  float tau = 0.95f;
  float value_coef = 0.5f;
  float entropy_coef = 0.01f;
  float max_grad_norm = 0.2f;
  float lr = 2.25e-4f;
  float weight_decay = 1e-6f;
  float adam_eps = 1e-5f;
  int64_t total_steps = 0;
  uint64_t seed = 0;
  bool normalize_advantage = true;

  // network sizes (observation/goal dims come from the data)
  int obs_hidden = 128;
  int rnn_hidden = 128;
  int act_emb_dim = 32;
  int rnn_layers = 2;

  // environment
  KinematicsConfig kin;
  RewardConfig reward;
  int max_episode_steps = 500;

  // artifact cadence
  int checkpoint_every = 50;  // updates
  int val_every = 25;         // updates; 0 disables validation
  int val_episodes = 32;

  void validate() const;
  AdamConfig adam() const { return {lr, weight_decay, adam_eps, 0.9f, 0.999f}; }
};

// advantages[k]/returns[k] aligned with buf indices; reverse recursion per
// env in double precision
void compute_gae(const RolloutBuffer& buf, float gamma, float tau,
                 std::vector<float>& advantages, std::vector<float>& returns);

// in-place zero-mean/unit-variance; no-op when the batch variance is zero
void normalize_advantages(std::vector<float>& advantages);

struct UpdateStats {
  int64_t env_steps = 0;
  int64_t updates = 0;
  double mean_reward = 0.0;
  double train_sr = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
};

// Clipped-surrogate update over the filled buffer. Minibatches are whole-env
// groups so recurrent state is recomputed exactly; throws on non-finite loss.
UpdateStats ppo_update(PolicyNetwork<float>& net, AdamState& adam,
                       const RolloutBuffer& buf,
                       const std::vector<float>& advantages,
                       const std::vector<float>& returns,
                       const TrainerConfig& cfg, int64_t update_index);

// Owns envs, network, optimizer; alternates collect and update.
class Trainer {
 public:
  Trainer(const WorldSet& worlds, const ConceptVocabulary& vocab,
          const EpisodeDataset& dataset, const TrainerConfig& cfg);

  UpdateStats update_once();
  bool done() const { return env_steps_ >= cfg_.total_steps; }

  PolicyNetwork<float>& net() { return *net_; }
  AdamState& adam_state() { return adam_; }
  int64_t env_steps() const { return env_steps_; }
  int64_t updates() const { return updates_; }
  void set_progress(const TrainProgress& p) {
    env_steps_ = p.env_steps;
    updates_ = p.updates;
  }
  TrainProgress progress() const { return {env_steps_, updates_}; }
  const TrainerConfig& config() const { return cfg_; }
  // SR over the most recent finished training episodes (window of 100)
  double recent_train_sr() const;

 private:
  TrainerConfig cfg_;
  std::unique_ptr<PolicyNetwork<float>> net_;
  AdamState adam_;
  std::vector<NavEnv> envs_;
  std::vector<RecurrentState<float>> states_;
  RolloutBuffer buf_;
  int64_t env_steps_ = 0;
  int64_t updates_ = 0;
  std::vector<uint8_t> recent_outcomes_;  // ring of episode results
  size_t recent_pos_ = 0;
  int recent_count_ = 0;
};

struct TrainResult {
  int64_t env_steps = 0;
  int64_t updates = 0;
  double best_val_sr = -1.0;  // -1 when validation disabled
  std::string metrics_path;
  std::string latest_checkpoint;
  std::string best_checkpoint;  // empty when validation disabled
};

// Full loop: writes metrics.csv plus ckpt_latest.bin (and ckpt_best.bin when a
// validation set is given) under out_dir. Resuming restores weights, optimizer
// state, and step counters, and appends to the existing metrics file.
TrainResult train(const WorldSet& worlds, const ConceptVocabulary& vocab,
                  const EpisodeDataset& dataset,
                  const EpisodeDataset* val_dataset, const TrainerConfig& cfg,
                  const std::string& out_dir,
                  const std::string& resume_path = "");

extern const char* kMetricsHeader;

}  // namespace zson
