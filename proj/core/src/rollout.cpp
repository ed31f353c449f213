#include "zson/rollout.hpp"

#include <cmath>

#include "zson/errors.hpp"
#include "zson/geometry.hpp"

namespace zson {

NavEnv::NavEnv(const WorldSet& worlds, const ConceptVocabulary& vocab,
               const EpisodeDataset* dataset, const EnvConfig& cfg,
               uint64_t seed, int env_index)
    : worlds_(&worlds),
      vocab_(&vocab),
      dataset_(dataset),
      cfg_(cfg),
      rng_(stream_seed(seed, uint64_t(env_index))) {
  if (dataset_ && dataset_->empty())
    throw ZsonError("environment given an empty episode dataset");
}

void NavEnv::reset() {
  if (!dataset_) throw ZsonError("reset() without a dataset; use load_episode");
  size_t i = size_t(rng_.uniform_int(uint64_t(dataset_->episodes.size())));
  load_episode(dataset_->episodes[i]);
}

void NavEnv::load_episode(const Episode& ep) {
  ep_ = ep;
  world_ = &worlds_->get(ep.world_id);
  if (ep.kind == GoalKind::IMAGE) {
    goal_field_ = compute_distance_field(*world_, ep.goal_pose.position);
  } else {
    std::string obj = object_concept_of(ep, *vocab_);
    std::vector<std::pair<int, int>> sources;
    for (const auto& inst : world_->objects)
      if (inst.object_concept == obj)
        sources.emplace_back(world_->cell_row(inst.position.y),
                             world_->cell_col(inst.position.x));
    if (sources.empty())
      throw ZsonError("world " + world_->id + " has no instance of '" + obj + "'");
    goal_field_ = compute_distance_field_cells(*world_, sources);
  }
  pose_ = ep.start;
  prev_action_ = kStartActionToken;
  steps_ = 0;
  refresh_measures();
  obs_ = observe(*world_, pose_, cfg_.kin, *vocab_);
}

void NavEnv::refresh_measures() {
  double d = goal_field_.at_pos(*world_, pose_.position);
  if (!std::isfinite(d))
    throw ZsonError("agent in a cell with no path to the goal (world " +
                    world_->id + ")");
  dtg_ = d;
  atg_ = (ep_.kind == GoalKind::IMAGE)
             ? double(angle_diff_deg(pose_.heading, ep_.goal_pose.heading))
             : 0.0;
}

EnvStepResult NavEnv::step(Action a) {
  StepContext ctx;
  ctx.prev_dtg = dtg_;
  ctx.prev_atg = atg_;
  ctx.action = a;

  auto [new_pose, collided] = step_action(*world_, pose_, a, cfg_.kin);
  pose_ = new_pose;
  steps_ += 1;
  refresh_measures();

  ctx.new_dtg = dtg_;
  ctx.new_atg = atg_;
  ctx.stopped_in_success =
      (a == Action::STOP) && dtg_ <= cfg_.reward.success_radius;
  ctx.stopped_in_angle_success =
      ctx.stopped_in_success && atg_ <= cfg_.reward.angle_threshold;

  EnvStepResult res;
  res.reward = float(compute_step_reward(ctx, cfg_.reward));
  res.collided = collided;
  res.success = ctx.stopped_in_success;
  if (a == Action::STOP) {
    res.done = true;
  } else if (steps_ >= cfg_.max_episode_steps) {
    res.done = true;
    res.truncated = true;
  }
  prev_action_ = int(a);
  if (!res.done) obs_ = observe(*world_, pose_, cfg_.kin, *vocab_);
  return res;
}

void RolloutBuffer::resize(int envs, int len, int od, int gd,
                           const NetConfig& ncfg) {
  n_envs = envs;
  rollout_len = len;
  obs_dim = od;
  goal_dim = gd;
  size_t n = size_t(envs) * len;
  obs.assign(n * od, 0.0f);
  goals.assign(n * gd, 0.0f);
  prev_actions.assign(n, 0);
  actions.assign(n, 0);
  logp.assign(n, 0.0f);
  value.assign(n, 0.0f);
  reward.assign(n, 0.0f);
  done.assign(n, 0);
  reset_before.assign(n, 0);
  start_state.assign(size_t(envs), RecurrentState<float>::zeros(
                                       ncfg.rnn_layers, ncfg.rnn_hidden));
  bootstrap_value.assign(size_t(envs), 0.0f);
}

CollectStats collect_rollouts(std::vector<NavEnv>& envs,
                              std::vector<RecurrentState<float>>& states,
                              const PolicyNetwork<float>& net,
                              RolloutBuffer& buf) {
  if (envs.empty() || envs.size() != states.size())
    throw ZsonError("environment and state counts do not match");
  if (buf.n_envs != int(envs.size()))
    throw ZsonError("rollout buffer sized for a different env count");

  const int NA = net.cfg.n_actions;
  const int od = buf.obs_dim, gd = buf.goal_dim;
  std::vector<float> logits(NA), probs(NA);
  CollectStats stats;

  for (int e = 0; e < buf.n_envs; ++e) {
    NavEnv& env = envs[e];
    buf.start_state[e] = states[e];
    bool just_reset = env.steps_taken() == 0 && env.prev_action() == kStartActionToken;

    for (int t = 0; t < buf.rollout_len; ++t) {
      size_t k = buf.at(e, t);
      const auto& ob = env.observation().values;
      const auto& goal = env.episode().goal_embedding.v;
      if (int(ob.size()) != od) throw ZsonError("observation dimension changed mid-rollout");
      if (int(goal.size()) != gd) throw ZsonError("goal dimension changed mid-rollout");
      std::copy(ob.begin(), ob.end(), buf.obs.begin() + k * od);
      std::copy(goal.begin(), goal.end(), buf.goals.begin() + k * gd);
      buf.prev_actions[k] = env.prev_action();
      buf.reset_before[k] = just_reset ? 1 : 0;
      just_reset = false;

      float value = 0.0f;
      net.forward(ob.data(), goal.data(), env.prev_action(), states[e],
                  logits.data(), &value);
      softmax(logits.data(), NA, probs.data());
      int a = env.rng().categorical(probs.data(), NA);
      buf.actions[k] = a;
      buf.logp[k] = log_prob(logits.data(), NA, a);
      buf.value[k] = value;

      EnvStepResult sr = env.step(Action(a));
      buf.reward[k] = sr.reward;
      buf.done[k] = sr.done ? 1 : 0;
      stats.reward_sum += sr.reward;
      stats.steps += 1;
      if (sr.done) {
        stats.episodes += 1;
        if (sr.success) stats.successes += 1;
        stats.episode_outcomes.push_back(sr.success ? 1 : 0);
        env.reset();
        states[e].zero();
        just_reset = true;
      }
    }

    // V(s_T) for the truncated tail; forward on a copy so the carried state
    // is not advanced twice
    RecurrentState<float> tmp = states[e];
    float bv = 0.0f;
    net.forward(env.observation().values.data(),
                env.episode().goal_embedding.v.data(), env.prev_action(), tmp,
                logits.data(), &bv);
    buf.bootstrap_value[e] = bv;
  }
  return stats;
}

}  // namespace zson
