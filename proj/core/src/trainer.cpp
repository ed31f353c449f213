#include "zson/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "zson/errors.hpp"
#include "zson/evaluate.hpp"
#include "zson/logging.hpp"
#include "zson/sensing.hpp"

namespace zson {

const char* kMetricsHeader =
    "step,updates,mean_reward,train_sr,policy_loss,value_loss,entropy,"
    "grad_norm";

void TrainerConfig::validate() const {
  if (n_envs < 1 || rollout_len < 1 || ppo_epochs < 1 || minibatches < 1)
    throw ConfigError("n_envs, rollout_len, ppo_epochs, minibatches must be positive");
  if (n_envs % minibatches != 0)
    throw ConfigError("minibatches must divide n_envs (" +
                      std::to_string(minibatches) + " vs " +
                      std::to_string(n_envs) + ")");
  if (clip <= 0.0f || gamma <= 0.0f || gamma > 1.0f || tau < 0.0f || tau > 1.0f)
    throw ConfigError("clip must be > 0, gamma in (0,1], tau in [0,1]");
  if (lr < 0.0f || weight_decay < 0.0f || adam_eps <= 0.0f)
    throw ConfigError("lr and weight_decay must be >= 0, adam_eps > 0");
  if (max_grad_norm <= 0.0f) throw ConfigError("max_grad_norm must be positive");
  if (total_steps < 1) throw ConfigError("total_steps must be positive");
  if (obs_hidden < 1 || rnn_hidden < 1 || act_emb_dim < 1 || rnn_layers < 1)
    throw ConfigError("network sizes must be positive");
  if (max_episode_steps < 1) throw ConfigError("max_episode_steps must be positive");
  if (val_episodes < 1) throw ConfigError("val_episodes must be positive");
  if (kin.step_size <= 0.0 || kin.n_view_bins < 1)
    throw ConfigError("step_size must be positive and n_view_bins at least 1");
}

void compute_gae(const RolloutBuffer& buf, float gamma, float tau,
                 std::vector<float>& advantages, std::vector<float>& returns) {
  advantages.assign(size_t(buf.size()), 0.0f);
  returns.assign(size_t(buf.size()), 0.0f);
  for (int e = 0; e < buf.n_envs; ++e) {
    double acc = 0.0;
    double next_v = buf.bootstrap_value[e];
    for (int t = buf.rollout_len - 1; t >= 0; --t) {
      size_t k = buf.at(e, t);
      double nonterm = buf.done[k] ? 0.0 : 1.0;
      double delta = double(buf.reward[k]) + double(gamma) * next_v * nonterm -
                     double(buf.value[k]);
      acc = delta + double(gamma) * double(tau) * nonterm * acc;
      advantages[k] = float(acc);
      returns[k] = float(acc + double(buf.value[k]));
      next_v = double(buf.value[k]);
    }
  }
}

void normalize_advantages(std::vector<float>& advantages) {
  size_t n = advantages.size();
  if (n < 2) return;
  double sum = 0.0;
  for (float a : advantages) sum += a;
  double mean = sum / double(n);
  double var = 0.0;
  for (float a : advantages) var += (double(a) - mean) * (double(a) - mean);
  var /= double(n);
  if (var <= 0.0) return;
  double inv_std = 1.0 / std::sqrt(var);
  for (float& a : advantages) a = float((double(a) - mean) * inv_std);
}

UpdateStats ppo_update(PolicyNetwork<float>& net, AdamState& adam,
                       const RolloutBuffer& buf,
                       const std::vector<float>& advantages,
                       const std::vector<float>& returns,
                       const TrainerConfig& cfg, int64_t update_index) {
  if (int(advantages.size()) != buf.size() || int(returns.size()) != buf.size())
    throw ZsonError("advantage/return buffers do not match the rollout");
  const int NA = net.cfg.n_actions;
  const int per_mb = buf.n_envs / cfg.minibatches;
  const int M = per_mb * buf.rollout_len;
  const AdamConfig acfg = cfg.adam();

  UpdateStats st;
  double pl_sum = 0.0, vl_sum = 0.0, ent_sum = 0.0, gn_sum = 0.0;
  int n_opt = 0;

  SequenceTape<float> tape(buf.rollout_len);
  std::vector<StepGrad<float>> grads(buf.rollout_len);
  for (auto& g : grads) g.dlogits.resize(NA);
  std::vector<float> logits(NA), dlp(NA), dent(NA);

  for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      net.zero_grad();
      double pl = 0.0, vl = 0.0, ent = 0.0;
      for (int e = mb * per_mb; e < (mb + 1) * per_mb; ++e) {
        RecurrentState<float> state = buf.start_state[e];
        for (int t = 0; t < buf.rollout_len; ++t) {
          size_t k = buf.at(e, t);
          if (buf.reset_before[k]) state.zero();
          StepTrace<float>& tr = tape[t];
          tr.reset_before = buf.reset_before[k] != 0;
          float value = 0.0f;
          net.forward(buf.obs.data() + k * buf.obs_dim,
                      buf.goals.data() + k * buf.goal_dim, buf.prev_actions[k],
                      state, logits.data(), &value, &tr);
          int a = buf.actions[k];
          float lp_new = log_prob(logits.data(), NA, a, dlp.data());
          float H = entropy(logits.data(), NA, dent.data());
          double A = double(advantages[k]);
          double ratio = std::exp(double(lp_new) - double(buf.logp[k]));
          double surr1 = ratio * A;
          double surr2 = std::clamp(ratio, 1.0 - double(cfg.clip),
                                    1.0 + double(cfg.clip)) * A;
          // min() picks surr1 on ties; outside the clip range the clamped
          // branch is constant in the parameters, so no gradient flows
          double dlp_coef = (surr1 <= surr2) ? (-A * ratio / M) : 0.0;
          float dverr = float(double(cfg.value_coef) *
                              (double(value) - double(returns[k])) / M);
          float ecoef = float(double(cfg.entropy_coef) / M);
          auto& dlogits = grads[t].dlogits;
          float pc = float(dlp_coef);
          for (int j = 0; j < NA; ++j)
            dlogits[j] = pc * dlp[j] - ecoef * dent[j];
          grads[t].dvalue = dverr;

          pl -= std::min(surr1, surr2);
          vl += 0.5 * (double(value) - double(returns[k])) *
                (double(value) - double(returns[k]));
          ent += double(H);
        }
        net.backward(tape, grads);
      }
      pl /= M;
      vl /= M;
      ent /= M;
      if (!std::isfinite(pl) || !std::isfinite(vl) || !std::isfinite(ent)) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "non-finite loss at update %lld epoch %d minibatch %d "
                      "(policy=%g value=%g entropy=%g)",
                      (long long)update_index, epoch, mb, pl, vl, ent);
        throw ZsonError(msg);
      }
      double gn = clip_grad_norm(net, double(cfg.max_grad_norm));
      if (!std::isfinite(gn)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "non-finite gradient norm at update %lld epoch %d "
                      "minibatch %d",
                      (long long)update_index, epoch, mb);
        throw ZsonError(msg);
      }
      adam_step(net, adam, acfg);
      pl_sum += pl;
      vl_sum += vl;
      ent_sum += ent;
      gn_sum += gn;
      n_opt += 1;
    }
  }
  st.policy_loss = pl_sum / n_opt;
  st.value_loss = vl_sum / n_opt;
  st.entropy = ent_sum / n_opt;
  st.grad_norm = gn_sum / n_opt;
  return st;
}

Trainer::Trainer(const WorldSet& worlds, const ConceptVocabulary& vocab,
                 const EpisodeDataset& dataset, const TrainerConfig& cfg)
    : cfg_(cfg), recent_outcomes_(100, 0) {
  cfg_.validate();
  if (dataset.empty()) throw ZsonError("training dataset is empty");

  NetConfig ncfg;
  ncfg.obs_dim = observation_dim(vocab, cfg_.kin);
  ncfg.goal_dim = dataset.episodes.front().goal_embedding.dim();
  ncfg.obs_hidden = cfg_.obs_hidden;
  ncfg.rnn_hidden = cfg_.rnn_hidden;
  ncfg.act_emb_dim = cfg_.act_emb_dim;
  ncfg.n_actions = kNumActions;
  ncfg.rnn_layers = cfg_.rnn_layers;
  net_ = std::make_unique<PolicyNetwork<float>>(ncfg);
  Rng init_rng(stream_seed(cfg_.seed, 0x6e6574696e6974ull));  // net-init stream
  net_->init(init_rng);
  adam_.init_like(*net_);

  EnvConfig ecfg{cfg_.kin, cfg_.reward, cfg_.max_episode_steps};
  envs_.reserve(size_t(cfg_.n_envs));
  for (int i = 0; i < cfg_.n_envs; ++i) {
    envs_.emplace_back(worlds, vocab, &dataset, ecfg, cfg_.seed, i);
    envs_.back().reset();
    states_.push_back(net_->initial_state());
  }
  buf_.resize(cfg_.n_envs, cfg_.rollout_len, ncfg.obs_dim, ncfg.goal_dim, ncfg);
}

double Trainer::recent_train_sr() const {
  if (recent_count_ == 0) return 0.0;
  int n = std::min(recent_count_, int(recent_outcomes_.size()));
  int s = 0;
  for (int i = 0; i < n; ++i) s += recent_outcomes_[i];
  return double(s) / double(n);
}

UpdateStats Trainer::update_once() {
  CollectStats cs = collect_rollouts(envs_, states_, *net_, buf_);
  for (uint8_t o : cs.episode_outcomes) {
    recent_outcomes_[recent_pos_] = o;
    recent_pos_ = (recent_pos_ + 1) % recent_outcomes_.size();
    recent_count_ += 1;
  }

  std::vector<float> adv, ret;
  compute_gae(buf_, cfg_.gamma, cfg_.tau, adv, ret);
  if (cfg_.normalize_advantage) normalize_advantages(adv);

  UpdateStats st = ppo_update(*net_, adam_, buf_, adv, ret, cfg_, updates_);
  env_steps_ += cs.steps;
  updates_ += 1;
  st.env_steps = env_steps_;
  st.updates = updates_;
  st.mean_reward = cs.steps > 0 ? cs.reward_sum / double(cs.steps) : 0.0;
  st.train_sr = recent_train_sr();
  return st;
}

TrainResult train(const WorldSet& worlds, const ConceptVocabulary& vocab,
                  const EpisodeDataset& dataset,
                  const EpisodeDataset* val_dataset, const TrainerConfig& cfg,
                  const std::string& out_dir, const std::string& resume_path) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Trainer tr(worlds, vocab, dataset, cfg);

  bool fresh = resume_path.empty();
  if (!fresh) {
    TrainProgress prog;
    load_checkpoint(resume_path, tr.net(), &tr.adam_state(), &prog);
    tr.set_progress(prog);
    log_info("resumed from " + resume_path + " at step " +
             std::to_string(prog.env_steps));
  }

  TrainResult out;
  out.metrics_path = out_dir + "/metrics.csv";
  out.latest_checkpoint = out_dir + "/ckpt_latest.bin";
  std::string best_path = out_dir + "/ckpt_best.bin";

  std::ofstream ml(out.metrics_path,
                   fresh ? std::ios::trunc : std::ios::app);
  if (!ml) throw ZsonError("cannot write " + out.metrics_path);
  if (fresh) ml << kMetricsHeader << "\n";

  EnvConfig ecfg{cfg.kin, cfg.reward, cfg.max_episode_steps};
  double best_sr = -1.0;
  auto save_latest = [&] {
    TrainProgress p = tr.progress();
    save_checkpoint(out.latest_checkpoint, tr.net(), &tr.adam_state(), &p);
  };
  auto run_validation = [&] {
    double sr = greedy_success_rate(tr.net(), worlds, vocab, *val_dataset,
                                    ecfg, stream_seed(cfg.seed, 0x76616cull),
                                    cfg.val_episodes);
    log_info("validation sr " + std::to_string(sr) + " at update " +
             std::to_string(tr.updates()));
    if (sr > best_sr) {
      best_sr = sr;
      TrainProgress p = tr.progress();
      save_checkpoint(best_path, tr.net(), &tr.adam_state(), &p);
      out.best_checkpoint = best_path;
    }
  };

  while (!tr.done()) {
    UpdateStats st = tr.update_once();
    char row[256];
    std::snprintf(row, sizeof(row),
                  "%lld,%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  (long long)st.env_steps, (long long)st.updates,
                  st.mean_reward, st.train_sr, st.policy_loss, st.value_loss,
                  st.entropy, st.grad_norm);
    ml << row;
    if (cfg.checkpoint_every > 0 && st.updates % cfg.checkpoint_every == 0)
      save_latest();
    if (val_dataset && cfg.val_every > 0 && st.updates % cfg.val_every == 0)
      run_validation();
  }
  save_latest();
  if (val_dataset && best_sr < 0.0) run_validation();
  ml.close();
  if (!ml) throw ZsonError("write failed for " + out.metrics_path);

  out.env_steps = tr.env_steps();
  out.updates = tr.updates();
  out.best_val_sr = best_sr;
  return out;
}

}  // namespace zson
