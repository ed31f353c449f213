#include "zson/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zson/errors.hpp"
#include "zson/geometry.hpp"

namespace zson {

using nlohmann::json;

double spl(bool success, double shortest, double path) {
  if (shortest < 0.0 || path < 0.0)
    throw ZsonError("path lengths must be nonnegative");
  if (!success) return 0.0;
  double denom = std::max(path, shortest);
  if (denom == 0.0) return 1.0;  // stopped in place at the goal
  return shortest / denom;
}

namespace {

// mean and population standard deviation
void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / double(xs.size()));
}

// Shared episode loop; `policy` picks an action from the logits (or from
// nothing, for the random baseline).
template <typename PickAction>
EpisodeOutcome roll_episode(const WorldSet& worlds,
                            const ConceptVocabulary& vocab, const Episode& ep,
                            const EnvConfig& cfg, uint64_t seed,
                            PickAction&& pick) {
  NavEnv env(worlds, vocab, nullptr, cfg, seed, 0);
  env.load_episode(ep);
  EpisodeOutcome out;
  out.id = ep.id;
  bool success = false;
  double path = 0.0;
  while (true) {
    Vec2 before = env.pose().position;
    int a = pick(env);
    EnvStepResult sr = env.step(Action(a));
    path += norm(env.pose().position - before);
    if (sr.done) {
      success = sr.success;
      break;
    }
  }
  out.success = success;
  out.path_length = path;
  out.steps = env.steps_taken();
  out.stop_pose = env.pose();
  out.spl = spl(success, ep.shortest_path, path);
  auto room = room_concept_of(ep, vocab);
  if (ep.kind == GoalKind::OBJECT && room) {
    out.has_room_goal = true;
    const GridWorld& w = env.world();
    int ri = w.room_index_at(env.pose().position);
    out.room_correct =
        success && ri >= 0 && w.rooms[size_t(ri)].room_concept == *room;
  }
  return out;
}

struct NetPolicy {
  const PolicyNetwork<float>* net;
  RecurrentState<float> state;
  bool greedy;
  std::vector<float> logits, probs;

  explicit NetPolicy(const PolicyNetwork<float>& n, bool g)
      : net(&n),
        state(n.initial_state()),
        greedy(g),
        logits(size_t(n.cfg.n_actions)),
        probs(size_t(n.cfg.n_actions)) {}

  int operator()(NavEnv& env) {
    const int NA = net->cfg.n_actions;
    if (env.episode().goal_embedding.dim() != net->cfg.goal_dim)
      throw ZsonError("goal embedding dimension " +
                      std::to_string(env.episode().goal_embedding.dim()) +
                      " does not match the network's " +
                      std::to_string(net->cfg.goal_dim));
    if (int(env.observation().values.size()) != net->cfg.obs_dim)
      throw ZsonError("observation dimension " +
                      std::to_string(env.observation().values.size()) +
                      " does not match the network's " +
                      std::to_string(net->cfg.obs_dim));
    net->forward(env.observation().values.data(),
                 env.episode().goal_embedding.v.data(), env.prev_action(),
                 state, logits.data(), nullptr);
    if (greedy)
      return int(std::max_element(logits.begin(), logits.end()) -
                 logits.begin());
    softmax(logits.data(), NA, probs.data());
    return env.rng().categorical(probs.data(), NA);
  }
};

template <typename MakePolicy>
EvalReport evaluate_impl(const WorldSet& worlds, const ConceptVocabulary& vocab,
                         const EpisodeDataset& ds, const EvalConfig& cfg,
                         uint64_t base_seed, MakePolicy&& make_policy,
                         std::vector<EpisodeOutcome>* traces) {
  if (ds.empty()) throw ZsonError("evaluation dataset is empty");
  GoalKind kind = ds.episodes.front().kind;
  for (const auto& ep : ds.episodes)
    if (ep.kind != kind)
      throw ZsonError("evaluation dataset mixes goal kinds (episode " + ep.id +
                      ")");
  if (cfg.trials < 1) throw ConfigError("trials must be positive");

  EvalReport rep;
  rep.task = kind == GoalKind::IMAGE ? "imagenav" : "objectnav";
  rep.n_episodes = int(ds.size());
  rep.trials = cfg.trials;
  rep.vocab_hash = vocab.hash();

  for (int trial = 0; trial < cfg.trials; ++trial) {
    uint64_t trial_seed = base_seed + uint64_t(trial);
    int successes = 0;
    double spl_sum = 0.0;
    for (const auto& ep : ds.episodes) {
      auto policy = make_policy();
      EpisodeOutcome o =
          roll_episode(worlds, vocab, ep, cfg.env,
                       stream_seed(trial_seed, fnv1a64(ep.id)), policy);
      o.trial = trial;
      successes += o.success ? 1 : 0;
      spl_sum += o.spl;
      if (ep.tier) {
        auto& g = rep.per_tier[tier_name(*ep.tier)];
        g.n += 1;
        g.successes += o.success ? 1 : 0;
        g.spl_sum += o.spl;
      }
      if (kind == GoalKind::OBJECT) {
        std::string label;
        for (const auto& c : ep.goal_concepts)
          label += (label.empty() ? "" : "+") + c;
        auto& g = rep.per_category[label];
        g.n += 1;
        g.successes += o.success ? 1 : 0;
        g.spl_sum += o.spl;
      }
      if (o.has_room_goal && o.success) {
        rep.room_goal_successes += 1;
        if (o.room_correct) rep.room_correct_successes += 1;
      }
      if (traces) traces->push_back(o);
    }
    rep.trial_sr.push_back(double(successes) / double(ds.size()));
    rep.trial_spl.push_back(spl_sum / double(ds.size()));
  }
  mean_std(rep.trial_sr, rep.sr_mean, rep.sr_std);
  mean_std(rep.trial_spl, rep.spl_mean, rep.spl_std);
  if (rep.room_goal_successes > 0)
    rep.room_correct_rate =
        double(rep.room_correct_successes) / double(rep.room_goal_successes);
  else {
    bool any_room_goal = false;
    for (const auto& ep : ds.episodes)
      if (kind == GoalKind::OBJECT && room_concept_of(ep, vocab))
        any_room_goal = true;
    rep.room_correct_rate = any_room_goal ? 0.0 : -1.0;
  }
  return rep;
}

}  // namespace

EpisodeOutcome run_episode(const PolicyNetwork<float>& net,
                           const WorldSet& worlds,
                           const ConceptVocabulary& vocab, const Episode& ep,
                           const EnvConfig& cfg, uint64_t seed, bool greedy) {
  NetPolicy policy(net, greedy);
  return roll_episode(worlds, vocab, ep, cfg, seed, policy);
}

EvalReport evaluate(const PolicyNetwork<float>& net, const WorldSet& worlds,
                    const ConceptVocabulary& vocab, const EpisodeDataset& ds,
                    const EvalConfig& cfg, uint64_t base_seed,
                    std::vector<EpisodeOutcome>* traces) {
  return evaluate_impl(
      worlds, vocab, ds, cfg, base_seed,
      [&] { return NetPolicy(net, cfg.greedy); }, traces);
}

EvalReport evaluate_random(const WorldSet& worlds,
                           const ConceptVocabulary& vocab,
                           const EpisodeDataset& ds, const EvalConfig& cfg,
                           uint64_t base_seed) {
  auto make = [] {
    return [](NavEnv& env) { return int(env.rng().uniform_int(kNumActions)); };
  };
  return evaluate_impl(worlds, vocab, ds, cfg, base_seed, make, nullptr);
}

double greedy_success_rate(const PolicyNetwork<float>& net,
                           const WorldSet& worlds,
                           const ConceptVocabulary& vocab,
                           const EpisodeDataset& ds, const EnvConfig& env_cfg,
                           uint64_t seed, int max_episodes) {
  if (ds.empty()) throw ZsonError("validation dataset is empty");
  int n = std::min<int>(max_episodes, int(ds.size()));
  int successes = 0;
  for (int i = 0; i < n; ++i) {
    EpisodeOutcome o =
        run_episode(net, worlds, vocab, ds.episodes[size_t(i)], env_cfg,
                    stream_seed(seed, fnv1a64(ds.episodes[size_t(i)].id)),
                    /*greedy=*/true);
    successes += o.success ? 1 : 0;
  }
  return double(successes) / double(n);
}

ZeroShotResult zero_shot_protocol(
    const PolicyNetwork<float>& net, const WorldSet& eval_worlds,
    const std::vector<std::string>& train_world_ids,
    const std::vector<std::vector<std::string>>& categories,
    const EncoderParams& enc, const ZeroShotConfig& cfg, uint64_t eval_seed,
    std::vector<EpisodeOutcome>* image_traces,
    std::vector<EpisodeOutcome>* object_traces) {
  for (const auto& id : eval_worlds.ids())
    for (const auto& tid : train_world_ids)
      if (id == tid)
        throw ZsonError("world id '" + id +
                        "' appears in both training and evaluation sets");

  ZeroShotResult res;
  res.image_ds.seed = cfg.episode_seed;
  res.image_ds.encoder_hash = enc.hash();
  res.object_ds.seed = cfg.episode_seed;
  res.object_ds.encoder_hash = enc.hash();
  for (const auto& id : eval_worlds.ids()) {
    const GridWorld& w = eval_worlds.get(id);
    res.image_ds.append(sample_imagenav_episodes(w, cfg.per_tier, enc,
                                                 cfg.episode_seed,
                                                 cfg.eval.env.kin));
    res.object_ds.append(sample_objectnav_episodes(w, cfg.n_object, categories,
                                                   enc, cfg.episode_seed));
  }

  res.imagenav = evaluate(net, eval_worlds, enc.vocab, res.image_ds, cfg.eval,
                          eval_seed, image_traces);
  res.objectnav = evaluate(net, eval_worlds, enc.vocab, res.object_ds,
                           cfg.eval, eval_seed, object_traces);
  res.transfer_gap = res.imagenav.sr_mean - res.objectnav.sr_mean;
  return res;
}

static json group_to_json(const std::map<std::string, GroupStats>& m) {
  json j = json::object();
  for (const auto& [k, g] : m)
    j[k] = {{"n", g.n}, {"sr", g.sr()}, {"spl", g.spl()}};
  return j;
}

json EvalReport::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["task"] = task;
  j["n_episodes"] = n_episodes;
  j["trials"] = trials;
  j["sr_mean"] = sr_mean;
  j["sr_std"] = sr_std;
  j["spl_mean"] = spl_mean;
  j["spl_std"] = spl_std;
  j["trial_sr"] = trial_sr;
  j["trial_spl"] = trial_spl;
  j["per_tier"] = group_to_json(per_tier);
  j["per_category"] = group_to_json(per_category);
  j["room_goal_successes"] = room_goal_successes;
  j["room_correct_successes"] = room_correct_successes;
  j["room_correct_rate"] = room_correct_rate;
  j["vocab_hash"] = hex64(vocab_hash);
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  try {
    if (j.at("schema_version").get<int>() != 1)
      throw ZsonError("unsupported report schema version");
    r.task = j.at("task").get<std::string>();
    r.n_episodes = j.at("n_episodes").get<int>();
    r.trials = j.at("trials").get<int>();
    r.sr_mean = j.at("sr_mean").get<double>();
    r.sr_std = j.at("sr_std").get<double>();
    r.spl_mean = j.at("spl_mean").get<double>();
    r.spl_std = j.at("spl_std").get<double>();
    r.trial_sr = j.at("trial_sr").get<std::vector<double>>();
    r.trial_spl = j.at("trial_spl").get<std::vector<double>>();
    for (const auto& [k, v] : j.at("per_tier").items()) {
      GroupStats g;
      g.n = v.at("n").get<int>();
      g.successes = int(std::lround(v.at("sr").get<double>() * g.n));
      g.spl_sum = v.at("spl").get<double>() * g.n;
      r.per_tier[k] = g;
    }
    for (const auto& [k, v] : j.at("per_category").items()) {
      GroupStats g;
      g.n = v.at("n").get<int>();
      g.successes = int(std::lround(v.at("sr").get<double>() * g.n));
      g.spl_sum = v.at("spl").get<double>() * g.n;
      r.per_category[k] = g;
    }
    r.room_goal_successes = j.at("room_goal_successes").get<int>();
    r.room_correct_successes = j.at("room_correct_successes").get<int>();
    r.room_correct_rate = j.at("room_correct_rate").get<double>();
    r.vocab_hash = std::stoull(j.at("vocab_hash").get<std::string>(), nullptr, 16);
  } catch (const json::exception& e) {
    throw ZsonError(std::string("malformed evaluation report: ") + e.what());
  }
  return r;
}

std::string EvalReport::to_csv() const {
  std::string out = "task,row,sr,spl\n";
  char line[160];
  for (size_t t = 0; t < trial_sr.size(); ++t) {
    std::snprintf(line, sizeof(line), "%s,trial%zu,%.9g,%.9g\n", task.c_str(),
                  t, trial_sr[t], trial_spl[t]);
    out += line;
  }
  std::snprintf(line, sizeof(line), "%s,mean,%.9g,%.9g\n", task.c_str(),
                sr_mean, spl_mean);
  out += line;
  std::snprintf(line, sizeof(line), "%s,std,%.9g,%.9g\n", task.c_str(), sr_std,
                spl_std);
  out += line;
  return out;
}

}  // namespace zson
