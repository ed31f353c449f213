#include "zson/config.hpp"

#include <set>

#include "zson/errors.hpp"
#include "zson/serialize.hpp"

namespace zson {

using nlohmann::json;

namespace {

// Tracks which keys were consumed so leftovers can be reported by path.
class Fields {
 public:
  Fields(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object())
      throw ConfigError(path("") + "expected a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(path(key) + "expected a boolean");
        out = it->get<bool>();
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer() && !it->is_number_unsigned())
          throw ConfigError(path(key) + "expected an integer");
        out = it->get<T>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw ConfigError(path(key) + "expected a number");
        out = T(it->get<double>());
      } else {
        out = it->get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(path(key) + e.what());
    }
  }

  const json* object(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    if (!it->is_object()) throw ConfigError(path(key) + "expected a JSON object");
    return &*it;
  }

  std::vector<std::string> string_list(const char* key, bool* present = nullptr) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (present) *present = it != j_.end();
    if (it == j_.end()) return {};
    if (!it->is_array()) throw ConfigError(path(key) + "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) throw ConfigError(path(key) + "expected an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k))
        throw ConfigError(path(k.c_str()) + "unknown field");
  }

  std::string path(const char* key) const {
    std::string p = prefix_.empty() ? "" : prefix_ + ".";
    if (*key) p += std::string(key) + ": ";
    return p;
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void read_kin(const json& j, const std::string& prefix, KinematicsConfig& kin) {
  Fields f(j, prefix);
  f.read("step_size", kin.step_size);
  f.read("turn_angle", kin.turn_angle);
  f.read("success_radius", kin.success_radius);
  f.read("hfov", kin.hfov);
  f.read("view_range", kin.view_range);
  f.read("n_view_bins", kin.n_view_bins);
  f.finish();
}

void read_reward(const json& j, const std::string& prefix, RewardConfig& rc) {
  Fields f(j, prefix);
  f.read("r_success", rc.r_success);
  f.read("r_angle_success", rc.r_angle_success);
  f.read("r_slack", rc.r_slack);
  f.read("success_radius", rc.success_radius);
  f.read("angle_threshold", rc.angle_threshold);
  f.read("atg_gate_radius", rc.atg_gate_radius);
  f.finish();
}

}  // namespace

TrainerConfig trainer_config_from_json(const json& j) {
  TrainerConfig c;
  Fields f(j, "");
  f.read("n_envs", c.n_envs);
  f.read("rollout_len", c.rollout_len);
  f.read("ppo_epochs", c.ppo_epochs);
  f.read("minibatches", c.minibatches);
  f.read("clip", c.clip);
  f.read("gamma", c.gamma);
  f.read("tau", c.tau);
  f.read("value_coef", c.value_coef);
  f.read("entropy_coef", c.entropy_coef);
  f.read("max_grad_norm", c.max_grad_norm);
  f.read("lr", c.lr);
  f.read("weight_decay", c.weight_decay);
  f.read("adam_eps", c.adam_eps);
  f.read("total_steps", c.total_steps);
  f.read("seed", c.seed);
  f.read("normalize_advantage", c.normalize_advantage);
  f.read("obs_hidden", c.obs_hidden);
  f.read("rnn_hidden", c.rnn_hidden);
  f.read("act_emb_dim", c.act_emb_dim);
  f.read("rnn_layers", c.rnn_layers);
  f.read("max_episode_steps", c.max_episode_steps);
  f.read("checkpoint_every", c.checkpoint_every);
  f.read("val_every", c.val_every);
  f.read("val_episodes", c.val_episodes);
  if (const json* k = f.object("kin")) read_kin(*k, "kin", c.kin);
  if (const json* r = f.object("reward")) read_reward(*r, "reward", c.reward);
  f.finish();
  c.validate();
  return c;
}

json trainer_config_to_json(const TrainerConfig& c) {
  json j;
  j["n_envs"] = c.n_envs;
  j["rollout_len"] = c.rollout_len;
  j["ppo_epochs"] = c.ppo_epochs;
  j["minibatches"] = c.minibatches;
  j["clip"] = c.clip;
  j["gamma"] = c.gamma;
  j["tau"] = c.tau;
  j["value_coef"] = c.value_coef;
  j["entropy_coef"] = c.entropy_coef;
  j["max_grad_norm"] = c.max_grad_norm;
  j["lr"] = c.lr;
  j["weight_decay"] = c.weight_decay;
  j["adam_eps"] = c.adam_eps;
  j["total_steps"] = c.total_steps;
  j["seed"] = c.seed;
  j["normalize_advantage"] = c.normalize_advantage;
  j["obs_hidden"] = c.obs_hidden;
  j["rnn_hidden"] = c.rnn_hidden;
  j["act_emb_dim"] = c.act_emb_dim;
  j["rnn_layers"] = c.rnn_layers;
  j["max_episode_steps"] = c.max_episode_steps;
  j["checkpoint_every"] = c.checkpoint_every;
  j["val_every"] = c.val_every;
  j["val_episodes"] = c.val_episodes;
  j["kin"] = {{"step_size", c.kin.step_size},
              {"turn_angle", c.kin.turn_angle},
              {"success_radius", c.kin.success_radius},
              {"hfov", c.kin.hfov},
              {"view_range", c.kin.view_range},
              {"n_view_bins", c.kin.n_view_bins}};
  j["reward"] = {{"r_success", c.reward.r_success},
                 {"r_angle_success", c.reward.r_angle_success},
                 {"r_slack", c.reward.r_slack},
                 {"success_radius", c.reward.success_radius},
                 {"angle_threshold", c.reward.angle_threshold},
                 {"atg_gate_radius", c.reward.atg_gate_radius}};
  return j;
}

TrainerConfig load_trainer_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return trainer_config_from_json(j);
}

WorldGenParams worldgen_params_from_json(const json& j) {
  WorldGenParams p;
  Fields f(j, "");
  f.read("width", p.width);
  f.read("height", p.height);
  f.read("cell_size", p.cell_size);
  f.read("min_rooms", p.min_rooms);
  f.read("max_rooms", p.max_rooms);
  f.read("min_objects_per_room", p.min_objects_per_room);
  f.read("max_objects_per_room", p.max_objects_per_room);
  f.read("min_room_extent", p.min_room_extent);
  f.read("max_attempts", p.max_attempts);
  bool dist_present = false;
  f.read("distinct_room_concepts", p.distinct_room_concepts);
  p.per_room_objects = f.string_list("per_room_objects", &dist_present);
  bool rp = false, op = false;
  auto rooms = f.string_list("room_concept_pool", &rp);
  auto objs = f.string_list("object_concept_pool", &op);
  if (rp) p.room_concept_pool = rooms;
  if (op) p.object_concept_pool = objs;
  if (const json* v = f.object("vocab")) {
    Fields vf(*v, "vocab");
    auto vo = vf.string_list("objects");
    auto vr = vf.string_list("rooms");
    vf.finish();
    if (!vo.empty()) p.vocab.object_concepts = vo;
    if (!vr.empty()) p.vocab.room_concepts = vr;
    p.vocab.validate();
  }
  f.finish();
  p.validate();
  return p;
}

json worldgen_params_to_json(const WorldGenParams& p) {
  json j;
  j["width"] = p.width;
  j["height"] = p.height;
  j["cell_size"] = p.cell_size;
  j["min_rooms"] = p.min_rooms;
  j["max_rooms"] = p.max_rooms;
  j["min_objects_per_room"] = p.min_objects_per_room;
  j["max_objects_per_room"] = p.max_objects_per_room;
  j["min_room_extent"] = p.min_room_extent;
  j["max_attempts"] = p.max_attempts;
  j["distinct_room_concepts"] = p.distinct_room_concepts;
  j["per_room_objects"] = p.per_room_objects;
  j["room_concept_pool"] = p.room_concept_pool;
  j["object_concept_pool"] = p.object_concept_pool;
  j["vocab"] = {{"objects", p.vocab.object_concepts},
                {"rooms", p.vocab.room_concepts}};
  return j;
}

WorldGenParams load_worldgen_params(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return worldgen_params_from_json(j);
}

}  // namespace zson
