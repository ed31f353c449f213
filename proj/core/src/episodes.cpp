#include "zson/episodes.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "zson/errors.hpp"
#include "zson/rng.hpp"
#include "zson/sensing.hpp"
#include "zson/serialize.hpp"
#include "zson/version.hpp"

namespace zson {

using nlohmann::json;

const char* tier_name(Tier t) {
  switch (t) {
    case Tier::EASY: return "easy";
    case Tier::MEDIUM: return "medium";
    case Tier::HARD: return "hard";
  }
  return "?";
}

std::optional<Tier> tier_from_name(const std::string& name) {
  if (name == "easy") return Tier::EASY;
  if (name == "medium") return Tier::MEDIUM;
  if (name == "hard") return Tier::HARD;
  return std::nullopt;
}

std::pair<double, double> tier_range(Tier t) {
  switch (t) {
    case Tier::EASY: return {1.5, 3.0};
    case Tier::MEDIUM: return {3.0, 5.0};
    case Tier::HARD: return {5.0, 10.0};
  }
  return {0.0, 0.0};
}

bool in_tier(Tier t, double dist) {
  auto [lo, hi] = tier_range(t);
  if (t == Tier::HARD) return dist >= lo && dist <= hi;
  return dist >= lo && dist < hi;
}

void EpisodeDataset::append(const EpisodeDataset& other) {
  episodes.insert(episodes.end(), other.episodes.begin(), other.episodes.end());
}

namespace {

constexpr int kSampleRetryCap = 10000;

std::vector<std::pair<int, int>> free_cells(const GridWorld& w) {
  std::vector<std::pair<int, int>> cells;
  for (int r = 0; r < w.height; ++r)
    for (int c = 0; c < w.width; ++c)
      if (!w.blocked(r, c)) cells.emplace_back(r, c);
  return cells;
}

std::string episode_id(const std::string& world_id, const char* kind, int n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%s_%05d", kind, n);
  return world_id + buf;
}

}  // namespace

EpisodeDataset sample_imagenav_episodes(const GridWorld& world, int n_per_tier,
                                        const EncoderParams& enc, uint64_t seed,
                                        const KinematicsConfig& kin,
                                        const std::vector<Tier>& tiers) {
  if (n_per_tier < 1) throw ConfigError("sample_imagenav: n_per_tier must be >= 1");
  if (tiers.empty()) throw ConfigError("sample_imagenav: no tiers requested");
  static const int kGoalHeadings[4] = {0, 90, 180, 270};

  Rng rng(stream_seed(seed, fnv1a64(world.id)));
  auto cells = free_cells(world);
  if (cells.size() < 2) throw ZsonError("sample_imagenav: world has no free span");

  EpisodeDataset ds;
  ds.seed = seed;
  ds.encoder_hash = enc.hash();
  int ordinal = 0;

  for (Tier tier : tiers) {
    for (int k = 0; k < n_per_tier; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < kSampleRetryCap && !placed; ++attempt) {
        auto [sr, sc] = cells[size_t(rng.uniform_int(int(cells.size())))];
        auto [gr, gc] = cells[size_t(rng.uniform_int(int(cells.size())))];
        Vec2 start_pos = world.cell_center(sr, sc);
        Vec2 goal_pos = world.cell_center(gr, gc);
        DistanceField field = compute_distance_field(world, start_pos);
        double d = field.at(gr, gc);
        if (std::isinf(d) || !in_tier(tier, d)) continue;
        int start_heading = 30 * rng.uniform_int(12);
        for (int gh : kGoalHeadings) {
          Episode ep;
          ep.id = episode_id(world.id, "img", ordinal++);
          ep.world_id = world.id;
          ep.kind = GoalKind::IMAGE;
          ep.start = {start_pos, start_heading};
          ep.goal_pose = {goal_pos, gh};
          ep.tier = tier;
          ep.shortest_path = d;
          ConceptBag bag = visible_concept_bag(world, ep.goal_pose, kin);
          ep.goal_embedding = encode_image_view(bag, enc, rng.next_u64());
          ds.episodes.push_back(std::move(ep));
        }
        placed = true;
      }
      if (!placed)
        throw ZsonError(std::string("sample_imagenav: tier ") + tier_name(tier) +
                        " not realizable in world " + world.id + " after " +
                        std::to_string(kSampleRetryCap) + " samples");
    }
  }
  return ds;
}

EpisodeDataset sample_objectnav_episodes(
    const GridWorld& world, int n,
    const std::vector<std::vector<std::string>>& categories,
    const EncoderParams& enc, uint64_t seed, double min_start_dist) {
  if (n < 1) throw ConfigError("sample_objectnav: n must be >= 1");
  if (categories.empty()) throw ConfigError("sample_objectnav: no categories");

  // validate categories and pre-compute per-category nearest-instance fields
  struct CategoryInfo {
    std::vector<std::string> concepts;  // sorted unique
    std::string object_name;
    DistanceField min_field;
  };
  std::vector<CategoryInfo> infos;
  for (const auto& cat : categories) {
    CategoryInfo info;
    std::set<std::string> uniq(cat.begin(), cat.end());
    info.concepts.assign(uniq.begin(), uniq.end());
    if (info.concepts.empty())
      throw ConfigError("sample_objectnav: empty category");
    int n_obj = 0;
    for (const auto& name : info.concepts) {
      if (enc.vocab.object_index(name) >= 0) {
        info.object_name = name;
        ++n_obj;
      } else if (enc.vocab.room_index(name) < 0) {
        throw ZsonError("sample_objectnav: unknown concept '" + name + "'");
      }
    }
    if (n_obj != 1)
      throw ConfigError(
          "sample_objectnav: a category needs exactly one object concept "
          "(got " + std::to_string(n_obj) + ")");
    std::vector<std::pair<int, int>> instance_cells;
    for (const auto& obj : world.objects)
      if (obj.object_concept == info.object_name)
        instance_cells.emplace_back(world.cell_row(obj.position.y),
                                    world.cell_col(obj.position.x));
    if (instance_cells.empty())
      throw ZsonError("sample_objectnav: no instance of '" + info.object_name +
                      "' in world " + world.id);
    info.min_field = compute_distance_field_cells(world, instance_cells);
    infos.push_back(std::move(info));
  }

  Rng rng(stream_seed(seed, fnv1a64(world.id) ^ 0x6f626au));
  auto cells = free_cells(world);

  EpisodeDataset ds;
  ds.seed = seed;
  ds.encoder_hash = enc.hash();
  for (int i = 0; i < n; ++i) {
    const CategoryInfo& info = infos[size_t(i) % infos.size()];
    bool placed = false;
    for (int attempt = 0; attempt < kSampleRetryCap && !placed; ++attempt) {
      auto [sr, sc] = cells[size_t(rng.uniform_int(int(cells.size())))];
      double d = info.min_field.at(sr, sc);
      if (std::isinf(d) || d < min_start_dist) continue;
      Episode ep;
      ep.id = episode_id(world.id, "obj", i);
      ep.world_id = world.id;
      ep.kind = GoalKind::OBJECT;
      ep.start = {world.cell_center(sr, sc), 30 * rng.uniform_int(12)};
      ep.goal_concepts = info.concepts;
      ep.goal_embedding = encode_text(info.concepts, enc);
      ep.shortest_path = d;
      ds.episodes.push_back(std::move(ep));
      placed = true;
    }
    if (!placed)
      throw ZsonError("sample_objectnav: no start cell at distance >= " +
                      std::to_string(min_start_dist) + " from '" +
                      info.object_name + "' in world " + world.id);
  }
  return ds;
}

std::string object_concept_of(const Episode& ep, const ConceptVocabulary& vocab) {
  for (const auto& name : ep.goal_concepts)
    if (vocab.object_index(name) >= 0) return name;
  throw ZsonError("episode " + ep.id + " has no object concept in its goal");
}

std::optional<std::string> room_concept_of(const Episode& ep,
                                           const ConceptVocabulary& vocab) {
  for (const auto& name : ep.goal_concepts)
    if (vocab.room_index(name) >= 0) return name;
  return std::nullopt;
}

std::string episode_to_jsonl(const Episode& ep) {
  json j;
  j["v"] = kSchemaVersion;
  j["id"] = ep.id;
  j["world_id"] = ep.world_id;
  j["kind"] = ep.kind == GoalKind::IMAGE ? "image" : "object";
  j["start"] = {{"x", ep.start.position.x},
                {"y", ep.start.position.y},
                {"h", ep.start.heading}};
  if (ep.kind == GoalKind::IMAGE) {
    j["goal"] = {{"x", ep.goal_pose.position.x},
                 {"y", ep.goal_pose.position.y},
                 {"h", ep.goal_pose.heading}};
    j["tier"] = tier_name(*ep.tier);
  } else {
    j["goal"] = {{"concepts", ep.goal_concepts}};
    j["tier"] = nullptr;
  }
  j["spl_len"] = ep.shortest_path;
  j["emb"] = floats_to_base64(ep.goal_embedding.v);
  return j.dump();
}

Episode episode_from_jsonl(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ZsonError(std::string("episode: parse error: ") + e.what());
  }
  try {
    int v = j.at("v").get<int>();
    if (v != kSchemaVersion)
      throw ZsonError("episode: schema v" + std::to_string(v) +
                      " found, expected v" + std::to_string(kSchemaVersion));
    Episode ep;
    ep.id = j.at("id").get<std::string>();
    ep.world_id = j.at("world_id").get<std::string>();
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "image")
      ep.kind = GoalKind::IMAGE;
    else if (kind == "object")
      ep.kind = GoalKind::OBJECT;
    else
      throw ZsonError("episode: unknown kind '" + kind + "'");
    const json& s = j.at("start");
    ep.start = {{s.at("x").get<double>(), s.at("y").get<double>()},
                s.at("h").get<int>()};
    const json& g = j.at("goal");
    if (ep.kind == GoalKind::IMAGE) {
      ep.goal_pose = {{g.at("x").get<double>(), g.at("y").get<double>()},
                      g.at("h").get<int>()};
      std::string tn = j.at("tier").get<std::string>();
      ep.tier = tier_from_name(tn);
      if (!ep.tier) throw ZsonError("episode: unknown tier '" + tn + "'");
    } else {
      ep.goal_concepts = g.at("concepts").get<std::vector<std::string>>();
      std::sort(ep.goal_concepts.begin(), ep.goal_concepts.end());
    }
    ep.shortest_path = j.at("spl_len").get<double>();
    ep.goal_embedding.v = base64_to_floats(j.at("emb").get<std::string>());
    return ep;
  } catch (const json::exception& e) {
    throw ZsonError(std::string("episode: ") + e.what());
  }
}

void save_dataset(const EpisodeDataset& ds, const std::string& path) {
  std::ostringstream out;
  for (const auto& ep : ds.episodes) out << episode_to_jsonl(ep) << "\n";
  write_text_file(path, out.str());
}

EpisodeDataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ZsonError("cannot open dataset: " + path);
  EpisodeDataset ds;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      ds.episodes.push_back(episode_from_jsonl(line));
    } catch (const ZsonError& e) {
      throw ZsonError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

}  // namespace zson
