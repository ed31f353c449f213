// zson: procedural navigation worlds, goal-embedding datasets, PPO training,
// and zero-shot object-goal evaluation, behind one subcommand CLI.

#include <fcntl.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zson/ablation.hpp"
#include "zson/checkpoint.hpp"
#include "zson/config.hpp"
#include "zson/embedding.hpp"
#include "zson/episodes.hpp"
#include "zson/errors.hpp"
#include "zson/evaluate.hpp"
#include "zson/logging.hpp"
#include "zson/manifest.hpp"
#include "zson/serialize.hpp"
#include "zson/trainer.hpp"
#include "zson/version.hpp"
#include "zson/worldgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zson;

namespace {

// Held for the lifetime of a subcommand that writes into an out-dir.
// O_EXCL creation means a second concurrent run refuses instead of racing.
class OutDirLock {
 public:
  explicit OutDirLock(const std::string& dir) {
    fs::create_directories(dir);
    path_ = dir + "/.zson.lock";
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw ZsonError("output directory is locked (" + path_ +
                      " exists); remove it if no other run is active");
    ::close(fd);
    held_ = true;
  }
  ~OutDirLock() {
    if (held_) ::unlink(path_.c_str());
  }
  OutDirLock(const OutDirLock&) = delete;
  OutDirLock& operator=(const OutDirLock&) = delete;

 private:
  std::string path_;
  bool held_ = false;
};

void require_writable_dir(const std::string& dir, bool force) {
  if (fs::exists(dir) && fs::is_directory(dir) && !fs::is_empty(dir) && !force)
    throw ConfigError("output directory '" + dir +
                      "' is not empty (use --force to write anyway)");
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw ConfigError("'" + dir + "' exists and is not a directory");
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::vector<std::string>> parse_categories(const std::string& s) {
  std::vector<std::vector<std::string>> cats;
  for (const auto& part : split(s, ',')) {
    if (part.empty()) throw ConfigError("empty category in '" + s + "'");
    std::vector<std::string> concepts;
    for (const auto& c : split(part, '+')) {
      if (c.empty()) throw ConfigError("empty concept in category '" + part + "'");
      concepts.push_back(c);
    }
    cats.push_back(concepts);
  }
  return cats;
}

ConceptVocabulary vocab_from_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  ConceptVocabulary v;
  try {
    v.object_concepts = j.at("objects").get<std::vector<std::string>>();
    v.room_concepts = j.at("rooms").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  v.validate();
  return v;
}

void write_traces(const std::string& path,
                  const std::vector<EpisodeOutcome>& traces,
                  const char* run_label = nullptr) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ZsonError("cannot write " + path);
  for (const auto& t : traces) {
    json j;
    if (run_label) j["run"] = run_label;
    j["id"] = t.id;
    j["trial"] = t.trial;
    j["steps"] = t.steps;
    j["success"] = t.success;
    j["spl"] = t.spl;
    j["path_length"] = t.path_length;
    j["stop"] = {{"x", t.stop_pose.position.x},
                 {"y", t.stop_pose.position.y},
                 {"h", t.stop_pose.heading}};
    if (t.has_room_goal) j["room_correct"] = t.room_correct;
    os << j.dump() << "\n";
  }
  if (!os) throw ZsonError("write failed for " + path);
}

struct CommonArgs {
  std::vector<std::string> argv;  // original args for the manifest
};

// ---------------------------------------------------------------- gen-worlds

struct GenWorldsArgs {
  int n = 0;
  uint64_t seed = 0;
  std::string out, params_path;
  bool force = false;
};

int cmd_gen_worlds(const GenWorldsArgs& a, const CommonArgs& common) {
  WorldGenParams params;
  if (!a.params_path.empty()) params = load_worldgen_params(a.params_path);
  params.validate();
  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  RunManifest m;
  m.command = "gen-worlds";
  m.args = common.argv;
  m.seeds["seed"] = a.seed;
  if (!a.params_path.empty())
    m.inputs[a.params_path] = file_hash_hex(a.params_path);
  std::vector<std::string> files;
  json ids = json::array();
  for (int i = 0; i < a.n; ++i) {
    GridWorld w = generate_world(stream_seed(a.seed, uint64_t(i)), params);
    std::string fname = w.id + ".json";
    save_world(w, a.out + "/" + fname);
    files.push_back(fname);
    ids.push_back(w.id);
  }
  m.extra["world_ids"] = ids;
  m.extra["params"] = worldgen_params_to_json(params);
  write_manifest(a.out, m, files);
  std::cout << "wrote " << a.n << " worlds to " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------- gen-encoder

struct GenEncoderArgs {
  int dim = 64;
  uint64_t seed = 0;
  double sigma = 0.1;
  std::string out, vocab_path;
  bool force = false;
};

// The JSONL dataset format has no encoder provenance field, so compatibility
// is checked functionally: dimensions must agree everywhere, and object-goal
// embeddings (which are noiseless) must reproduce bitwise from the encoder.
void check_encoder_matches(const EpisodeDataset& ds, const EncoderParams& enc,
                           const std::string& dataset_path) {
  for (const auto& ep : ds.episodes) {
    if (ep.goal_embedding.dim() != enc.dim)
      throw ConfigError(dataset_path + ": goal embeddings are " +
                        std::to_string(ep.goal_embedding.dim()) +
                        "-d but the encoder is " + std::to_string(enc.dim) +
                        "-d");
    if (ep.kind != GoalKind::OBJECT) continue;
    SemanticGoal again;
    try {
      again = encode_text(ep.goal_concepts, enc);
    } catch (const ZsonError& e) {
      throw ConfigError(dataset_path + ": episode " + ep.id +
                        " cannot be re-encoded with this encoder: " + e.what());
    }
    if (!(again == ep.goal_embedding))
      throw ConfigError(dataset_path + ": episode " + ep.id +
                        " embedding was not produced by this encoder");
  }
}

int cmd_gen_encoder(const GenEncoderArgs& a, const CommonArgs& common) {
  ConceptVocabulary vocab = a.vocab_path.empty()
                                ? ConceptVocabulary::defaults()
                                : vocab_from_file(a.vocab_path);
  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);
  EncoderParams enc = EncoderParams::create(vocab, a.dim, a.seed, a.sigma);
  save_encoder(enc, a.out + "/encoder.json");

  RunManifest m;
  m.command = "gen-encoder";
  m.args = common.argv;
  m.seeds["seed"] = a.seed;
  if (!a.vocab_path.empty())
    m.inputs[a.vocab_path] = file_hash_hex(a.vocab_path);
  m.extra["dim"] = a.dim;
  m.extra["noise_sigma"] = a.sigma;
  m.extra["encoder_hash"] = hex64(enc.hash());
  write_manifest(a.out, m, {"encoder.json"});
  std::cout << "wrote encoder (dim " << a.dim << ") to " << a.out << "\n";
  return 0;
}

// -------------------------------------------------------------- gen-episodes

struct GenEpisodesArgs {
  std::string worlds, encoder, kind = "image", out;
  int per_tier = 4;
  int n = 8;
  std::string categories;
  std::string tiers;
  double min_start_dist = 1.5;
  uint64_t seed = 0;
  bool force = false;
};

int cmd_gen_episodes(const GenEpisodesArgs& a, const CommonArgs& common) {
  if (a.kind != "image" && a.kind != "object" && a.kind != "compound")
    throw ConfigError("--kind must be image, object, or compound");
  WorldSet worlds = WorldSet::load_dir(a.worlds);
  EncoderParams enc = load_encoder(a.encoder);

  std::vector<Tier> tiers = all_tiers();
  if (!a.tiers.empty()) {
    tiers.clear();
    for (const auto& t : split(a.tiers, ',')) {
      auto tier = tier_from_name(t);
      if (!tier) throw ConfigError("unknown tier name: " + t);
      tiers.push_back(*tier);
    }
  }

  std::vector<std::vector<std::string>> cats;
  if (a.kind != "image") {
    if (a.categories.empty())
      throw ConfigError("--categories is required for object/compound goals");
    cats = parse_categories(a.categories);
    if (a.kind == "object")
      for (const auto& c : cats)
        if (c.size() != 1)
          throw ConfigError("plain object goals take single concepts; use "
                            "--kind compound for multi-concept goals");
  }

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  EpisodeDataset ds;
  ds.seed = a.seed;
  ds.encoder_hash = enc.hash();
  for (const auto& id : worlds.ids()) {
    const GridWorld& w = worlds.get(id);
    if (a.kind == "image")
      ds.append(sample_imagenav_episodes(w, a.per_tier, enc, a.seed,
                                         KinematicsConfig{}, tiers));
    else
      ds.append(sample_objectnav_episodes(w, a.n, cats, enc, a.seed,
                                          a.min_start_dist));
  }
  save_dataset(ds, a.out + "/episodes.jsonl");

  RunManifest m;
  m.command = "gen-episodes";
  m.args = common.argv;
  m.seeds["seed"] = a.seed;
  m.inputs[a.encoder] = file_hash_hex(a.encoder);
  m.extra["kind"] = a.kind;
  m.extra["n_episodes"] = ds.size();
  m.extra["world_ids"] = worlds.ids();
  write_manifest(a.out, m, {"episodes.jsonl"});
  std::cout << "wrote " << ds.size() << " episodes to " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------------- train

struct TrainArgs {
  std::string worlds, dataset, val_dataset, config, encoder, out, resume;
  int64_t total_steps = -1;  // -1: take from config
  int64_t seed = -1;
  bool force = false;
};

int cmd_train(const TrainArgs& a, const CommonArgs& common) {
  TrainerConfig cfg;
  if (!a.config.empty()) cfg = load_trainer_config(a.config);
  if (a.total_steps >= 0) cfg.total_steps = a.total_steps;
  if (a.seed >= 0) cfg.seed = uint64_t(a.seed);
  cfg.validate();

  WorldSet worlds = WorldSet::load_dir(a.worlds);
  EpisodeDataset ds = load_dataset(a.dataset);
  EpisodeDataset val;
  bool has_val = !a.val_dataset.empty();
  if (has_val) val = load_dataset(a.val_dataset);

  ConceptVocabulary vocab = ConceptVocabulary::defaults();
  if (!a.encoder.empty()) {
    EncoderParams enc = load_encoder(a.encoder);
    check_encoder_matches(ds, enc, a.dataset);
    if (has_val) check_encoder_matches(val, enc, a.val_dataset);
    vocab = enc.vocab;
  }

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  TrainResult res = train(worlds, vocab, ds, has_val ? &val : nullptr, cfg,
                          a.out, a.resume);

  write_text_file(a.out + "/config.json",
                  trainer_config_to_json(cfg).dump(2) + "\n");
  RunManifest m;
  m.command = "train";
  m.args = common.argv;
  m.seeds["seed"] = cfg.seed;
  m.inputs[a.dataset] = file_hash_hex(a.dataset);
  if (!a.config.empty()) m.inputs[a.config] = file_hash_hex(a.config);
  if (!a.encoder.empty()) m.inputs[a.encoder] = file_hash_hex(a.encoder);
  if (has_val) m.inputs[a.val_dataset] = file_hash_hex(a.val_dataset);
  if (!a.resume.empty()) m.inputs[a.resume] = file_hash_hex(a.resume);
  m.extra["world_ids"] = worlds.ids();
  m.extra["env_steps"] = res.env_steps;
  m.extra["updates"] = res.updates;
  if (res.best_val_sr >= 0.0) m.extra["best_val_sr"] = res.best_val_sr;
  std::vector<std::string> outs{"metrics.csv", "ckpt_latest.bin", "config.json"};
  if (!res.best_checkpoint.empty()) outs.push_back("ckpt_best.bin");
  write_manifest(a.out, m, outs);
  std::cout << "trained " << res.env_steps << " env steps (" << res.updates
            << " updates)";
  if (res.best_val_sr >= 0.0) std::cout << ", best validation sr " << res.best_val_sr;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint, worlds, dataset, encoder, out;
  uint64_t seed = 0;
  int trials = 3;
  bool greedy = false;
  bool force = false;
};

int cmd_eval(const EvalArgs& a, const CommonArgs& common) {
  LoadedCheckpoint ck = load_checkpoint_auto(a.checkpoint);
  WorldSet worlds = WorldSet::load_dir(a.worlds);
  EpisodeDataset ds = load_dataset(a.dataset);
  ConceptVocabulary vocab = ConceptVocabulary::defaults();
  if (!a.encoder.empty()) {
    EncoderParams enc = load_encoder(a.encoder);
    check_encoder_matches(ds, enc, a.dataset);
    vocab = enc.vocab;
  }

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  EvalConfig cfg;
  cfg.trials = a.trials;
  cfg.greedy = a.greedy;
  std::vector<EpisodeOutcome> traces;
  EvalReport rep = evaluate(*ck.net, worlds, vocab, ds, cfg, a.seed, &traces);

  write_text_file(a.out + "/report.json", rep.to_json().dump(2) + "\n");
  write_text_file(a.out + "/report.csv", rep.to_csv());
  write_traces(a.out + "/traces.jsonl", traces);

  RunManifest m;
  m.command = "eval";
  m.args = common.argv;
  m.seeds["seed"] = a.seed;
  m.inputs[a.checkpoint] = file_hash_hex(a.checkpoint);
  m.inputs[a.dataset] = file_hash_hex(a.dataset);
  if (!a.encoder.empty()) m.inputs[a.encoder] = file_hash_hex(a.encoder);
  m.extra["task"] = rep.task;
  m.extra["sr_mean"] = rep.sr_mean;
  m.extra["spl_mean"] = rep.spl_mean;
  write_manifest(a.out, m, {"report.json", "report.csv", "traces.jsonl"});
  std::cout << rep.task << ": sr " << rep.sr_mean << " +/- " << rep.sr_std
            << ", spl " << rep.spl_mean << " +/- " << rep.spl_std << "\n";
  return 0;
}

// ----------------------------------------------------------------- zero-shot

struct ZeroShotArgs {
  std::string checkpoint, eval_worlds, train_worlds, encoder, categories, out;
  int per_tier = 2;
  int n_object = 6;
  uint64_t seed = 0;
  uint64_t episode_seed = 7;
  int trials = 3;
  bool greedy = false;
  bool force = false;
};

int cmd_zero_shot(const ZeroShotArgs& a, const CommonArgs& common) {
  LoadedCheckpoint ck = load_checkpoint_auto(a.checkpoint);
  WorldSet eval_worlds = WorldSet::load_dir(a.eval_worlds);
  std::vector<std::string> train_ids;
  if (!a.train_worlds.empty())
    train_ids = WorldSet::load_dir(a.train_worlds).ids();
  EncoderParams enc = load_encoder(a.encoder);
  if (a.categories.empty()) throw ConfigError("--categories is required");
  auto cats = parse_categories(a.categories);

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  ZeroShotConfig zcfg;
  zcfg.eval.trials = a.trials;
  zcfg.eval.greedy = a.greedy;
  zcfg.per_tier = a.per_tier;
  zcfg.n_object = a.n_object;
  zcfg.episode_seed = a.episode_seed;

  std::vector<EpisodeOutcome> img_traces, obj_traces;
  ZeroShotResult res =
      zero_shot_protocol(*ck.net, eval_worlds, train_ids, cats, enc, zcfg,
                         a.seed, &img_traces, &obj_traces);

  json j;
  j["schema_version"] = 1;
  j["imagenav"] = res.imagenav.to_json();
  j["objectnav"] = res.objectnav.to_json();
  j["transfer_gap"] = res.transfer_gap;
  write_text_file(a.out + "/zero_shot.json", j.dump(2) + "\n");
  save_dataset(res.image_ds, a.out + "/imagenav_episodes.jsonl");
  save_dataset(res.object_ds, a.out + "/objectnav_episodes.jsonl");
  write_traces(a.out + "/imagenav_traces.jsonl", img_traces);
  write_traces(a.out + "/objectnav_traces.jsonl", obj_traces);

  RunManifest m;
  m.command = "zero-shot";
  m.args = common.argv;
  m.seeds["seed"] = a.seed;
  m.seeds["episode_seed"] = a.episode_seed;
  m.inputs[a.checkpoint] = file_hash_hex(a.checkpoint);
  m.inputs[a.encoder] = file_hash_hex(a.encoder);
  m.extra["eval_world_ids"] = eval_worlds.ids();
  m.extra["train_world_ids"] = train_ids;
  m.extra["transfer_gap"] = res.transfer_gap;
  write_manifest(a.out, m,
                 {"zero_shot.json", "imagenav_episodes.jsonl",
                  "objectnav_episodes.jsonl", "imagenav_traces.jsonl",
                  "objectnav_traces.jsonl"});
  std::cout << "imagenav sr " << res.imagenav.sr_mean << ", objectnav sr "
            << res.objectnav.sr_mean << ", transfer gap " << res.transfer_gap
            << "\n";
  return 0;
}

// -------------------------------------------------------------------- ablate

struct AblateArgs {
  std::string config, world_counts = "2,16", out;
  int64_t total_steps = -1;
  bool force = false;
};

int cmd_ablate(const AblateArgs& a, const CommonArgs& common) {
  AblationConfig cfg;
  // workable defaults so the sweep runs without a config file: every room
  // gets a sink, the goal category is "sink", modest training budget
  cfg.worldgen.per_room_objects = {"sink"};
  cfg.worldgen.min_objects_per_room = 1;
  cfg.worldgen.max_objects_per_room = 2;
  cfg.categories = {{"sink"}};
  cfg.trainer.total_steps = 60000;
  cfg.trainer.val_every = 0;
  cfg.encoder = EncoderParams::create(ConceptVocabulary::defaults(), 64, 5, 0.1);
  cfg.base_seed = 1;
  cfg.world_seed = 11;

  if (!a.config.empty()) {
    json j;
    try {
      j = json::parse(read_text_file(a.config));
    } catch (const json::exception& e) {
      throw ConfigError(a.config + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(a.config + ": expected a JSON object");
    if (j.contains("worldgen"))
      cfg.worldgen = worldgen_params_from_json(j["worldgen"]);
    if (j.contains("trainer"))
      cfg.trainer = trainer_config_from_json(j["trainer"]);
    if (j.contains("categories")) {
      cfg.categories.clear();
      for (const auto& c : j["categories"])
        cfg.categories.push_back(split(c.get<std::string>(), '+'));
    }
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      cfg.encoder = EncoderParams::create(
          cfg.worldgen.vocab, e.value("dim", 64), e.value("seed", uint64_t(5)),
          e.value("noise_sigma", 0.1));
    }
    if (j.contains("n_seeds")) cfg.n_seeds = j["n_seeds"].get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<uint64_t>();
    if (j.contains("world_seed")) cfg.world_seed = j["world_seed"].get<uint64_t>();
    if (j.contains("n_holdout_worlds"))
      cfg.n_holdout_worlds = j["n_holdout_worlds"].get<int>();
    if (j.contains("per_tier_train"))
      cfg.per_tier_train = j["per_tier_train"].get<int>();
    if (j.contains("n_object_eval"))
      cfg.n_object_eval = j["n_object_eval"].get<int>();
    if (j.contains("trials")) cfg.eval.trials = j["trials"].get<int>();
  }
  if (a.total_steps >= 0) cfg.trainer.total_steps = a.total_steps;

  cfg.world_counts.clear();
  for (const auto& c : split(a.world_counts, ',')) {
    try {
      cfg.world_counts.push_back(std::stoi(c));
    } catch (const std::exception&) {
      throw ConfigError("bad world count '" + c + "'");
    }
  }

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  AblationResult res = run_diversity_ablation(cfg);
  write_text_file(a.out + "/ablation.csv", res.to_csv());
  write_text_file(a.out + "/summary.csv", res.summary_csv());
  json sj;
  sj["schema_version"] = 1;
  sj["trend_increasing"] = res.trend_increasing;
  json rows = json::array();
  for (const auto& s : res.summary)
    rows.push_back({{"n_worlds", s.n_worlds},
                    {"sr_mean", s.sr_mean},
                    {"sr_std", s.sr_std},
                    {"spl_mean", s.spl_mean},
                    {"spl_std", s.spl_std}});
  sj["summary"] = rows;
  write_text_file(a.out + "/summary.json", sj.dump(2) + "\n");

  RunManifest m;
  m.command = "ablate";
  m.args = common.argv;
  m.seeds["base_seed"] = cfg.base_seed;
  m.seeds["world_seed"] = cfg.world_seed;
  if (!a.config.empty()) m.inputs[a.config] = file_hash_hex(a.config);
  write_manifest(a.out, m, {"ablation.csv", "summary.csv", "summary.json"});

  std::cout << "zero-shot sr by world count:";
  for (const auto& s : res.summary)
    std::cout << " " << s.n_worlds << " -> " << s.sr_mean << " (+/- "
              << s.sr_std << ")";
  std::cout << "; trend " << (res.trend_increasing ? "increasing" : "not monotone")
            << " (reported, not gated)\n";
  return 0;
}

// -------------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> runs;
  std::string out;
  bool force = false;
};

int cmd_report(const ReportArgs& a, const CommonArgs& common) {
  if (a.runs.size() < 1) throw ConfigError("report needs at least one run directory");
  struct Run {
    std::string dir;
    EvalReport rep;
  };
  std::vector<Run> runs;
  for (const auto& dir : a.runs) {
    std::string path = dir + "/report.json";
    if (!fs::exists(path)) throw ZsonError("missing report file: " + path);
    json j;
    try {
      j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
      throw ZsonError(path + ": " + e.what());
    }
    runs.push_back({dir, EvalReport::from_json(j)});
  }
  for (size_t i = 1; i < runs.size(); ++i)
    if (runs[i].rep.vocab_hash != runs[0].rep.vocab_hash)
      throw ZsonError("vocabulary hash mismatch between runs '" +
                      runs[0].dir + "' and '" + runs[i].dir + "'");

  require_writable_dir(a.out, a.force);
  OutDirLock lock(a.out);

  std::string cmp =
      "run,task,n_episodes,trials,sr_mean,sr_std,spl_mean,spl_std,"
      "room_correct_rate\n";
  std::string lng = "run,task,trial,sr,spl\n";
  char line[512];
  for (const auto& r : runs) {
    std::snprintf(line, sizeof(line), "%s,%s,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.dir.c_str(), r.rep.task.c_str(), r.rep.n_episodes,
                  r.rep.trials, r.rep.sr_mean, r.rep.sr_std, r.rep.spl_mean,
                  r.rep.spl_std, r.rep.room_correct_rate);
    cmp += line;
    for (size_t t = 0; t < r.rep.trial_sr.size(); ++t) {
      std::snprintf(line, sizeof(line), "%s,%s,%zu,%.9g,%.9g\n", r.dir.c_str(),
                    r.rep.task.c_str(), t, r.rep.trial_sr[t],
                    r.rep.trial_spl[t]);
      lng += line;
    }
  }
  write_text_file(a.out + "/comparison.csv", cmp);
  write_text_file(a.out + "/long.csv", lng);

  // merge traces where available, tagging each line with its run
  std::ofstream ts(a.out + "/traces.jsonl", std::ios::trunc);
  for (const auto& r : runs) {
    std::string tpath = r.dir + "/traces.jsonl";
    if (!fs::exists(tpath)) continue;
    std::ifstream is(tpath);
    std::string line_in;
    while (std::getline(is, line_in)) {
      if (line_in.empty()) continue;
      json j;
      try {
        j = json::parse(line_in);
      } catch (const json::exception& e) {
        throw ZsonError(tpath + ": " + e.what());
      }
      j["run"] = r.dir;
      ts << j.dump() << "\n";
    }
  }
  ts.close();

  RunManifest m;
  m.command = "report";
  m.args = common.argv;
  for (const auto& r : runs)
    m.inputs[r.dir + "/report.json"] = file_hash_hex(r.dir + "/report.json");
  write_manifest(a.out, m, {"comparison.csv", "long.csv", "traces.jsonl"});
  std::cout << "merged " << runs.size() << " runs into " << a.out << "\n";
  return 0;
}

// --------------------------------------------------------------------- audit

struct AuditArgs {
  std::string worlds;
};

int cmd_audit(const AuditArgs& a) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.worlds)) {
    if (!e.is_regular_file()) continue;
    std::string name = e.path().filename().string();
    if (name.size() < 5 || name.substr(name.size() - 5) != ".json") continue;
    if (name == "manifest.json" || name[0] == '.') continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ZsonError("no world files in " + a.worlds);

  int bad = 0;
  for (const auto& f : files) {
    try {
      GridWorld w = load_world(f.string());
      auto violations = world_violations(w);
      if (violations.empty()) {
        std::cout << f.filename().string() << ": ok\n";
      } else {
        bad += 1;
        for (const auto& v : violations)
          std::cout << f.filename().string() << ": " << v << "\n";
      }
    } catch (const ZsonError& e) {
      bad += 1;
      std::cout << f.filename().string() << ": " << e.what() << "\n";
    }
  }
  if (bad > 0) {
    log_error(std::to_string(bad) + " of " + std::to_string(files.size()) +
              " worlds failed the audit");
    return 2;
  }
  std::cout << "all " << files.size() << " worlds pass\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procedural navigation worlds, semantic goal embeddings, PPO "
               "training, and zero-shot object-goal evaluation"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonArgs common;
  for (int i = 1; i < argc; ++i) common.argv.push_back(argv[i]);

  GenWorldsArgs gw;
  auto* c_gw = app.add_subcommand("gen-worlds", "generate procedural worlds");
  c_gw->add_option("--n", gw.n, "number of worlds")->required()
      ->check(CLI::PositiveNumber);
  c_gw->add_option("--seed", gw.seed, "base seed");
  c_gw->add_option("--out", gw.out, "output directory")->required();
  c_gw->add_option("--params", gw.params_path, "generation params JSON");
  c_gw->add_flag("--force", gw.force, "write into a non-empty directory");

  GenEncoderArgs ge;
  auto* c_ge = app.add_subcommand("gen-encoder",
                                  "create a joint image/text goal encoder");
  c_ge->add_option("--dim", ge.dim, "embedding dimension")
      ->check(CLI::PositiveNumber);
  c_ge->add_option("--seed", ge.seed, "projection seed");
  c_ge->add_option("--sigma", ge.sigma, "view-noise sigma")
      ->check(CLI::NonNegativeNumber);
  c_ge->add_option("--out", ge.out, "output directory")->required();
  c_ge->add_option("--vocab", ge.vocab_path, "vocabulary JSON");
  c_ge->add_flag("--force", ge.force, "write into a non-empty directory");

  GenEpisodesArgs gep;
  auto* c_gep = app.add_subcommand("gen-episodes", "sample episode datasets");
  c_gep->add_option("--worlds", gep.worlds, "world directory")->required();
  c_gep->add_option("--encoder", gep.encoder, "encoder JSON")->required();
  c_gep->add_option("--kind", gep.kind, "image | object | compound");
  c_gep->add_option("--per-tier", gep.per_tier,
                    "image episodes per difficulty tier per world")
      ->check(CLI::PositiveNumber);
  c_gep->add_option("--n", gep.n, "object episodes per world")
      ->check(CLI::PositiveNumber);
  c_gep->add_option("--categories", gep.categories,
                    "comma-separated goals; '+' joins concepts (sink+kitchen)");
  c_gep->add_option("--tiers", gep.tiers, "subset of easy,medium,hard");
  c_gep->add_option("--min-start-dist", gep.min_start_dist,
                    "minimum start distance for object goals (m)");
  c_gep->add_option("--seed", gep.seed, "sampling seed");
  c_gep->add_option("--out", gep.out, "output directory")->required();
  c_gep->add_flag("--force", gep.force, "write into a non-empty directory");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "train the navigation policy");
  c_tr->add_option("--worlds", tr.worlds, "world directory")->required();
  c_tr->add_option("--dataset", tr.dataset, "training episodes JSONL")->required();
  c_tr->add_option("--val-dataset", tr.val_dataset, "validation episodes JSONL");
  c_tr->add_option("--config", tr.config, "trainer config JSON");
  c_tr->add_option("--encoder", tr.encoder,
                   "encoder JSON (vocabulary source; verified against dataset)");
  c_tr->add_option("--out", tr.out, "output directory")->required();
  c_tr->add_option("--resume", tr.resume, "checkpoint to resume from");
  c_tr->add_option("--total-steps", tr.total_steps, "override config total_steps");
  c_tr->add_option("--seed", tr.seed, "override config seed");
  c_tr->add_flag("--force", tr.force, "write into a non-empty directory");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "evaluate a checkpoint");
  c_ev->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
  c_ev->add_option("--worlds", ev.worlds, "world directory")->required();
  c_ev->add_option("--dataset", ev.dataset, "episodes JSONL")->required();
  c_ev->add_option("--encoder", ev.encoder, "encoder JSON (vocabulary source)");
  c_ev->add_option("--seed", ev.seed, "evaluation seed");
  c_ev->add_option("--trials", ev.trials, "evaluation passes")
      ->check(CLI::PositiveNumber);
  c_ev->add_flag("--greedy", ev.greedy, "argmax actions instead of sampling");
  c_ev->add_option("--out", ev.out, "output directory")->required();
  c_ev->add_flag("--force", ev.force, "write into a non-empty directory");

  ZeroShotArgs zs;
  auto* c_zs = app.add_subcommand(
      "zero-shot", "paired image-goal / object-goal transfer evaluation");
  c_zs->add_option("--checkpoint", zs.checkpoint, "checkpoint file")->required();
  c_zs->add_option("--eval-worlds", zs.eval_worlds, "held-out world directory")
      ->required();
  c_zs->add_option("--train-worlds", zs.train_worlds,
                   "training world directory (leak guard)");
  c_zs->add_option("--encoder", zs.encoder, "encoder JSON")->required();
  c_zs->add_option("--categories", zs.categories,
                   "object goal categories (comma-separated)")->required();
  c_zs->add_option("--per-tier", zs.per_tier, "image episodes per tier per world")
      ->check(CLI::PositiveNumber);
  c_zs->add_option("--n-object", zs.n_object, "object episodes per world")
      ->check(CLI::PositiveNumber);
  c_zs->add_option("--seed", zs.seed, "evaluation seed");
  c_zs->add_option("--episode-seed", zs.episode_seed, "episode sampling seed");
  c_zs->add_option("--trials", zs.trials, "evaluation passes")
      ->check(CLI::PositiveNumber);
  c_zs->add_flag("--greedy", zs.greedy, "argmax actions instead of sampling");
  c_zs->add_option("--out", zs.out, "output directory")->required();
  c_zs->add_flag("--force", zs.force, "write into a non-empty directory");

  AblateArgs ab;
  auto* c_ab = app.add_subcommand("ablate", "training-set diversity sweep");
  c_ab->add_option("--config", ab.config, "ablation config JSON");
  c_ab->add_option("--world-counts", ab.world_counts,
                   "comma-separated training world counts");
  c_ab->add_option("--total-steps", ab.total_steps,
                   "override per-run training budget");
  c_ab->add_option("--out", ab.out, "output directory")->required();
  c_ab->add_flag("--force", ab.force, "write into a non-empty directory");

  ReportArgs rp;
  auto* c_rp = app.add_subcommand("report", "merge evaluation runs");
  c_rp->add_option("--runs", rp.runs, "evaluation run directories")
      ->required()
      ->delimiter(',');
  c_rp->add_option("--out", rp.out, "output directory")->required();
  c_rp->add_flag("--force", rp.force, "write into a non-empty directory");

  AuditArgs au;
  auto* c_au = app.add_subcommand("audit", "check world invariants");
  c_au->add_option("--worlds", au.worlds, "world directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help/--version
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*c_gw) return cmd_gen_worlds(gw, common);
    if (*c_ge) return cmd_gen_encoder(ge, common);
    if (*c_gep) return cmd_gen_episodes(gep, common);
    if (*c_tr) return cmd_train(tr, common);
    if (*c_ev) return cmd_eval(ev, common);
    if (*c_zs) return cmd_zero_shot(zs, common);
    if (*c_ab) return cmd_ablate(ab, common);
    if (*c_rp) return cmd_report(rp, common);
    if (*c_au) return cmd_audit(au);
  } catch (const ConfigError& e) {
    log_error(e.what());
    return 1;
  } catch (const ZsonError& e) {
    log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 2;
  }
  return 0;
}
