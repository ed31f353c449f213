#include "zson/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "zson/errors.hpp"
#include "zson/logging.hpp"

namespace zson {

void AblationConfig::validate() const {
  if (world_counts.empty()) throw ConfigError("world_counts must be non-empty");
  for (size_t i = 0; i < world_counts.size(); ++i) {
    if (world_counts[i] < 1) throw ConfigError("world counts must be positive");
    if (i > 0 && world_counts[i] <= world_counts[i - 1])
      throw ConfigError("world_counts must be strictly ascending");
  }
  if (n_seeds < 1) throw ConfigError("n_seeds must be positive");
  if (n_holdout_worlds < 1) throw ConfigError("n_holdout_worlds must be positive");
  if (categories.empty()) throw ConfigError("ablation needs object categories");
  worldgen.validate();
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= double(xs.size());
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / double(xs.size()));
}

}  // namespace

AblationResult run_diversity_ablation(const AblationConfig& cfg) {
  cfg.validate();
  int max_count = cfg.world_counts.back();

  // Shared pools: training worlds are a prefix of one pool, so smaller runs
  // train on a subset of the larger runs' worlds.
  std::vector<GridWorld> train_pool;
  for (int i = 0; i < max_count; ++i)
    train_pool.push_back(
        generate_world(stream_seed(cfg.world_seed, uint64_t(i)), cfg.worldgen));
  WorldSet holdout;
  for (int i = 0; i < cfg.n_holdout_worlds; ++i)
    holdout.add(generate_world(
        stream_seed(cfg.world_seed, 0x10000ull + uint64_t(i)), cfg.worldgen));

  // One shared held-out object-goal dataset.
  EpisodeDataset eval_ds;
  eval_ds.seed = cfg.world_seed;
  eval_ds.encoder_hash = cfg.encoder.hash();
  for (const auto& id : holdout.ids())
    eval_ds.append(sample_objectnav_episodes(holdout.get(id),
                                             cfg.n_object_eval, cfg.categories,
                                             cfg.encoder, cfg.world_seed));

  AblationResult res;
  for (int count : cfg.world_counts) {
    std::vector<double> srs, spls;
    for (int s = 0; s < cfg.n_seeds; ++s) {
      uint64_t seed = cfg.base_seed + uint64_t(s);
      WorldSet train_ws;
      EpisodeDataset train_ds;
      train_ds.seed = cfg.world_seed;
      train_ds.encoder_hash = cfg.encoder.hash();
      for (int i = 0; i < count; ++i) {
        train_ws.add(train_pool[size_t(i)]);
        train_ds.append(sample_imagenav_episodes(train_pool[size_t(i)],
                                                 cfg.per_tier_train,
                                                 cfg.encoder, cfg.world_seed,
                                                 cfg.trainer.kin));
      }

      TrainerConfig tcfg = cfg.trainer;
      tcfg.seed = seed;
      log_info("ablation: " + std::to_string(count) + " worlds, seed " +
               std::to_string(seed));
      Trainer tr(train_ws, cfg.encoder.vocab, train_ds, tcfg);
      while (!tr.done()) tr.update_once();

      EvalReport rep = evaluate(tr.net(), holdout, cfg.encoder.vocab, eval_ds,
                                cfg.eval, stream_seed(seed, 0x6576616cull));
      AblationRow row;
      row.n_worlds = count;
      row.seed = seed;
      row.sr = rep.sr_mean;
      row.spl = rep.spl_mean;
      row.sr_std = rep.sr_std;
      row.spl_std = rep.spl_std;
      res.rows.push_back(row);
      srs.push_back(rep.sr_mean);
      spls.push_back(rep.spl_mean);
    }
    AblationSummary sum;
    sum.n_worlds = count;
    mean_std(srs, sum.sr_mean, sum.sr_std);
    mean_std(spls, sum.spl_mean, sum.spl_std);
    res.summary.push_back(sum);
  }

  res.trend_increasing = true;
  for (size_t i = 1; i < res.summary.size(); ++i)
    if (res.summary[i].sr_mean < res.summary[i - 1].sr_mean)
      res.trend_increasing = false;
  return res;
}

std::string AblationResult::to_csv() const {
  std::string out = "n_worlds,seed,sr,spl,sr_std,spl_std\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%llu,%.9g,%.9g,%.9g,%.9g\n",
                  r.n_worlds, (unsigned long long)r.seed, r.sr, r.spl,
                  r.sr_std, r.spl_std);
    out += line;
  }
  return out;
}

std::string AblationResult::summary_csv() const {
  std::string out = "n_worlds,sr_mean,sr_std,spl_mean,spl_std\n";
  char line[160];
  for (const auto& s : summary) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g\n", s.n_worlds,
                  s.sr_mean, s.sr_std, s.spl_mean, s.spl_std);
    out += line;
  }
  return out;
}

}  // namespace zson
