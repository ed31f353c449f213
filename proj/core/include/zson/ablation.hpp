#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zson/evaluate.hpp"
#include "zson/trainer.hpp"
#include "zson/worldgen.hpp"

namespace zson {

// Training-set diversity sweep: one agent per (world count, seed), identical
// budgets, all evaluated zero-shot on one shared held-out object-goal set.
struct AblationConfig {
  std::vector<int> world_counts;           // ascending, e.g. {2, 16}
  int n_seeds = 3;
  uint64_t base_seed = 0;
  uint64_t world_seed = 0;                 // world pool + episode generation
  int n_holdout_worlds = 4;
  int per_tier_train = 2;                  // image episodes per tier per world
  int n_object_eval = 6;                   // object episodes per held-out world
  std::vector<std::vector<std::string>> categories;
  WorldGenParams worldgen;
  TrainerConfig trainer;                   // total_steps is the shared budget
  EncoderParams encoder;
  EvalConfig eval;

  void validate() const;
};

struct AblationRow {
  int n_worlds = 0;
  uint64_t seed = 0;
  double sr = 0.0, spl = 0.0;    // means over eval trials
  double sr_std = 0.0, spl_std = 0.0;
};

struct AblationSummary {
  int n_worlds = 0;
  double sr_mean = 0.0, sr_std = 0.0;    // across training seeds
  double spl_mean = 0.0, spl_std = 0.0;
};

struct AblationResult {
  std::vector<AblationRow> rows;          // sorted by (n_worlds, seed)
  std::vector<AblationSummary> summary;   // one per world count
  bool trend_increasing = false;          // SR mean rises with world count
  std::string to_csv() const;             // n_worlds,seed,sr,spl,sr_std,spl_std
  std::string summary_csv() const;
};

AblationResult run_diversity_ablation(const AblationConfig& cfg);

}  // namespace zson
