#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "zson/network.hpp"
#include "zson/optim.hpp"

namespace zson {

inline constexpr char kCheckpointMagic[8] = {'Z', 'S', 'O', 'N',
                                             'C', 'K', 'P', 'T'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Progress counters stored alongside the weights so training can resume.
struct TrainProgress {
  int64_t env_steps = 0;
  int64_t updates = 0;
};

// Writes weights, and optionally optimizer state + progress, to a binary
// file. Atomic: written to a temp file then renamed into place.
void save_checkpoint(const std::string& path, PolicyNetwork<float>& net,
                     const AdamState* adam = nullptr,
                     const TrainProgress* progress = nullptr);

// Loads into an existing network; the stored architecture must match
// net.cfg exactly. adam/progress may be null to skip those sections.
void load_checkpoint(const std::string& path, PolicyNetwork<float>& net,
                     AdamState* adam = nullptr,
                     TrainProgress* progress = nullptr);

// Reads the architecture from the file and builds a matching network.
struct LoadedCheckpoint {
  NetConfig cfg;
  std::unique_ptr<PolicyNetwork<float>> net;
  AdamState adam;
  bool has_adam = false;
  TrainProgress progress;
};
LoadedCheckpoint load_checkpoint_auto(const std::string& path);

// Architecture string without loading weights (for tooling/errors).
NetConfig peek_checkpoint_config(const std::string& path);

}  // namespace zson
