#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symphony/config.hpp"
#include "symphony/nets.hpp"
#include "symphony/optim.hpp"

namespace symphony {

/// Scalar trainer state carried inside checkpoints.
struct TrainerScalars {
  double q_ema = 0.0;
  double q_ema_initialized = 0.0;
  double r_norm = 1.0;
  double explored = 0.0;  // exploration phase completed
  std::int64_t global_step = 0;
  std::int64_t episode = 0;
  std::int64_t nonfinite_skips = 0;
  std::int64_t reset_count = 0;
};

struct CheckpointHeader {
  std::uint32_t version = 1;
  std::uint32_t h_dim = 0;
  std::uint32_t n_out = 0;
  std::uint32_t action_dim = 0;
  std::uint32_t obs_dim = 0;
  Variant variant = Variant::kS3;
};

/// Flat binary checkpoint: "SYMC" magic, header, then named parameter blocks
/// (network parameters, optimizer moments, trainer scalars), little-endian
/// doubles. Saving is deterministic: identical state gives identical bytes.
void save_checkpoint(const std::string& path, ActorCriticNet& net,
                     AdamW& optim, const TrainerScalars& scalars,
                     Variant variant);

/// Loads into existing objects; throws FormatError on magic/version/shape
/// mismatch.
CheckpointHeader load_checkpoint(const std::string& path, ActorCriticNet& net,
                                 AdamW& optim, TrainerScalars& scalars);

struct BlockInfo {
  std::string name;
  std::vector<std::uint64_t> shape;
  double l2_norm = 0.0;
};

/// Header plus per-block shape/norm listing, for the `inspect` command.
CheckpointHeader inspect_checkpoint(const std::string& path,
                                    std::vector<BlockInfo>* blocks);

}  // namespace symphony
