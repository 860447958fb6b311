// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tgif/config.hpp"
#include "tgif/models.hpp"

namespace tgif::nn {

/// Sidecar metadata. The weights live next to it in `<stem>.weights`.
struct CheckpointMeta {
  ModelConfig config;
  std::string config_hash;
  int epoch = 0;
  double best_val_loss = 0.0;
  std::uint64_t seed = 0;
  std::string rng_state;  // training-order RNG at save time
  std::string lineage = "pretrain";  // or "adapted-from:<parent weights hash>"
  std::string parent;                // parent sidecar path for specialists
  std::optional<int> group_id;
  std::optional<std::string> adapt_mode;
  std::vector<std::string> speaker_inventory;  // class index -> speaker id
  std::string weights_hash;                   // SHA-256 of the weights file

  int class_of(const std::string& speaker) const;  // -1 when absent
};

void to_json(Json& j, const CheckpointMeta& m);
void from_json(const Json& j, CheckpointMeta& m);

/// Canonical byte serialization of every parameter and buffer:
/// name, shape and little-endian float32 values, in registration order.
std::string serialize_weights(const torch::nn::Module& model);
void load_weights(torch::nn::Module& model, const std::string& blob);

/// Writes `<path>` (JSON sidecar) and the sibling `.weights` file; fills
/// config_hash and weights_hash. Returns the sidecar path.
std::filesystem::path save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& model,
                                      CheckpointMeta meta);

struct LoadedModel {
  std::shared_ptr<Extractor> model;
  CheckpointMeta meta;
  std::filesystem::path path;
};

/// Verifies the weights hash and that the config hash matches the recorded
/// architecture ("bad-checkpoint" otherwise).
LoadedModel load_checkpoint(const std::filesystem::path& path);
CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path);
std::filesystem::path weights_path(const std::filesystem::path& sidecar);

}  // namespace tgif::nn
