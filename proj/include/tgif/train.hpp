// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "tgif/checkpoint.hpp"
#include "tgif/config.hpp"
#include "tgif/losses.hpp"
#include "tgif/models.hpp"
#include "tgif/synth.hpp"

namespace tgif::nn {

/// Records which files were read and why ("train", "eval", ...).
class FileAudit {
 public:
  void note(const std::filesystem::path& path, const std::string& purpose);
  bool was_read(const std::filesystem::path& path, const std::string& purpose) const;
  std::vector<std::pair<std::string, std::string>> reads() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<std::string, std::string>> reads_;
};

enum class TargetKind { kDry, kPseudo };

/// One manifest record held in memory as float32 tensors.
struct Example {
  std::string scene_id;
  std::string speaker;
  int K = 1;
  std::optional<int> group_id;
  int label = -1;
  torch::Tensor mixture;     // [T]
  torch::Tensor target;      // [T], dry or pseudo per TargetKind
  torch::Tensor enrollment;  // [Te]
};

struct LoadOptions {
  TargetKind target = TargetKind::kDry;
  int sample_rate = kDefaultSampleRate;
  FileAudit* audit = nullptr;
  std::string purpose = "train";
  const std::vector<std::string>* inventory = nullptr;  // fills Example::label
};

std::vector<Example> load_examples(const Manifest& manifest, const std::string& split, const LoadOptions& opts);

/// Sorted distinct target speakers of a split.
std::vector<std::string> speaker_inventory(const Manifest& manifest, const std::string& split);

struct EpochLog {
  int epoch = 0;
  std::string split;
  double loss = 0.0;
  double si_sdr_term = 0.0;
  double ce_term = 0.0;
  double lr = 0.0;
  double wall_s = 0.0;
};
Json to_json(const EpochLog& e);

/// Means of the loss terms over a set of examples with fixed crops.
struct LossSummary {
  double loss = 0.0;
  double si_sdr_term = 0.0;
  double ce_term = 0.0;
};
LossSummary evaluate_loss(Extractor& model, const std::vector<Example>& examples, const LossConfig& loss,
                          std::int64_t crop_samples, int batch_size);

struct PretrainResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
  bool early_stopped = false;
  std::vector<EpochLog> trajectory;  // per-epoch train and val lines
  std::vector<double> lr_per_epoch;
};

/// Generalist training: seeded per-epoch shuffling and random crops, one
/// validation per epoch driving the plateau schedule, best-validation
/// checkpoint returned. Writes `out_dir/{best,last}.json` and
/// `out_dir/train_log.jsonl`. The speaker inventory is taken from `train`.
PretrainResult pretrain(ModelConfig model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                        const Manifest& manifest, const std::string& train_split, const std::string& val_split,
                        const std::filesystem::path& out_dir);

/// Same, on preloaded examples labelled against `inventory`.
PretrainResult pretrain_examples(ModelConfig model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                 const std::vector<Example>& train, const std::vector<Example>& val,
                                 const std::vector<std::string>& inventory, const std::filesystem::path& out_dir);

struct ProbeConfig {
  double crop_s = 1.0;
  int max_steps = 300;
  int eval_every = 25;
  double target_sdri_db = 10.0;
  int batch_size = 8;
  double lr = 1e-3;
  double grad_clip_norm = 5.0;
  double max_seconds = 0.0;  // 0: no wall-clock budget
};

struct ProbeResult {
  std::shared_ptr<Extractor> model;
  std::vector<std::pair<int, double>> curve;  // (step, mean train SI-SDRi)
  double initial_sdri_db = 0.0;
  double final_sdri_db = 0.0;
  bool reached = false;
  std::string status;  // "reached" or "underfit"
  int steps = 0;
};

/// Trains on the same fixed (center) crops until mean train SI-SDRi reaches
/// the target or the budget runs out.
ProbeResult overfit_probe(const ModelConfig& model_cfg, const std::vector<Example>& items, const ProbeConfig& cfg,
                          const LossConfig& loss_cfg = {});

/// Mean SI-SDRi (dB, clamped) of the model on fixed crops against the
/// examples' targets.
double mean_si_sdri(Extractor& model, const std::vector<Example>& items, std::int64_t crop_samples, int batch_size);

// Shared batching helpers.
struct Batch {
  torch::Tensor mixture, target, enrollment, labels;
};
struct Crop {
  std::int64_t offset = 0;
  std::int64_t enrollment_offset = 0;
};
Batch make_batch(const std::vector<Example>& items, const std::vector<std::size_t>& idx,
                 const std::vector<Crop>& crops, std::int64_t length, std::int64_t enrollment_length);
/// Centered crop of both the mixture and the enrollment.
Crop center_crop(const Example& e, std::int64_t length, std::int64_t enrollment_length);
/// Crop lengths for a dataset: min(requested, shortest item).
std::int64_t crop_length(const std::vector<Example>& items, std::int64_t requested);
std::int64_t enrollment_crop_length(const std::vector<Example>& items, std::int64_t requested);
/// Clips the total gradient norm; 0 disables.
void clip_gradients(torch::nn::Module& model, double max_norm);

}  // namespace tgif::nn
