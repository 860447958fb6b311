// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgif/config.hpp"
#include "tgif/eval.hpp"
#include "tgif/report.hpp"
#include "tgif/train.hpp"

namespace tgif::nn {

/// Runs `teacher` on every record of `splits`, writes
/// `pseudo/<scene_id>_pseudo.wav` next to the manifest and rewrites the
/// manifest with the new pseudo_target paths. Returns the number written.
std::size_t distill_targets(const EstimateFn& teacher, const std::filesystem::path& manifest_path,
                            const std::vector<std::string>& splits = {"adapt", "val"});

/// Checkpoint-backed distillation; the checkpoint must be a teacher.
std::size_t distill_targets(const std::filesystem::path& teacher_checkpoint,
                            const std::filesystem::path& manifest_path,
                            const std::vector<std::string>& splits = {"adapt", "val"});

struct AdaptResult {
  std::filesystem::path checkpoint;
  std::vector<double> step_losses;   // total loss per optimizer step
  std::vector<EpochLog> epochs;      // train-side means per epoch
  std::vector<double> val_si_sdri;   // per epoch, logging only
  std::string parent_hash;
};

/// Fine-tunes a student generalist for exactly cfg.epochs epochs on the
/// group's `cfg.train_split`, regressing onto pseudo targets (kd) or dry
/// targets (oracle). Writes `out_dir/specialist.json` and
/// `out_dir/adapt_log.jsonl`.
AdaptResult adapt(const std::filesystem::path& student_checkpoint, const Manifest& group_manifest,
                  const AdaptConfig& cfg, const std::filesystem::path& out_dir, FileAudit* audit = nullptr);

struct GroupJob {
  int group_id = 1;
  std::filesystem::path manifest;
};

struct GroupOutcome {
  int group_id = 1;
  std::optional<std::filesystem::path> kd_checkpoint;
  std::optional<std::filesystem::path> oracle_checkpoint;
  std::vector<EvalRecord> records;  // generalist and specialists on the eval split
  std::string error;
};

struct SuiteResult {
  std::vector<GroupOutcome> groups;
  std::string summary_csv;  // group_id, generalist/kd/oracle mean SI-SDRi
};

/// Distills, adapts every mode and evaluates each group independently,
/// `jobs` groups at a time. A failing group records its error and the
/// others carry on.
SuiteResult run_group_suite(const std::filesystem::path& teacher_checkpoint,
                            const std::filesystem::path& student_checkpoint, const std::vector<GroupJob>& groups,
                            const AdaptConfig& base, const std::vector<AdaptMode>& modes,
                            const std::filesystem::path& out_dir, int jobs = 1,
                            const std::string& eval_split = "test");

}  // namespace tgif::nn
