// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgif/config.hpp"
#include "tgif/report.hpp"

namespace tgif::pipeline {

namespace fs = std::filesystem;

/// Where every stage reads and writes under RunConfig::out_dir.
struct Layout {
  fs::path root;

  explicit Layout(const RunConfig& cfg) : root(cfg.out_dir) {}
  fs::path assets() const { return root / "assets"; }
  fs::path generic_manifest() const { return root / "data" / "generic" / "manifest.jsonl"; }
  fs::path groups_file() const { return root / "data" / "groups.json"; }
  fs::path group_dir(int group_id) const;
  fs::path group_manifest(int group_id) const { return group_dir(group_id) / "manifest.jsonl"; }
  fs::path model_dir(ModelRole role) const { return root / "models" / to_string(role); }
  fs::path checkpoint(ModelRole role) const { return model_dir(role) / "best.json"; }
  fs::path specialist_dir(int group_id, AdaptMode mode) const;
  fs::path specialist(int group_id, AdaptMode mode) const { return specialist_dir(group_id, mode) / "specialist.json"; }
  fs::path eval_dir() const { return root / "eval"; }
  fs::path report_dir() const { return root / "report"; }
  fs::path stamps() const { return root / "stamps"; }
  fs::path snapshots() const { return root / "snapshots"; }
};

// Model ids used in evaluation records and reports.
inline const std::string kTeacherId = "T";
inline const std::string kStudentId = "S";
inline const std::string kKdId = "S-KD";
inline const std::string kOracleId = "S-KD-Oracle";
std::string specialist_id(AdaptMode mode);

/// Writes the resolved configuration next to the run's outputs.
fs::path write_snapshot(const RunConfig& cfg, const std::string& verb);

/// Stage results: `ran` is false when the stage's stamp matched its inputs
/// and its outputs were already present.
struct StageResult {
  bool ran = false;
  std::vector<fs::path> outputs;
};

fs::path assets_root(const RunConfig& cfg);
StageResult prepare_assets(const RunConfig& cfg);
StageResult synth_generic(const RunConfig& cfg);
/// Builds every group's manifest, or only `only` when given.
StageResult synth_groups(const RunConfig& cfg, std::optional<int> only = std::nullopt);
std::vector<int> group_ids(const RunConfig& cfg);

StageResult pretrain_role(const RunConfig& cfg, ModelRole role);
StageResult distill_group(const RunConfig& cfg, const fs::path& teacher, int group_id);
StageResult adapt_group(const RunConfig& cfg, const fs::path& student, int group_id, AdaptMode mode);
/// Adapts every listed group in every mode, `jobs` groups at a time.
/// Failures are collected per group and rethrown together at the end.
std::vector<StageResult> adapt_groups(const RunConfig& cfg, const fs::path& student, const std::vector<int>& groups,
                                      const std::vector<AdaptMode>& modes, int jobs);

/// Evaluates a checkpoint on `split` of a manifest into
/// eval/<model_id>[_<tag>].jsonl.
StageResult evaluate_stage(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& manifest,
                           const std::string& model_id, const std::string& tag = "");

/// Table, curve and plots from every eval/*.jsonl.
StageResult report_stage(const RunConfig& cfg);

/// Mean group-test SI-SDRi on mixtures with K >= 2, per model id.
std::map<std::string, double> multi_talker_means(const std::vector<EvalRecord>& records);

struct QuickstartResult {
  std::map<std::string, double> multi_talker_si_sdri;
  std::int64_t teacher_params = 0;
  std::int64_t student_params = 0;
  double wall_s = 0.0;
};

/// Assets, synthesis, both pretrainings, distillation, adaptation (kd and
/// oracle), evaluation and report.
QuickstartResult run_quickstart(const RunConfig& cfg);

}  // namespace tgif::pipeline
