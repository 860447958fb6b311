// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgif/assets.hpp"
#include "tgif/json_util.hpp"
#include "tgif/synth.hpp"

namespace tgif {

enum class ModelRole { kTeacher, kStudent };

std::string to_string(ModelRole role);
ModelRole role_from_string(const std::string& s);

/// Encoder / masker / decoder extractor with multiplicative speaker fusion
/// at one masker block.
struct StudentConfig {
  int encoder_filters = 64;   // N
  int encoder_kernel = 32;    // L samples; stride L/2
  int bottleneck = 64;        // residual-path channels
  int hidden = 64;            // h
  int blocks_per_repeat = 4;  // X
  int repeats = 2;            // R; masker has X*R blocks
  int fusion_index = 7;       // 1-based block index receiving the embedding
  int embed_dim = 64;
  int speaker_layers = 2;
  int speaker_inventory = 1;  // C

  int stride() const { return encoder_kernel / 2; }
  int masker_blocks() const { return blocks_per_repeat * repeats; }
  void validate() const;
};

/// Twin multi-scale encoders, TCN separator with per-stack affine speaker
/// injection, residual speaker encoder.
struct TeacherConfig {
  std::vector<int> encoder_kernels{20, 80, 160};
  int encoder_filters = 64;
  int bottleneck = 128;
  int hidden = 256;
  int blocks_per_stack = 4;
  int stacks = 3;
  bool shared_twin_encoders = true;
  int speaker_channels = 128;
  int speaker_encoder_depth = 3;
  int embed_dim = 128;
  int speaker_inventory = 1;

  int stride() const { return encoder_kernels.front() / 2; }
  int separator_blocks() const { return blocks_per_stack * stacks; }
  void validate() const;
};

struct ModelConfig {
  ModelRole role = ModelRole::kStudent;
  int sample_rate = kDefaultSampleRate;
  StudentConfig student;
  TeacherConfig teacher;
  std::uint64_t init_seed = 1;

  int speaker_inventory() const;
  void set_speaker_inventory(int c);
  int min_input_samples() const;
  void validate() const;
  /// Canonical JSON of the architecture only (role, rate, active sub-config).
  Json architecture() const;
  /// SHA-256 of architecture().dump().
  std::string hash() const;
};

void to_json(Json& j, const StudentConfig& c);
void from_json(const Json& j, StudentConfig& c);
void to_json(Json& j, const TeacherConfig& c);
void from_json(const Json& j, TeacherConfig& c);
void to_json(Json& j, const ModelConfig& c);
void from_json(const Json& j, ModelConfig& c);

struct LossConfig {
  double gamma = 0.0;
  double sisdr_eps = 1e-8;

  /// 0 for students, 0.5 for teachers.
  static LossConfig for_role(ModelRole role);
};

struct TrainConfig {
  int max_epochs = 1000;
  int batch_size = 16;
  double lr0 = 1e-3;
  int lr_patience = 20;
  double lr_factor = 0.5;
  int early_stop_patience = 120;
  double crop_s = 3.0;
  double grad_clip_norm = 5.0;  // 0 disables
  std::uint64_t seed = 1;
  bool log_steps = true;

  /// Batch 8 for teachers, 16 for students.
  static TrainConfig for_role(ModelRole role);
  void validate() const;
};

enum class AdaptMode { kKd, kOracle };
std::string to_string(AdaptMode mode);
AdaptMode adapt_mode_from_string(const std::string& s);

struct AdaptConfig {
  AdaptMode mode = AdaptMode::kKd;
  double lr = 1e-5;
  int epochs = 120;
  double gamma = 0.0;
  double segment_s = 10.0;
  int batch_size = 8;
  double grad_clip_norm = 5.0;
  std::uint64_t seed = 1;
  int group_id = 1;
  std::string train_split = "adapt";
  std::string val_split = "val";
  bool log_val = true;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Whole-run configuration: one JSON document with section objects.

struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "runs/default";

  struct Assets {
    std::filesystem::path root = "assets";
    bool procedural = true;
    ProceduralAssetConfig procedural_config;
  } assets;

  struct Synth {
    SynthConfig generic = SynthConfig::generic_defaults();
    SynthConfig group = SynthConfig::group_defaults();
    int groups = 4;
    int group_size = 5;
    int jobs = 1;

    /// Dataset seeds are offsets within the run seed, so one knob reseeds
    /// every dataset.
    static SynthConfig resolved(const SynthConfig& base, std::uint64_t run_seed);
    SynthConfig generic_for(std::uint64_t run_seed) const { return resolved(generic, run_seed); }
    SynthConfig group_for(std::uint64_t run_seed) const { return resolved(group, run_seed); }
  } synth;

  ModelConfig teacher;
  ModelConfig student;

  struct Train {
    TrainConfig teacher = TrainConfig::for_role(ModelRole::kTeacher);
    TrainConfig student = TrainConfig::for_role(ModelRole::kStudent);
    double teacher_gamma = 0.5;
    double student_gamma = 0.0;
  } train;

  AdaptConfig adapt;
  std::vector<AdaptMode> adapt_modes{AdaptMode::kKd, AdaptMode::kOracle};
  int adapt_jobs = 1;

  struct Eval {
    int batch = 4;
    std::string split = "test";
  } eval;

  struct Report {
    double bin_width_db = 1.0;
  } report;

  /// Desk-scale defaults for every section.
  static RunConfig defaults();
  /// Small end-to-end preset sized for a laptop CPU.
  static RunConfig quickstart();
};

Json to_json(const RunConfig& c);
/// Strict parse: unknown keys anywhere throw "bad-config". Missing keys keep
/// their defaults.
RunConfig run_config_from_json(const Json& j);

/// Applies TGIF_<SECTION>_<KEY>=value overrides from `env` (name -> value) to
/// a config document, e.g. TGIF_TRAIN_STUDENT_MAX_EPOCHS=5. Values parse as
/// JSON when possible, else as strings.
void apply_env_overrides(Json& doc, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> tgif_environment();

/// File + environment + validation.
RunConfig load_run_config(const std::filesystem::path& path);

/// `base`, deep-merged with the optional file, then environment overrides.
RunConfig resolve_run_config(const RunConfig& base, const std::optional<std::filesystem::path>& file,
                             const std::map<std::string, std::string>& env);

}  // namespace tgif
