// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgif/json_util.hpp"

#include "tgif/assets.hpp"
#include "tgif/signal.hpp"

namespace tgif {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SynthConfig {
  int sample_rate = kDefaultSampleRate;
  double duration_s = 10.0;
  int k_min = 1;
  int k_max = 5;
  Range sir_range_db{-5.0, 25.0};
  Range snr_range_db{-5.0, 25.0};
  double reverb_prob = 0.8;
  double enrollment_duration_s = 3.0;
  double hours = 2.2;
  /// Split name -> weight. Assignment follows canonical order
  /// train, adapt, val, test.
  std::vector<std::pair<std::string, double>> splits{{"train", 10.0}, {"val", 1.0}};
  std::uint64_t seed = 1;
  /// When a group has fewer members than k_max, draw K up to the group size
  /// instead of failing with "group-too-small".
  bool clip_k_to_group = true;

  /// Throws "bad-config" on malformed ranges.
  void validate() const;
  std::size_t samples_per_scene() const;
  std::size_t enrollment_samples() const;

  /// Generic recipe (SIR, SNR in [-5, 25] dB) and group recipe (SNR in
  /// [-15, 15] dB, 2:1:2 adapt/val/test).
  static SynthConfig generic_defaults();
  static SynthConfig group_defaults();
};

void to_json(Json& j, const SynthConfig& c);
/// Strict: unknown keys throw "bad-config".
void from_json(const Json& j, SynthConfig& c);

/// A fixed set of at most five talkers sharing one room and a noise domain.
struct TalkerGroup {
  int group_id = 1;
  std::vector<std::string> members;
  std::string room_id;
  std::vector<std::string> noise_domain;

  void validate() const;
};

void to_json(Json& j, const TalkerGroup& g);
void from_json(const Json& j, TalkerGroup& g);

/// Partitions the group pool into `count` disjoint groups of up to
/// `max_members` talkers; rooms rotate through the catalog's rooms.
std::vector<TalkerGroup> make_groups(const AssetCatalog& group_catalog, int count,
                                     int max_members, std::uint64_t seed);

void write_groups(const std::filesystem::path& path, const std::vector<TalkerGroup>& groups);
std::vector<TalkerGroup> read_groups(const std::filesystem::path& path);

/// One source placed in a scene. `phase` in [0, 1) picks the crop offset
/// (long utterance) or the loop start (short utterance).
struct SourceSlot {
  std::string speaker;
  std::string utterance;
  double phase = 0.0;
};

struct SceneSpec {
  std::string scene_id;
  SourceSlot target;
  std::vector<SourceSlot> interferers;
  int K = 1;
  std::optional<double> sir_db;  // empty when K == 1
  std::vector<double> per_interferer_level_db;
  std::optional<double> snr_db;  // empty when the scene has no noise
  bool reverb_on_target = false;
  std::string rir_ref;
  std::string noise_ref;
  double noise_phase = 0.0;
  double duration_s = 10.0;
  std::optional<int> group_id;

  std::vector<std::string> speakers() const;
};

void to_json(Json& j, const SceneSpec& s);
void from_json(const Json& j, SceneSpec& s);

/// Draws a scene recipe. Deterministic in (rng_seed, config, catalog, group).
/// Errors: "group-too-small", "pool-too-small", "asset-not-found".
SceneSpec sample_scene(std::uint64_t rng_seed, const SynthConfig& config,
                       const AssetCatalog& catalog,
                       const TalkerGroup* group = nullptr);

struct RenderedScene {
  AudioClip mixture;
  AudioClip dry_target;
  AudioClip reverberant_target;
  std::vector<AudioClip> interferers;  // scaled
  AudioClip noise;                     // scaled; zeros when the scene has no noise
  double peak_rescale = 1.0;           // factor applied to keep |x| <= 0.99
};

/// Renders x = h*s_target + sum(interferers) + noise with the exact SIR/SNR
/// of `spec`. Errors: "silent-source", "asset-not-found", "rate-mismatch".
RenderedScene render_scene(const SceneSpec& spec, const AssetCatalog& catalog,
                           AssetStore& store);

/// Cyclic loop or crop to `length` samples (see SourceSlot::phase).
std::vector<double> fit_length(const std::vector<double>& x, std::size_t length, double phase);

struct Enrollment {
  AudioClip clip;
  std::string utterance;
  std::size_t offset = 0;
};

/// Enrollment crop of `samples` from an utterance of `speaker` other than
/// `exclude`. Errors: "no-enrollment-source".
Enrollment select_enrollment(const SpeakerPool& pool, const std::string& speaker,
                             const std::string& exclude, std::uint64_t rng_seed,
                             std::size_t samples, AssetStore& store);

/// Number of distinct K-speaker subsets of an n-speaker pool.
std::uint64_t speaker_combinations(std::uint64_t n, std::uint64_t k);

// ---------------------------------------------------------------------------
// Manifests

struct ManifestPaths {
  std::string mixture;
  std::string dry_target;
  std::string reverberant_target;
  std::string enrollment;
  std::optional<std::string> pseudo_target;
};

struct ManifestRecord {
  std::string scene_id;
  ManifestPaths paths;
  int K = 1;
  std::optional<double> sir_db;
  std::optional<double> snr_db;
  bool reverb_on_target = false;
  std::optional<int> group_id;
  double measured_input_sdr_db = 0.0;
  std::string split;
  std::string target_speaker;
  std::vector<std::string> interferer_speakers;
};

void to_json(Json& j, const ManifestRecord& r);
void from_json(const Json& j, ManifestRecord& r);

/// JSON-lines manifest. Record paths are relative to `dir`.
struct Manifest {
  std::filesystem::path dir;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(const std::string& relative) const { return dir / relative; }
  std::vector<const ManifestRecord*> split(const std::string& name) const;
};

Manifest read_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const std::vector<ManifestRecord>& records);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// ceil(hours * 3600 / duration_s).
std::size_t scene_count(const SynthConfig& config);

/// Split label of every scene index, by largest remainder over the weights.
std::vector<std::string> assign_splits(const SynthConfig& config, std::size_t count);

/// Renders every scene into `out_dir/stems`, writes `out_dir/manifest.jsonl`
/// and returns its path. Per-scene seeds are mix_seed(config.seed, index), so
/// the output does not depend on `jobs`.
std::filesystem::path build_manifest(const SynthConfig& config, const AssetCatalog& catalog,
                                     const TalkerGroup* group,
                                     const std::filesystem::path& out_dir, int jobs = 1);

}  // namespace tgif
