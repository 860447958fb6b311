// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "tgif/signal.hpp"

namespace tgif {

struct UtteranceRef {
  std::string id;
  std::filesystem::path path;
};

enum class PoolRole { kGeneric, kGroup };

/// Speaker id -> utterances. Every speaker needs at least two utterances so
/// one can serve as enrollment for a mixture built from another.
struct SpeakerPool {
  std::map<std::string, std::vector<UtteranceRef>> utterances;
  PoolRole role = PoolRole::kGeneric;

  std::vector<std::string> speakers() const;
  const std::vector<UtteranceRef>& of(const std::string& speaker) const;
  /// Throws "bad-pool" if a speaker has fewer than two utterances.
  void validate() const;
};

struct NoiseRef {
  std::string id;
  std::string category;
  std::filesystem::path path;
};

struct RirRef {
  std::string id;
  std::string room;
  std::filesystem::path path;
};

struct AssetCatalog {
  SpeakerPool pool;
  std::vector<NoiseRef> noises;
  std::vector<RirRef> rirs;

  std::vector<std::string> rooms() const;
  std::vector<std::string> noise_categories() const;
};

/// Scans `root` laid out as
///   speech/<speaker>/<utterance>.wav
///   noise/<category>/<clip>.wav
///   rir/<room>/<rir>.wav
/// Entries are sorted so the catalog does not depend on directory order.
AssetCatalog scan_assets(const std::filesystem::path& root,
                         PoolRole role = PoolRole::kGeneric);

/// Loads clips by path, enforcing one sample rate. Thread-safe cache.
class AssetStore {
 public:
  explicit AssetStore(int sample_rate) : sample_rate_(sample_rate) {}
  virtual ~AssetStore() = default;

  /// Throws "asset-not-found" or "rate-mismatch".
  virtual std::shared_ptr<const AudioClip> load(const std::filesystem::path& path);

  int sample_rate() const { return sample_rate_; }

 private:
  int sample_rate_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<const AudioClip>> cache_;
};

// Procedural corpus for running without external recordings. "Speakers" are
// harmonic sources with a per-speaker pitch range and formant envelope; RIRs
// are exponentially decaying noise tails after a direct path.
struct ProceduralAssetConfig {
  int sample_rate = kDefaultSampleRate;
  int generic_speakers = 40;
  int group_speakers = 20;
  int utterances_per_speaker = 4;
  double utterance_min_s = 3.0;
  double utterance_max_s = 6.0;
  int generic_rooms = 8;
  int group_rooms = 4;
  int rirs_per_room = 4;
  int noises_per_category = 4;
  double noise_s = 12.0;
  std::uint64_t seed = 1;
};

inline const std::vector<std::string>& generic_noise_categories() {
  static const std::vector<std::string> kCategories = {"white", "pink", "brown",
                                                       "hum", "traffic"};
  return kCategories;
}

inline const std::vector<std::string>& household_noise_categories() {
  static const std::vector<std::string> kCategories = {"dishwashing", "kitchen",
                                                       "living_room"};
  return kCategories;
}

/// Writes <root>/generic and <root>/group trees (disjoint speakers, rooms and
/// noise categories).
void generate_procedural_assets(const std::filesystem::path& root,
                                const ProceduralAssetConfig& config);

// Individual generators, exposed for tests.
struct VoiceProfile {
  double f0_hz;
  double formants_hz[3];
  double bandwidths_hz[3];
  double tilt;          // spectral slope exponent
  double breathiness;   // fraction of aspiration noise
  double syllable_rate; // syllables per second
};

VoiceProfile random_voice(std::uint64_t seed);
AudioClip synth_utterance(const VoiceProfile& voice, double duration_s,
                          int sample_rate, std::uint64_t seed);
AudioClip synth_noise(const std::string& category, double duration_s,
                      int sample_rate, std::uint64_t seed);
AudioClip synth_rir(double t60_s, int sample_rate, std::uint64_t seed);

}  // namespace tgif
