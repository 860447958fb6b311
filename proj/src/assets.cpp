// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/assets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "tgif/error.hpp"
#include "tgif/rng.hpp"
#include "tgif/wav.hpp"

namespace fs = std::filesystem;

namespace tgif {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<fs::path> sorted_children(const fs::path& dir, bool want_dirs) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (want_dirs ? entry.is_directory()
                  : (entry.is_regular_file() && entry.path().extension() == ".wav")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// RBJ cookbook biquad.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0;

  static Biquad bandpass(double center_hz, double q, int sample_rate) {
    const double w0 = kTwoPi * center_hz / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = alpha / a0;
    f.b1 = 0.0;
    f.b2 = -alpha / a0;
    f.a1 = -2.0 * std::cos(w0) / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
  }

  static Biquad highpass(double cutoff_hz, int sample_rate) {
    const double w0 = kTwoPi * cutoff_hz / sample_rate;
    const double alpha = std::sin(w0) / (2.0 * 0.7071);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    Biquad f;
    f.b0 = (1.0 + c) / 2.0 / a0;
    f.b1 = -(1.0 + c) / a0;
    f.b2 = f.b0;
    f.a1 = -2.0 * c / a0;
    f.a2 = (1.0 - alpha) / a0;
    return f;
  }

  double operator()(double x) {
    const double y = b0 * x + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
    x2 = x1;
    x1 = x;
    y2 = y1;
    y1 = y;
    return y;
  }
};

void normalize_rms(std::vector<double>& x, double target_rms) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  const double rms = std::sqrt(acc / std::max<std::size_t>(1, x.size()));
  if (rms <= 0.0) return;
  double scale = target_rms / rms;
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  if (peak * scale > 0.95) scale = 0.95 / peak;
  for (double& v : x) v *= scale;
}

double nyquist_safe(double hz, int sample_rate) {
  return std::min(hz, 0.45 * sample_rate);
}

AudioClip make_clip(std::vector<double> samples, int sample_rate) {
  AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate = sample_rate;
  return clip;
}

double formant_gain(const VoiceProfile& v, const double (&formants)[3], double f) {
  double g = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double d = (f - formants[i]) / (0.5 * v.bandwidths_hz[i]);
    g += 1.0 / (1.0 + d * d);
  }
  return g * std::pow(std::max(f, 50.0) / 100.0, -v.tilt);
}

void write_clip(const fs::path& path, AudioClip clip) {
  quantize_float32(clip);
  write_wav(path, clip, WavFormat::kFloat32);
}

std::string numbered(const char* prefix, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03d", prefix, index);
  return buf;
}

}  // namespace

std::vector<std::string> SpeakerPool::speakers() const {
  std::vector<std::string> out;
  out.reserve(utterances.size());
  for (const auto& [speaker, _] : utterances) out.push_back(speaker);
  return out;
}

const std::vector<UtteranceRef>& SpeakerPool::of(const std::string& speaker) const {
  const auto it = utterances.find(speaker);
  if (it == utterances.end()) throw Error("asset-not-found", "speaker " + speaker);
  return it->second;
}

void SpeakerPool::validate() const {
  if (utterances.empty()) throw Error("bad-pool", "speaker pool is empty");
  for (const auto& [speaker, utts] : utterances) {
    if (utts.size() < 2) {
      throw Error("bad-pool", "speaker " + speaker + " has fewer than 2 utterances");
    }
  }
}

std::vector<std::string> AssetCatalog::rooms() const {
  std::set<std::string> out;
  for (const auto& r : rirs) out.insert(r.room);
  return {out.begin(), out.end()};
}

std::vector<std::string> AssetCatalog::noise_categories() const {
  std::set<std::string> out;
  for (const auto& n : noises) out.insert(n.category);
  return {out.begin(), out.end()};
}

AssetCatalog scan_assets(const fs::path& root, PoolRole role) {
  if (!fs::is_directory(root)) throw Error("asset-not-found", root.string());
  AssetCatalog catalog;
  catalog.pool.role = role;
  for (const auto& speaker_dir : sorted_children(root / "speech", true)) {
    auto& utts = catalog.pool.utterances[speaker_dir.filename().string()];
    for (const auto& file : sorted_children(speaker_dir, false)) {
      utts.push_back({speaker_dir.filename().string() + "/" + file.stem().string(), file});
    }
  }
  for (const auto& category_dir : sorted_children(root / "noise", true)) {
    for (const auto& file : sorted_children(category_dir, false)) {
      catalog.noises.push_back({category_dir.filename().string() + "/" + file.stem().string(),
                                category_dir.filename().string(), file});
    }
  }
  for (const auto& room_dir : sorted_children(root / "rir", true)) {
    for (const auto& file : sorted_children(room_dir, false)) {
      catalog.rirs.push_back({room_dir.filename().string() + "/" + file.stem().string(),
                              room_dir.filename().string(), file});
    }
  }
  return catalog;
}

std::shared_ptr<const AudioClip> AssetStore::load(const fs::path& path) {
  const std::string key = path.lexically_normal().string();
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto clip = std::make_shared<AudioClip>(read_wav(path));
  if (clip->sample_rate != sample_rate_) {
    throw Error("rate-mismatch", path.string() + " is " +
                                     std::to_string(clip->sample_rate) + " Hz, expected " +
                                     std::to_string(sample_rate_));
  }
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(key, std::move(clip)).first->second;
}

VoiceProfile random_voice(std::uint64_t seed) {
  Rng rng(seed);
  VoiceProfile v{};
  // Log-uniform pitch spanning low male to high female/child voices.
  v.f0_hz = std::exp(rng.uniform(std::log(85.0), std::log(260.0)));
  const double tract = rng.uniform(0.85, 1.2);
  v.formants_hz[0] = rng.uniform(350.0, 800.0) * tract;
  v.formants_hz[1] = rng.uniform(1000.0, 2200.0) * tract;
  v.formants_hz[2] = rng.uniform(2300.0, 3200.0) * tract;
  v.bandwidths_hz[0] = rng.uniform(60.0, 120.0);
  v.bandwidths_hz[1] = rng.uniform(90.0, 180.0);
  v.bandwidths_hz[2] = rng.uniform(120.0, 250.0);
  v.tilt = rng.uniform(0.6, 1.4);
  v.breathiness = rng.uniform(0.02, 0.2);
  v.syllable_rate = rng.uniform(3.0, 6.0);
  return v;
}

AudioClip synth_utterance(const VoiceProfile& voice, double duration_s,
                          int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(n, 0.0);
  Biquad fricative = Biquad::highpass(nyquist_safe(2500.0, sample_rate), sample_rate);

  std::size_t t = static_cast<std::size_t>(rng.uniform(0.0, 0.2) * sample_rate);
  while (t < n) {
    const auto len = static_cast<std::size_t>(sample_rate / voice.syllable_rate *
                                              rng.uniform(0.6, 1.4));
    if (rng.bernoulli(0.15)) {
      t += static_cast<std::size_t>(len * rng.uniform(0.5, 1.5));
      continue;
    }
    // Unvoiced onset.
    if (rng.bernoulli(0.3)) {
      const auto flen = static_cast<std::size_t>(rng.uniform(0.03, 0.08) * sample_rate);
      const double amp = rng.uniform(0.05, 0.2);
      for (std::size_t i = 0; i < flen && t < n; ++i, ++t) {
        const double env = std::sin(std::numbers::pi * i / flen);
        out[t] += amp * env * fricative(rng.normal());
      }
    }
    double formants[3];
    for (int i = 0; i < 3; ++i) formants[i] = voice.formants_hz[i] * rng.uniform(0.85, 1.15);
    const double f_start = voice.f0_hz * rng.uniform(0.88, 1.12);
    const double f_end = voice.f0_hz * rng.uniform(0.88, 1.12);
    const double f_max = std::max(f_start, f_end);
    const int harmonics = std::max(1, static_cast<int>(0.45 * sample_rate / f_max));
    std::vector<double> amps(static_cast<std::size_t>(harmonics) + 1, 0.0);
    const double f_mid = 0.5 * (f_start + f_end);
    for (int h = 1; h <= harmonics; ++h) amps[h] = formant_gain(voice, formants, h * f_mid);
    const double level = rng.uniform(0.5, 1.0);

    double phase = rng.uniform(0.0, kTwoPi);
    for (std::size_t i = 0; i < len && t < n; ++i, ++t) {
      const double frac = static_cast<double>(i) / len;
      const double f0 = f_start + (f_end - f_start) * frac;
      phase += kTwoPi * f0 / sample_rate;
      if (phase > kTwoPi) phase -= kTwoPi;
      // sin(h*phase) by the Chebyshev recurrence.
      const double c2 = 2.0 * std::cos(phase);
      double s_prev = 0.0;
      double s_cur = std::sin(phase);
      double voiced = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        voiced += amps[h] * s_cur;
        const double s_next = c2 * s_cur - s_prev;
        s_prev = s_cur;
        s_cur = s_next;
      }
      const double env = std::pow(std::sin(std::numbers::pi * frac), 0.6);
      out[t] += level * env * (voiced + voice.breathiness * 4.0 * rng.normal() * amps[1]);
    }
  }
  normalize_rms(out, 0.08);
  return make_clip(std::move(out), sample_rate);
}

AudioClip synth_noise(const std::string& category, double duration_s,
                      int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  std::vector<double> out(n, 0.0);
  const double sr = sample_rate;

  const auto add_hum = [&](double level) {
    const double base = rng.bernoulli(0.5) ? 50.0 : 60.0;
    double amps[6];
    for (double& a : amps) a = rng.uniform(0.1, 1.0);
    for (std::size_t t = 0; t < n; ++t) {
      double v = 0.0;
      for (int h = 0; h < 6; ++h) v += amps[h] * std::sin(kTwoPi * base * (h + 1) * t / sr);
      out[t] += level * v;
    }
  };
  const auto add_band_noise = [&](double center, double q, double level, double mod_hz) {
    Biquad bp = Biquad::bandpass(nyquist_safe(center, sample_rate), q, sample_rate);
    const double mod_phase = rng.uniform(0.0, kTwoPi);
    for (std::size_t t = 0; t < n; ++t) {
      const double am = mod_hz > 0.0 ? 0.6 + 0.4 * std::sin(kTwoPi * mod_hz * t / sr + mod_phase) : 1.0;
      out[t] += level * am * bp(rng.normal());
    }
  };
  const auto add_clinks = [&](double rate_hz, double lo_hz, double hi_hz, double tau_s) {
    const auto events = static_cast<int>(rate_hz * duration_s);
    for (int e = 0; e < events; ++e) {
      const auto start = static_cast<std::size_t>(rng.uniform(0.0, 1.0) * n);
      const double f = nyquist_safe(rng.uniform(lo_hz, hi_hz), sample_rate);
      const double amp = rng.uniform(0.3, 1.0);
      const auto len = static_cast<std::size_t>(5.0 * tau_s * sr);
      for (std::size_t i = 0; i < len && start + i < n; ++i) {
        out[start + i] += amp * std::exp(-static_cast<double>(i) / (tau_s * sr)) * std::sin(kTwoPi * f * i / sr);
      }
    }
  };

  if (category == "white") {
    for (double& v : out) v = rng.normal();
  } else if (category == "pink") {
    // Paul Kellet's economy pink filter.
    double b0 = 0, b1 = 0, b2 = 0;
    for (double& v : out) {
      const double w = rng.normal();
      b0 = 0.99765 * b0 + w * 0.0990460;
      b1 = 0.96300 * b1 + w * 0.2965164;
      b2 = 0.57000 * b2 + w * 1.0526913;
      v = b0 + b1 + b2 + w * 0.1848;
    }
  } else if (category == "brown") {
    double y = 0.0;
    for (double& v : out) {
      y = 0.995 * y + 0.05 * rng.normal();
      v = y;
    }
  } else if (category == "hum") {
    add_hum(1.0);
    for (double& v : out) v += 0.05 * rng.normal();
  } else if (category == "traffic") {
    double y = 0.0;
    const double mod = rng.uniform(0.1, 0.5);
    for (std::size_t t = 0; t < n; ++t) {
      y = 0.98 * y + 0.1 * rng.normal();
      out[t] = y * (0.5 + 0.5 * std::sin(kTwoPi * mod * t / sr));
    }
  } else if (category == "dishwashing") {
    add_band_noise(rng.uniform(1200.0, 2500.0), 0.8, 1.0, rng.uniform(0.3, 2.0));
    add_clinks(rng.uniform(1.0, 3.0), 2000.0, 5000.0, rng.uniform(0.02, 0.06));
  } else if (category == "kitchen") {
    add_hum(0.3);
    add_band_noise(rng.uniform(300.0, 900.0), 1.5, 0.6, 0.0);
    add_clinks(rng.uniform(0.5, 2.0), 500.0, 3000.0, rng.uniform(0.01, 0.03));
  } else if (category == "living_room") {
    add_band_noise(rng.uniform(400.0, 1500.0), 0.6, 1.0, rng.uniform(2.0, 5.0));
    add_hum(0.2);
  } else {
    throw Error("bad-config", "unknown noise category " + category);
  }
  // Remove DC.
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= std::max<std::size_t>(1, n);
  for (double& v : out) v -= mean;
  normalize_rms(out, 0.05);
  return make_clip(std::move(out), sample_rate);
}

AudioClip synth_rir(double t60_s, int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  const double sr = sample_rate;
  // Direct path at index 0: the dry target stays time-aligned with its
  // reverberant image.
  const std::size_t predelay = 0;
  const auto length = predelay + static_cast<std::size_t>(std::min(t60_s, 1.0) * sr);
  std::vector<double> h(length, 0.0);
  h[predelay] = 1.0;
  for (int r = 0; r < 6; ++r) {
    const auto d = predelay + static_cast<std::size_t>(rng.uniform(0.002, 0.03) * sr);
    if (d < length) h[d] += rng.uniform(0.2, 0.6) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  }
  // Exponential tail scaled to a random direct-to-reverberant ratio.
  const double drr_db = rng.uniform(0.0, 10.0);
  std::vector<double> tail(length, 0.0);
  double energy = 0.0;
  double lp = 0.0;
  for (std::size_t t = predelay + 1; t < length; ++t) {
    lp = 0.6 * lp + 0.4 * rng.normal();
    tail[t] = lp * std::exp(-6.908 * (t - predelay) / (t60_s * sr));
    energy += tail[t] * tail[t];
  }
  const double gain = energy > 0.0 ? std::sqrt(std::pow(10.0, -drr_db / 10.0) / energy) : 0.0;
  for (std::size_t t = 0; t < length; ++t) h[t] += gain * tail[t];
  return make_clip(std::move(h), sample_rate);
}

void generate_procedural_assets(const fs::path& root, const ProceduralAssetConfig& config) {
  const int sr = config.sample_rate;
  std::uint64_t stream = 0;
  const auto next_seed = [&] { return mix_seed(config.seed, stream++); };

  const auto write_speakers = [&](const fs::path& dir, const char* prefix, int count) {
    for (int s = 0; s < count; ++s) {
      const VoiceProfile voice = random_voice(next_seed());
      const std::string speaker = numbered(prefix, s);
      for (int u = 0; u < config.utterances_per_speaker; ++u) {
        Rng dur(next_seed());
        const double seconds = dur.uniform(config.utterance_min_s, config.utterance_max_s);
        AudioClip clip = synth_utterance(voice, seconds, sr, next_seed());
        write_clip(dir / "speech" / speaker / (numbered("utt", u) + ".wav"), std::move(clip));
      }
    }
  };
  const auto write_noise = [&](const fs::path& dir, const std::vector<std::string>& categories) {
    for (const auto& category : categories) {
      for (int i = 0; i < config.noises_per_category; ++i) {
        AudioClip clip = synth_noise(category, config.noise_s, sr, next_seed());
        write_clip(dir / "noise" / category / (numbered("n", i) + ".wav"), std::move(clip));
      }
    }
  };
  const auto write_rooms = [&](const fs::path& dir, const char* prefix, int rooms,
                               double t60_lo, double t60_hi) {
    for (int r = 0; r < rooms; ++r) {
      Rng room(next_seed());
      const double t60 = room.uniform(t60_lo, t60_hi);
      for (int i = 0; i < config.rirs_per_room; ++i) {
        // Positions within one room differ slightly in decay.
        const double jitter = room.uniform(0.9, 1.1);
        AudioClip clip = synth_rir(t60 * jitter, sr, next_seed());
        write_clip(dir / "rir" / numbered(prefix, r) / (numbered("h", i) + ".wav"), std::move(clip));
      }
    }
  };

  write_speakers(root / "generic", "spk_g", config.generic_speakers);
  write_noise(root / "generic", generic_noise_categories());
  write_rooms(root / "generic", "room_g", config.generic_rooms, 0.2, 0.8);

  write_speakers(root / "group", "spk_t", config.group_speakers);
  write_noise(root / "group", household_noise_categories());
  write_rooms(root / "group", "room_t", config.group_rooms, 0.15, 0.35);
}

}  // namespace tgif
