// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "tgif/error.hpp"
#include "tgif/hash.hpp"
#include "tgif/rng.hpp"
#include "tgif/wav.hpp"

namespace fs = std::filesystem;

namespace tgif {
namespace {

const std::vector<std::string>& canonical_split_order() {
  static const std::vector<std::string> kOrder = {"train", "adapt", "val", "test"};
  return kOrder;
}

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
    throw Error("bad-config", std::string(name) + " must be a finite [lo, hi] with lo <= hi");
  }
}

Json range_json(const Range& r) { return Json::array({r.lo, r.hi}); }

Range range_from(const Json& j, const char* name) {
  if (!j.is_array() || j.size() != 2) {
    throw Error("bad-config", std::string(name) + " must be a two-element array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> optional_from(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->template get<T>();
}

const UtteranceRef& find_utterance(const SpeakerPool& pool, const SourceSlot& slot) {
  for (const auto& u : pool.of(slot.speaker)) {
    if (u.id == slot.utterance) return u;
  }
  throw Error("asset-not-found", "utterance " + slot.utterance);
}

template <typename Ref>
const Ref& find_by_id(const std::vector<Ref>& refs, const std::string& id) {
  for (const auto& r : refs) {
    if (r.id == id) return r;
  }
  throw Error("asset-not-found", id);
}

AudioClip clip_of(std::vector<double> samples, int sample_rate, std::string id) {
  AudioClip c;
  c.samples = std::move(samples);
  c.sample_rate = sample_rate;
  c.source_id = std::move(id);
  return c;
}

std::string scene_name(const TalkerGroup* group, std::size_t index) {
  char buf[48];
  if (group != nullptr) {
    std::snprintf(buf, sizeof buf, "g%02d-%06zu", group->group_id, index);
  } else {
    std::snprintf(buf, sizeof buf, "generic-%06zu", index);
  }
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// SynthConfig

void SynthConfig::validate() const {
  if (sample_rate <= 0) throw Error("bad-config", "sample_rate must be positive");
  if (!(duration_s > 0.0)) throw Error("bad-config", "duration_s must be positive");
  if (!(enrollment_duration_s > 0.0)) throw Error("bad-config", "enrollment_duration_s must be positive");
  if (k_min < 1 || k_max < k_min || k_max > 5) {
    throw Error("bad-config", "k_range must satisfy 1 <= lo <= hi <= 5");
  }
  check_range(sir_range_db, "sir_range_db");
  check_range(snr_range_db, "snr_range_db");
  if (reverb_prob < 0.0 || reverb_prob > 1.0) throw Error("bad-config", "reverb_prob must be in [0, 1]");
  if (!(hours > 0.0)) throw Error("bad-config", "hours must be positive");
  if (splits.empty()) throw Error("bad-config", "splits must not be empty");
  for (const auto& [name, weight] : splits) {
    const auto& order = canonical_split_order();
    if (std::find(order.begin(), order.end(), name) == order.end()) {
      throw Error("bad-config", "unknown split '" + name + "'");
    }
    if (!(weight >= 0.0)) throw Error("bad-config", "split weights must be non-negative");
  }
}

std::size_t SynthConfig::samples_per_scene() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

std::size_t SynthConfig::enrollment_samples() const {
  return static_cast<std::size_t>(std::llround(enrollment_duration_s * sample_rate));
}

SynthConfig SynthConfig::generic_defaults() { return SynthConfig{}; }

SynthConfig SynthConfig::group_defaults() {
  SynthConfig c;
  c.snr_range_db = {-15.0, 15.0};
  c.hours = 0.5;
  c.splits = {{"adapt", 2.0}, {"val", 1.0}, {"test", 2.0}};
  c.seed = 2;
  return c;
}

void to_json(Json& j, const SynthConfig& c) {
  Json splits = Json::object();
  for (const auto& [name, weight] : c.splits) splits[name] = weight;
  j = Json{{"sample_rate", c.sample_rate},
           {"duration_s", c.duration_s},
           {"k_range", Json::array({c.k_min, c.k_max})},
           {"sir_range_db", range_json(c.sir_range_db)},
           {"snr_range_db", range_json(c.snr_range_db)},
           {"reverb_prob", c.reverb_prob},
           {"enrollment_duration_s", c.enrollment_duration_s},
           {"hours", c.hours},
           {"splits", splits},
           {"seed", c.seed},
           {"clip_k_to_group", c.clip_k_to_group}};
}

void from_json(const Json& j, SynthConfig& c) {
  reject_unknown_keys(j,
                      {"sample_rate", "duration_s", "k_range", "sir_range_db", "snr_range_db",
                       "reverb_prob", "enrollment_duration_s", "hours", "splits", "seed",
                       "clip_k_to_group"},
                      "synth");
  read_opt(j, "sample_rate", c.sample_rate);
  read_opt(j, "duration_s", c.duration_s);
  if (j.contains("k_range")) {
    const Range k = range_from(j.at("k_range"), "k_range");
    c.k_min = static_cast<int>(k.lo);
    c.k_max = static_cast<int>(k.hi);
  }
  if (j.contains("sir_range_db")) c.sir_range_db = range_from(j.at("sir_range_db"), "sir_range_db");
  if (j.contains("snr_range_db")) c.snr_range_db = range_from(j.at("snr_range_db"), "snr_range_db");
  read_opt(j, "reverb_prob", c.reverb_prob);
  read_opt(j, "enrollment_duration_s", c.enrollment_duration_s);
  read_opt(j, "hours", c.hours);
  if (j.contains("splits")) {
    const Json& s = j.at("splits");
    if (!s.is_object()) throw Error("bad-config", "splits must be an object of weights");
    c.splits.clear();
    for (const auto& [name, weight] : s.items()) c.splits.emplace_back(name, weight.get<double>());
  }
  read_opt(j, "seed", c.seed);
  read_opt(j, "clip_k_to_group", c.clip_k_to_group);
  c.validate();
}

// ---------------------------------------------------------------------------
// Talker groups

void TalkerGroup::validate() const {
  if (members.empty() || members.size() > 5) {
    throw Error("bad-config", "a talker group has between 1 and 5 members");
  }
  const std::set<std::string> unique(members.begin(), members.end());
  if (unique.size() != members.size()) throw Error("bad-config", "duplicate group member");
}

void to_json(Json& j, const TalkerGroup& g) {
  j = Json{{"group_id", g.group_id},
           {"members", g.members},
           {"room_id", g.room_id},
           {"noise_domain", g.noise_domain}};
}

void from_json(const Json& j, TalkerGroup& g) {
  reject_unknown_keys(j, {"group_id", "members", "room_id", "noise_domain"}, "group");
  g.group_id = j.at("group_id").get<int>();
  g.members = j.at("members").get<std::vector<std::string>>();
  g.room_id = j.value("room_id", std::string{});
  g.noise_domain = j.value("noise_domain", std::vector<std::string>{});
  g.validate();
}

std::vector<TalkerGroup> make_groups(const AssetCatalog& group_catalog, int count,
                                     int max_members, std::uint64_t seed) {
  if (count < 1) throw Error("bad-config", "group count must be positive");
  if (max_members < 1 || max_members > 5) throw Error("bad-config", "group size must be in 1..5");
  const auto speakers = group_catalog.pool.speakers();
  const auto rooms = group_catalog.rooms();
  if (speakers.size() < static_cast<std::size_t>(count)) {
    throw Error("pool-too-small", "fewer group speakers than groups");
  }
  if (rooms.empty()) throw Error("asset-not-found", "no rooms in group catalog");
  Rng rng(seed);
  const auto order = rng.permutation(speakers.size());
  std::vector<TalkerGroup> groups;
  std::size_t next = 0;
  for (int l = 0; l < count; ++l) {
    TalkerGroup g;
    g.group_id = l + 1;
    const std::size_t remaining_groups = static_cast<std::size_t>(count - l);
    const std::size_t share = std::min<std::size_t>(
        max_members, (speakers.size() - next) / remaining_groups);
    for (std::size_t m = 0; m < share; ++m) g.members.push_back(speakers[order[next++]]);
    g.room_id = rooms[static_cast<std::size_t>(l) % rooms.size()];
    g.noise_domain = group_catalog.noise_categories();
    g.validate();
    groups.push_back(std::move(g));
  }
  return groups;
}

void write_groups(const fs::path& path, const std::vector<TalkerGroup>& groups) {
  Json j = Json::array();
  for (const auto& g : groups) j.push_back(g);
  write_text(path, j.dump(2) + "\n");
}

std::vector<TalkerGroup> read_groups(const fs::path& path) {
  const Json j = Json::parse(read_text(path));
  std::vector<TalkerGroup> out;
  for (const auto& g : j) out.push_back(g.get<TalkerGroup>());
  return out;
}

// ---------------------------------------------------------------------------
// Scene specs

std::vector<std::string> SceneSpec::speakers() const {
  std::vector<std::string> out{target.speaker};
  for (const auto& s : interferers) out.push_back(s.speaker);
  return out;
}

namespace {

Json slot_json(const SourceSlot& s) {
  return Json{{"speaker", s.speaker}, {"utterance", s.utterance}, {"phase", s.phase}};
}

SourceSlot slot_from(const Json& j) {
  return {j.at("speaker").get<std::string>(), j.at("utterance").get<std::string>(),
          j.at("phase").get<double>()};
}

}  // namespace

void to_json(Json& j, const SceneSpec& s) {
  Json interferers = Json::array();
  for (const auto& i : s.interferers) interferers.push_back(slot_json(i));
  j = Json{{"scene_id", s.scene_id},
           {"target", slot_json(s.target)},
           {"interferers", interferers},
           {"K", s.K},
           {"sir_db", optional_json(s.sir_db)},
           {"per_interferer_level_db", s.per_interferer_level_db},
           {"snr_db", optional_json(s.snr_db)},
           {"reverb_on_target", s.reverb_on_target},
           {"rir_ref", s.rir_ref},
           {"noise_ref", s.noise_ref},
           {"noise_phase", s.noise_phase},
           {"duration_s", s.duration_s},
           {"group_id", optional_json(s.group_id)}};
}

void from_json(const Json& j, SceneSpec& s) {
  s.scene_id = j.at("scene_id").get<std::string>();
  s.target = slot_from(j.at("target"));
  s.interferers.clear();
  for (const auto& i : j.at("interferers")) s.interferers.push_back(slot_from(i));
  s.K = j.at("K").get<int>();
  s.sir_db = optional_from<double>(j, "sir_db");
  s.per_interferer_level_db = j.at("per_interferer_level_db").get<std::vector<double>>();
  s.snr_db = optional_from<double>(j, "snr_db");
  s.reverb_on_target = j.at("reverb_on_target").get<bool>();
  s.rir_ref = j.at("rir_ref").get<std::string>();
  s.noise_ref = j.at("noise_ref").get<std::string>();
  s.noise_phase = j.at("noise_phase").get<double>();
  s.duration_s = j.at("duration_s").get<double>();
  s.group_id = optional_from<int>(j, "group_id");
}

SceneSpec sample_scene(std::uint64_t rng_seed, const SynthConfig& config,
                       const AssetCatalog& catalog, const TalkerGroup* group) {
  config.validate();
  Rng rng(rng_seed);
  SceneSpec spec;
  spec.duration_s = config.duration_s;

  std::vector<std::string> candidates;
  int k_max = config.k_max;
  if (group != nullptr) {
    group->validate();
    candidates = group->members;
    if (k_max > static_cast<int>(candidates.size())) {
      if (!config.clip_k_to_group) {
        throw Error("group-too-small", "group " + std::to_string(group->group_id) + " has " +
                                           std::to_string(candidates.size()) + " members, k_max is " +
                                           std::to_string(k_max));
      }
      k_max = static_cast<int>(candidates.size());
    }
    spec.group_id = group->group_id;
  } else {
    candidates = catalog.pool.speakers();
  }
  if (static_cast<int>(candidates.size()) < k_max) {
    throw Error("pool-too-small", "pool has " + std::to_string(candidates.size()) + " speakers");
  }
  const int k_min = std::min(config.k_min, k_max);
  spec.K = static_cast<int>(rng.integer(k_min, k_max));

  const auto chosen = rng.choose(candidates.size(), static_cast<std::size_t>(spec.K));
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    SourceSlot slot;
    slot.speaker = candidates[chosen[i]];
    const auto& utts = catalog.pool.of(slot.speaker);
    slot.utterance = utts[static_cast<std::size_t>(
                              rng.integer(0, static_cast<std::int64_t>(utts.size()) - 1))]
                         .id;
    slot.phase = rng.uniform();
    if (i == 0) {
      spec.target = std::move(slot);
    } else {
      spec.interferers.push_back(std::move(slot));
    }
  }

  if (spec.K > 1) {
    spec.sir_db = rng.uniform(config.sir_range_db.lo, config.sir_range_db.hi);
    for (int i = 1; i < spec.K; ++i) {
      spec.per_interferer_level_db.push_back(
          rng.uniform(config.sir_range_db.lo, config.sir_range_db.hi));
    }
  }

  std::vector<const NoiseRef*> noises;
  for (const auto& n : catalog.noises) {
    if (group == nullptr || group->noise_domain.empty() ||
        std::find(group->noise_domain.begin(), group->noise_domain.end(), n.category) !=
            group->noise_domain.end()) {
      noises.push_back(&n);
    }
  }
  if (noises.empty()) throw Error("asset-not-found", "no noise clip matches the scene domain");
  spec.noise_ref =
      noises[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(noises.size()) - 1))]->id;
  spec.noise_phase = rng.uniform();
  spec.snr_db = rng.uniform(config.snr_range_db.lo, config.snr_range_db.hi);

  spec.reverb_on_target = rng.bernoulli(config.reverb_prob);
  std::vector<const RirRef*> rirs;
  for (const auto& r : catalog.rirs) {
    if (group == nullptr || group->room_id.empty() || r.room == group->room_id) rirs.push_back(&r);
  }
  if (!rirs.empty()) {
    const auto& pick =
        rirs[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(rirs.size()) - 1))];
    if (spec.reverb_on_target) spec.rir_ref = pick->id;
  } else if (spec.reverb_on_target) {
    throw Error("asset-not-found", "no RIR available for a reverberant scene");
  }
  return spec;
}

std::vector<double> fit_length(const std::vector<double>& x, std::size_t length, double phase) {
  if (x.empty()) throw Error("silent-source", "empty source clip");
  std::vector<double> out(length);
  if (x.size() >= length) {
    const std::size_t slack = x.size() - length;
    const auto offset = std::min(slack, static_cast<std::size_t>(phase * (slack + 1)));
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(offset),
              x.begin() + static_cast<std::ptrdiff_t>(offset + length), out.begin());
  } else {
    std::size_t pos = std::min(x.size() - 1, static_cast<std::size_t>(phase * x.size()));
    for (std::size_t i = 0; i < length; ++i) {
      out[i] = x[pos];
      if (++pos == x.size()) pos = 0;
    }
  }
  return out;
}

RenderedScene render_scene(const SceneSpec& spec, const AssetCatalog& catalog, AssetStore& store) {
  const int sr = store.sample_rate();
  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * sr));
  if (spec.interferers.size() + 1 != static_cast<std::size_t>(spec.K) ||
      spec.per_interferer_level_db.size() != spec.interferers.size()) {
    throw Error("bad-scene", spec.scene_id + ": K does not match the interferer lists");
  }
  if (spec.K > 1 && !spec.sir_db) throw Error("bad-scene", spec.scene_id + ": missing sir_db");
  {
    const auto speakers = spec.speakers();
    if (std::set<std::string>(speakers.begin(), speakers.end()).size() != speakers.size()) {
      throw Error("bad-scene", spec.scene_id + ": speakers must be distinct");
    }
  }

  const auto load_slot = [&](const SourceSlot& slot) {
    const auto clip = store.load(find_utterance(catalog.pool, slot).path);
    return fit_length(clip->samples, n, slot.phase);
  };

  RenderedScene out;
  out.dry_target = clip_of(load_slot(spec.target), sr, spec.target.utterance);
  if (power(out.dry_target) <= 0.0) throw Error("silent-source", spec.target.utterance);
  if (spec.reverb_on_target) {
    const auto rir = store.load(find_by_id(catalog.rirs, spec.rir_ref).path);
    out.reverberant_target = convolve_rir(out.dry_target, *rir);
  } else {
    out.reverberant_target = out.dry_target;
  }
  const AudioClip& t = out.reverberant_target;

  // Level each interferer, then rescale them jointly to the aggregate SIR.
  std::vector<double> interference(n, 0.0);
  for (std::size_t i = 0; i < spec.interferers.size(); ++i) {
    AudioClip s = clip_of(load_slot(spec.interferers[i]), sr, spec.interferers[i].utterance);
    const double g = gain_for_ratio(t, s, spec.per_interferer_level_db[i]);
    for (std::size_t k = 0; k < n; ++k) {
      s.samples[k] *= g;
      interference[k] += s.samples[k];
    }
    out.interferers.push_back(std::move(s));
  }
  if (!out.interferers.empty()) {
    const double c = gain_for_ratio(t.view(), interference, *spec.sir_db);
    for (auto& s : out.interferers) {
      for (double& v : s.samples) v *= c;
    }
  }

  out.noise = clip_of(std::vector<double>(n, 0.0), sr, spec.noise_ref);
  if (!spec.noise_ref.empty() && spec.snr_db) {
    const auto noise = store.load(find_by_id(catalog.noises, spec.noise_ref).path);
    out.noise.samples = fit_length(noise->samples, n, spec.noise_phase);
    const double g = gain_for_ratio(t, out.noise, *spec.snr_db);
    for (double& v : out.noise.samples) v *= g;
  }

  const auto mix = [&] {
    out.mixture = clip_of(out.reverberant_target.samples, sr, spec.scene_id);
    for (const auto& s : out.interferers) {
      for (std::size_t k = 0; k < n; ++k) out.mixture.samples[k] += s.samples[k];
    }
    for (std::size_t k = 0; k < n; ++k) out.mixture.samples[k] += out.noise.samples[k];
  };
  mix();

  double peak = 0.0;
  for (double v : out.mixture.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    const double f = 0.99 / peak;
    out.peak_rescale = f;
    const auto scale = [f](AudioClip& c) {
      for (double& v : c.samples) v *= f;
    };
    scale(out.dry_target);
    scale(out.reverberant_target);
    for (auto& s : out.interferers) scale(s);
    scale(out.noise);
    mix();
  }
  return out;
}

Enrollment select_enrollment(const SpeakerPool& pool, const std::string& speaker,
                             const std::string& exclude, std::uint64_t rng_seed,
                             std::size_t samples, AssetStore& store) {
  std::vector<const UtteranceRef*> candidates;
  for (const auto& u : pool.of(speaker)) {
    if (u.id != exclude) candidates.push_back(&u);
  }
  if (candidates.empty()) {
    throw Error("no-enrollment-source", "speaker " + speaker + " has no other utterance");
  }
  Rng rng(rng_seed);
  const UtteranceRef& pick = *candidates[static_cast<std::size_t>(
      rng.integer(0, static_cast<std::int64_t>(candidates.size()) - 1))];
  const auto clip = store.load(pick.path);
  if (clip->empty()) throw Error("silent-source", pick.id);

  Enrollment e;
  e.utterance = pick.id;
  e.clip.sample_rate = clip->sample_rate;
  e.clip.source_id = pick.id;
  e.clip.samples.resize(samples);
  if (clip->size() >= samples) {
    e.offset = static_cast<std::size_t>(
        rng.integer(0, static_cast<std::int64_t>(clip->size() - samples)));
    std::copy_n(clip->samples.begin() + static_cast<std::ptrdiff_t>(e.offset), samples,
                e.clip.samples.begin());
  } else {
    e.offset = static_cast<std::size_t>(
        rng.integer(0, static_cast<std::int64_t>(clip->size()) - 1));
    std::size_t pos = e.offset;
    for (std::size_t i = 0; i < samples; ++i) {
      e.clip.samples[i] = clip->samples[pos];
      if (++pos == clip->size()) pos = 0;
    }
  }
  return e;
}

std::uint64_t speaker_combinations(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

// ---------------------------------------------------------------------------
// Manifests

void to_json(Json& j, const ManifestRecord& r) {
  Json paths{{"mixture", r.paths.mixture},
             {"dry_target", r.paths.dry_target},
             {"reverberant_target", r.paths.reverberant_target},
             {"enrollment", r.paths.enrollment}};
  if (r.paths.pseudo_target) paths["pseudo_target"] = *r.paths.pseudo_target;
  j = Json{{"scene_id", r.scene_id},
           {"paths", paths},
           {"K", r.K},
           {"sir_db", optional_json(r.sir_db)},
           {"snr_db", optional_json(r.snr_db)},
           {"reverb_on_target", r.reverb_on_target},
           {"group_id", optional_json(r.group_id)},
           {"measured_input_sdr_db", r.measured_input_sdr_db},
           {"split", r.split},
           {"target_speaker", r.target_speaker},
           {"interferer_speakers", r.interferer_speakers}};
}

void from_json(const Json& j, ManifestRecord& r) {
  r.scene_id = j.at("scene_id").get<std::string>();
  const Json& p = j.at("paths");
  r.paths.mixture = p.at("mixture").get<std::string>();
  r.paths.dry_target = p.value("dry_target", std::string{});
  r.paths.reverberant_target = p.value("reverberant_target", std::string{});
  r.paths.enrollment = p.at("enrollment").get<std::string>();
  r.paths.pseudo_target = optional_from<std::string>(p, "pseudo_target");
  r.K = j.at("K").get<int>();
  r.sir_db = optional_from<double>(j, "sir_db");
  r.snr_db = optional_from<double>(j, "snr_db");
  r.reverb_on_target = j.value("reverb_on_target", false);
  r.group_id = optional_from<int>(j, "group_id");
  r.measured_input_sdr_db = j.value("measured_input_sdr_db", 0.0);
  r.split = j.at("split").get<std::string>();
  r.target_speaker = j.value("target_speaker", std::string{});
  r.interferer_speakers = j.value("interferer_speakers", std::vector<std::string>{});
}

std::vector<const ManifestRecord*> Manifest::split(const std::string& name) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (name.empty() || r.split == name) out.push_back(&r);
  }
  return out;
}

Manifest read_manifest(const fs::path& path) {
  std::istringstream in(read_text(path));
  Manifest m;
  m.dir = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      m.records.push_back(Json::parse(line).get<ManifestRecord>());
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-manifest", path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return m;
}

std::string serialize_manifest(const std::vector<ManifestRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += Json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<ManifestRecord>& records) {
  write_text(path, serialize_manifest(records));
}

std::size_t scene_count(const SynthConfig& config) {
  return static_cast<std::size_t>(std::ceil(config.hours * 3600.0 / config.duration_s - 1e-9));
}

std::vector<std::string> assign_splits(const SynthConfig& config, std::size_t count) {
  std::vector<std::pair<std::string, double>> ordered;
  for (const auto& name : canonical_split_order()) {
    for (const auto& [split, weight] : config.splits) {
      if (split == name) ordered.emplace_back(split, weight);
    }
  }
  double total = 0.0;
  for (const auto& [_, w] : ordered) total += w;
  if (!(total > 0.0)) throw Error("bad-config", "split weights sum to zero");

  std::vector<std::size_t> counts(ordered.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const double quota = count * ordered[i].second / total;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    assigned += counts[i];
    remainders.emplace_back(quota - counts[i], i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < count; ++r, ++assigned) ++counts[remainders[r].second];

  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < ordered.size(); ++i) out.insert(out.end(), counts[i], ordered[i].first);
  return out;
}

fs::path build_manifest(const SynthConfig& config, const AssetCatalog& catalog,
                        const TalkerGroup* group, const fs::path& out_dir, int jobs) {
  config.validate();
  catalog.pool.validate();
  const std::size_t count = scene_count(config);
  const auto splits = assign_splits(config, count);
  AssetStore store(config.sample_rate);
  const fs::path stems = out_dir / "stems";
  std::error_code ec;
  fs::create_directories(stems, ec);
  if (ec) throw Error("io-error", stems.string() + ": " + ec.message());

  std::vector<ManifestRecord> records(count);
  std::vector<std::exception_ptr> failures(count);

  const auto render_one = [&](std::size_t index) {
    const std::uint64_t seed = mix_seed(config.seed, index);
    SceneSpec spec = sample_scene(seed, config, catalog, group);
    spec.scene_id = scene_name(group, index);
    RenderedScene scene = render_scene(spec, catalog, store);
    Enrollment enrollment = select_enrollment(catalog.pool, spec.target.speaker,
                                              spec.target.utterance, mix_seed(seed, 1),
                                              config.enrollment_samples(), store);
    quantize_float32(scene.mixture);
    quantize_float32(scene.dry_target);
    quantize_float32(scene.reverberant_target);
    quantize_float32(enrollment.clip);

    ManifestRecord r;
    r.scene_id = spec.scene_id;
    r.paths.mixture = "stems/" + spec.scene_id + "_mixture.wav";
    r.paths.dry_target = "stems/" + spec.scene_id + "_dry.wav";
    r.paths.reverberant_target = "stems/" + spec.scene_id + "_reverb.wav";
    r.paths.enrollment = "stems/" + spec.scene_id + "_enroll.wav";
    write_wav(out_dir / r.paths.mixture, scene.mixture);
    write_wav(out_dir / r.paths.dry_target, scene.dry_target);
    write_wav(out_dir / r.paths.reverberant_target, scene.reverberant_target);
    write_wav(out_dir / r.paths.enrollment, enrollment.clip);
    r.K = spec.K;
    r.sir_db = spec.sir_db;
    r.snr_db = spec.snr_db;
    r.reverb_on_target = spec.reverb_on_target;
    r.group_id = spec.group_id;
    r.measured_input_sdr_db = input_sdr(scene.mixture, scene.dry_target);
    r.split = splits[index];
    r.target_speaker = spec.target.speaker;
    for (const auto& s : spec.interferers) r.interferer_speakers.push_back(s.speaker);
    records[index] = std::move(r);
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        render_one(i);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, jobs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  const fs::path manifest = out_dir / "manifest.jsonl";
  write_manifest(manifest, records);
  return manifest;
}

}  // namespace tgif
