// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/config.hpp"

#include <algorithm>
#include <cctype>

#include "tgif/error.hpp"
#include "tgif/hash.hpp"
#include "tgif/rng.hpp"

extern char** environ;

namespace tgif {

std::string to_string(ModelRole role) {
  return role == ModelRole::kTeacher ? "teacher" : "student";
}

ModelRole role_from_string(const std::string& s) {
  if (s == "teacher") return ModelRole::kTeacher;
  if (s == "student") return ModelRole::kStudent;
  throw Error("bad-config", "role must be teacher or student, got '" + s + "'");
}

std::string to_string(AdaptMode mode) { return mode == AdaptMode::kKd ? "kd" : "oracle"; }

AdaptMode adapt_mode_from_string(const std::string& s) {
  if (s == "kd") return AdaptMode::kKd;
  if (s == "oracle") return AdaptMode::kOracle;
  throw Error("bad-config", "adapt mode must be kd or oracle, got '" + s + "'");
}

// ---------------------------------------------------------------------------
// Model configs

void StudentConfig::validate() const {
  if (encoder_filters < 1 || bottleneck < 1 || hidden < 1 || embed_dim < 1) {
    throw Error("bad-config", "student channel counts must be positive");
  }
  if (encoder_kernel < 2 || encoder_kernel % 2 != 0) {
    throw Error("bad-config", "student encoder_kernel must be even so the stride L/2 divides it");
  }
  if (blocks_per_repeat < 1 || repeats < 1) throw Error("bad-config", "masker needs at least one block");
  if (fusion_index < 1 || fusion_index > masker_blocks()) {
    throw Error("bad-config", "fusion_index must lie in 1.." + std::to_string(masker_blocks()));
  }
  if (speaker_layers < 0) throw Error("bad-config", "speaker_layers must be >= 0");
  if (speaker_inventory < 1) throw Error("bad-config", "speaker_inventory must be >= 1");
}

void TeacherConfig::validate() const {
  if (encoder_kernels.size() != 3) throw Error("bad-config", "teacher needs three encoder kernels");
  if (!(encoder_kernels[0] < encoder_kernels[1] && encoder_kernels[1] < encoder_kernels[2])) {
    throw Error("bad-config", "teacher encoder kernels must be strictly increasing");
  }
  if (encoder_kernels[0] < 2 || encoder_kernels[0] % 2 != 0) {
    throw Error("bad-config", "the shortest teacher kernel must be even");
  }
  if (!shared_twin_encoders) {
    throw Error("bad-config", "teacher mixture and enrollment encoders always share weights");
  }
  if (encoder_filters < 1 || bottleneck < 1 || hidden < 1 || speaker_channels < 1 || embed_dim < 1) {
    throw Error("bad-config", "teacher channel counts must be positive");
  }
  if (blocks_per_stack < 1 || stacks < 1) throw Error("bad-config", "separator needs at least one block");
  if (speaker_encoder_depth < 0) throw Error("bad-config", "speaker_encoder_depth must be >= 0");
  if (speaker_inventory < 1) throw Error("bad-config", "speaker_inventory must be >= 1");
}

int ModelConfig::speaker_inventory() const {
  return role == ModelRole::kTeacher ? teacher.speaker_inventory : student.speaker_inventory;
}

void ModelConfig::set_speaker_inventory(int c) {
  teacher.speaker_inventory = c;
  student.speaker_inventory = c;
}

int ModelConfig::min_input_samples() const {
  return role == ModelRole::kTeacher ? teacher.encoder_kernels.front() : student.encoder_kernel;
}

void ModelConfig::validate() const {
  if (sample_rate <= 0) throw Error("bad-config", "sample_rate must be positive");
  if (role == ModelRole::kTeacher) {
    teacher.validate();
  } else {
    student.validate();
  }
}

Json ModelConfig::architecture() const {
  Json j{{"role", to_string(role)}, {"sample_rate", sample_rate}};
  if (role == ModelRole::kTeacher) {
    j["teacher"] = teacher;
  } else {
    j["student"] = student;
  }
  return j;
}

std::string ModelConfig::hash() const { return sha256_hex(architecture().dump()); }

void to_json(Json& j, const StudentConfig& c) {
  j = Json{{"encoder_filters", c.encoder_filters}, {"encoder_kernel", c.encoder_kernel},
           {"bottleneck", c.bottleneck},           {"hidden", c.hidden},
           {"blocks_per_repeat", c.blocks_per_repeat}, {"repeats", c.repeats},
           {"fusion_index", c.fusion_index},       {"embed_dim", c.embed_dim},
           {"speaker_layers", c.speaker_layers},   {"speaker_inventory", c.speaker_inventory}};
}

void from_json(const Json& j, StudentConfig& c) {
  reject_unknown_keys(j,
                      {"encoder_filters", "encoder_kernel", "bottleneck", "hidden",
                       "blocks_per_repeat", "repeats", "fusion_index", "embed_dim",
                       "speaker_layers", "speaker_inventory"},
                      "model.student");
  read_opt(j, "encoder_filters", c.encoder_filters);
  read_opt(j, "encoder_kernel", c.encoder_kernel);
  read_opt(j, "bottleneck", c.bottleneck);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "blocks_per_repeat", c.blocks_per_repeat);
  read_opt(j, "repeats", c.repeats);
  read_opt(j, "fusion_index", c.fusion_index);
  read_opt(j, "embed_dim", c.embed_dim);
  read_opt(j, "speaker_layers", c.speaker_layers);
  read_opt(j, "speaker_inventory", c.speaker_inventory);
}

void to_json(Json& j, const TeacherConfig& c) {
  j = Json{{"encoder_kernels", c.encoder_kernels},
           {"encoder_filters", c.encoder_filters},
           {"bottleneck", c.bottleneck},
           {"hidden", c.hidden},
           {"blocks_per_stack", c.blocks_per_stack},
           {"stacks", c.stacks},
           {"shared_twin_encoders", c.shared_twin_encoders},
           {"speaker_channels", c.speaker_channels},
           {"speaker_encoder_depth", c.speaker_encoder_depth},
           {"embed_dim", c.embed_dim},
           {"speaker_inventory", c.speaker_inventory}};
}

void from_json(const Json& j, TeacherConfig& c) {
  reject_unknown_keys(j,
                      {"encoder_kernels", "encoder_filters", "bottleneck", "hidden",
                       "blocks_per_stack", "stacks", "shared_twin_encoders", "speaker_channels",
                       "speaker_encoder_depth", "embed_dim", "speaker_inventory"},
                      "model.teacher");
  read_opt(j, "encoder_kernels", c.encoder_kernels);
  read_opt(j, "encoder_filters", c.encoder_filters);
  read_opt(j, "bottleneck", c.bottleneck);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "blocks_per_stack", c.blocks_per_stack);
  read_opt(j, "stacks", c.stacks);
  read_opt(j, "shared_twin_encoders", c.shared_twin_encoders);
  read_opt(j, "speaker_channels", c.speaker_channels);
  read_opt(j, "speaker_encoder_depth", c.speaker_encoder_depth);
  read_opt(j, "embed_dim", c.embed_dim);
  read_opt(j, "speaker_inventory", c.speaker_inventory);
}

void to_json(Json& j, const ModelConfig& c) {
  j = c.architecture();
  j["init_seed"] = c.init_seed;
}

void from_json(const Json& j, ModelConfig& c) {
  reject_unknown_keys(j, {"role", "sample_rate", "student", "teacher", "init_seed"}, "model");
  c.role = role_from_string(j.at("role").get<std::string>());
  read_opt(j, "sample_rate", c.sample_rate);
  if (j.contains("student")) c.student = j.at("student").get<StudentConfig>();
  if (j.contains("teacher")) c.teacher = j.at("teacher").get<TeacherConfig>();
  read_opt(j, "init_seed", c.init_seed);
  c.validate();
}

// ---------------------------------------------------------------------------
// Training configs

LossConfig LossConfig::for_role(ModelRole role) {
  LossConfig c;
  c.gamma = role == ModelRole::kTeacher ? 0.5 : 0.0;
  return c;
}

TrainConfig TrainConfig::for_role(ModelRole role) {
  TrainConfig c;
  c.batch_size = role == ModelRole::kTeacher ? 8 : 16;
  return c;
}

void TrainConfig::validate() const {
  if (max_epochs < 1 || batch_size < 1 || lr_patience < 1 || early_stop_patience < 1) {
    throw Error("bad-config", "epoch, batch and patience settings must be positive");
  }
  if (!(lr0 >= 0.0) || !(lr_factor > 0.0 && lr_factor <= 1.0) || !(crop_s > 0.0) ||
      !(grad_clip_norm >= 0.0)) {
    throw Error("bad-config", "invalid learning-rate, crop or clipping setting");
  }
}

void AdaptConfig::validate() const {
  if (epochs < 0 || batch_size < 1 || !(lr >= 0.0) || !(gamma >= 0.0) || !(segment_s > 0.0)) {
    throw Error("bad-config", "invalid adaptation setting");
  }
}

namespace {

Json train_json(const TrainConfig& c, double gamma) {
  return Json{{"max_epochs", c.max_epochs},
              {"batch_size", c.batch_size},
              {"lr0", c.lr0},
              {"lr_patience", c.lr_patience},
              {"lr_factor", c.lr_factor},
              {"early_stop_patience", c.early_stop_patience},
              {"crop_s", c.crop_s},
              {"grad_clip_norm", c.grad_clip_norm},
              {"log_steps", c.log_steps},
              {"gamma", gamma}};
}

void train_from(const Json& j, TrainConfig& c, double& gamma, const char* ctx) {
  reject_unknown_keys(j,
                      {"max_epochs", "batch_size", "lr0", "lr_patience", "lr_factor",
                       "early_stop_patience", "crop_s", "grad_clip_norm", "log_steps", "gamma"},
                      ctx);
  read_opt(j, "max_epochs", c.max_epochs);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "lr0", c.lr0);
  read_opt(j, "lr_patience", c.lr_patience);
  read_opt(j, "lr_factor", c.lr_factor);
  read_opt(j, "early_stop_patience", c.early_stop_patience);
  read_opt(j, "crop_s", c.crop_s);
  read_opt(j, "grad_clip_norm", c.grad_clip_norm);
  read_opt(j, "log_steps", c.log_steps);
  read_opt(j, "gamma", gamma);
  c.validate();
}

Json procedural_json(const ProceduralAssetConfig& c) {
  return Json{{"generic_speakers", c.generic_speakers},
              {"group_speakers", c.group_speakers},
              {"utterances_per_speaker", c.utterances_per_speaker},
              {"utterance_min_s", c.utterance_min_s},
              {"utterance_max_s", c.utterance_max_s},
              {"generic_rooms", c.generic_rooms},
              {"group_rooms", c.group_rooms},
              {"rirs_per_room", c.rirs_per_room},
              {"noises_per_category", c.noises_per_category},
              {"noise_s", c.noise_s}};
}

void procedural_from(const Json& j, ProceduralAssetConfig& c) {
  reject_unknown_keys(j,
                      {"generic_speakers", "group_speakers", "utterances_per_speaker",
                       "utterance_min_s", "utterance_max_s", "generic_rooms", "group_rooms",
                       "rirs_per_room", "noises_per_category", "noise_s"},
                      "assets.procedural_config");
  read_opt(j, "generic_speakers", c.generic_speakers);
  read_opt(j, "group_speakers", c.group_speakers);
  read_opt(j, "utterances_per_speaker", c.utterances_per_speaker);
  read_opt(j, "utterance_min_s", c.utterance_min_s);
  read_opt(j, "utterance_max_s", c.utterance_max_s);
  read_opt(j, "generic_rooms", c.generic_rooms);
  read_opt(j, "group_rooms", c.group_rooms);
  read_opt(j, "rirs_per_room", c.rirs_per_room);
  read_opt(j, "noises_per_category", c.noises_per_category);
  read_opt(j, "noise_s", c.noise_s);
}

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

SynthConfig RunConfig::Synth::resolved(const SynthConfig& base, std::uint64_t run_seed) {
  SynthConfig out = base;
  out.seed = mix_seed(run_seed, base.seed);
  return out;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.teacher.role = ModelRole::kTeacher;
  c.student.role = ModelRole::kStudent;
  return c;
}

RunConfig RunConfig::quickstart() {
  RunConfig c = defaults();
  c.out_dir = "runs/quickstart";
  constexpr int kRate = 8000;

  auto& p = c.assets.procedural_config;
  p.sample_rate = kRate;
  p.generic_speakers = 48;
  p.group_speakers = 5;
  p.utterances_per_speaker = 4;
  p.utterance_min_s = 3.0;
  p.utterance_max_s = 5.0;
  p.generic_rooms = 6;
  p.group_rooms = 1;
  p.rirs_per_room = 4;
  p.noises_per_category = 3;
  p.noise_s = 8.0;

  c.synth.generic.sample_rate = kRate;
  c.synth.generic.duration_s = 4.0;
  c.synth.generic.k_min = 1;
  c.synth.generic.k_max = 3;
  c.synth.generic.hours = 0.25;
  c.synth.generic.splits = {{"train", 9.0}, {"val", 1.0}};
  c.synth.group.sample_rate = kRate;
  c.synth.group.duration_s = 4.0;
  c.synth.group.k_min = 1;
  c.synth.group.k_max = 3;
  c.synth.group.hours = 0.1;
  c.synth.groups = 1;
  c.synth.group_size = 5;

  c.teacher.sample_rate = kRate;
  c.teacher.teacher.encoder_kernels = {16, 48, 96};
  c.teacher.teacher.encoder_filters = 48;
  c.teacher.teacher.bottleneck = 64;
  c.teacher.teacher.hidden = 96;
  c.teacher.teacher.blocks_per_stack = 4;
  c.teacher.teacher.stacks = 2;
  c.teacher.teacher.speaker_channels = 64;
  c.teacher.teacher.speaker_encoder_depth = 2;
  c.teacher.teacher.embed_dim = 64;

  c.student.sample_rate = kRate;
  c.student.student.encoder_filters = 32;
  c.student.student.encoder_kernel = 16;
  c.student.student.bottleneck = 32;
  c.student.student.hidden = 32;
  c.student.student.embed_dim = 32;

  c.train.teacher.max_epochs = 24;
  c.train.student.max_epochs = 12;
  c.train.teacher.crop_s = 1.0;
  c.train.student.crop_s = 1.0;

  c.adapt.epochs = 16;
  c.adapt.lr = 5e-4;
  c.adapt.segment_s = 4.0;
  return c;
}

Json to_json(const RunConfig& c) {
  Json modes = Json::array();
  for (auto m : c.adapt_modes) modes.push_back(to_string(m));
  return Json{
      {"seed", c.seed},
      {"out_dir", c.out_dir.string()},
      {"assets",
       {{"root", c.assets.root.string()},
        {"procedural", c.assets.procedural},
        {"procedural_config", procedural_json(c.assets.procedural_config)}}},
      {"synth",
       {{"generic", c.synth.generic},
        {"group", c.synth.group},
        {"groups", c.synth.groups},
        {"group_size", c.synth.group_size},
        {"jobs", c.synth.jobs}}},
      {"model", {{"teacher", c.teacher.teacher}, {"student", c.student.student}}},
      {"train",
       {{"teacher", train_json(c.train.teacher, c.train.teacher_gamma)},
        {"student", train_json(c.train.student, c.train.student_gamma)}}},
      {"adapt",
       {{"lr", c.adapt.lr},
        {"epochs", c.adapt.epochs},
        {"gamma", c.adapt.gamma},
        {"segment_s", c.adapt.segment_s},
        {"batch_size", c.adapt.batch_size},
        {"grad_clip_norm", c.adapt.grad_clip_norm},
        {"modes", modes},
        {"jobs", c.adapt_jobs}}},
      {"eval", {{"batch", c.eval.batch}, {"split", c.eval.split}}},
      {"report", {{"bin_width_db", c.report.bin_width_db}}}};
}

RunConfig run_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"seed", "out_dir", "assets", "synth", "model", "train", "adapt", "eval",
                       "report"},
                      "config");
  RunConfig c = RunConfig::defaults();
  try {
    read_opt(j, "seed", c.seed);
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();

    if (j.contains("assets")) {
      const Json& a = j.at("assets");
      reject_unknown_keys(a, {"root", "procedural", "procedural_config"}, "assets");
      if (a.contains("root")) c.assets.root = a.at("root").get<std::string>();
      read_opt(a, "procedural", c.assets.procedural);
      if (a.contains("procedural_config")) procedural_from(a.at("procedural_config"), c.assets.procedural_config);
    }
    if (j.contains("synth")) {
      const Json& s = j.at("synth");
      reject_unknown_keys(s, {"generic", "group", "groups", "group_size", "jobs"}, "synth");
      if (s.contains("generic")) {
        Json merged = c.synth.generic;
        for (const auto& [k, v] : s.at("generic").items()) merged[k] = v;
        c.synth.generic = merged.get<SynthConfig>();
      }
      if (s.contains("group")) {
        Json merged = c.synth.group;
        for (const auto& [k, v] : s.at("group").items()) merged[k] = v;
        c.synth.group = merged.get<SynthConfig>();
      }
      read_opt(s, "groups", c.synth.groups);
      read_opt(s, "group_size", c.synth.group_size);
      read_opt(s, "jobs", c.synth.jobs);
    }
    if (j.contains("model")) {
      const Json& m = j.at("model");
      reject_unknown_keys(m, {"teacher", "student"}, "model");
      if (m.contains("teacher")) {
        Json merged = c.teacher.teacher;
        for (const auto& [k, v] : m.at("teacher").items()) merged[k] = v;
        c.teacher.teacher = merged.get<TeacherConfig>();
      }
      if (m.contains("student")) {
        Json merged = c.student.student;
        for (const auto& [k, v] : m.at("student").items()) merged[k] = v;
        c.student.student = merged.get<StudentConfig>();
      }
    }
    if (j.contains("train")) {
      const Json& t = j.at("train");
      reject_unknown_keys(t, {"teacher", "student"}, "train");
      if (t.contains("teacher")) train_from(t.at("teacher"), c.train.teacher, c.train.teacher_gamma, "train.teacher");
      if (t.contains("student")) train_from(t.at("student"), c.train.student, c.train.student_gamma, "train.student");
    }
    if (j.contains("adapt")) {
      const Json& a = j.at("adapt");
      reject_unknown_keys(a,
                          {"lr", "epochs", "gamma", "segment_s", "batch_size", "grad_clip_norm",
                           "modes", "jobs"},
                          "adapt");
      read_opt(a, "lr", c.adapt.lr);
      read_opt(a, "epochs", c.adapt.epochs);
      read_opt(a, "gamma", c.adapt.gamma);
      read_opt(a, "segment_s", c.adapt.segment_s);
      read_opt(a, "batch_size", c.adapt.batch_size);
      read_opt(a, "grad_clip_norm", c.adapt.grad_clip_norm);
      read_opt(a, "jobs", c.adapt_jobs);
      if (a.contains("modes")) {
        c.adapt_modes.clear();
        for (const auto& m : a.at("modes")) c.adapt_modes.push_back(adapt_mode_from_string(m.get<std::string>()));
      }
      c.adapt.validate();
    }
    if (j.contains("eval")) {
      const Json& e = j.at("eval");
      reject_unknown_keys(e, {"batch", "split"}, "eval");
      read_opt(e, "batch", c.eval.batch);
      read_opt(e, "split", c.eval.split);
    }
    if (j.contains("report")) {
      const Json& r = j.at("report");
      reject_unknown_keys(r, {"bin_width_db"}, "report");
      read_opt(r, "bin_width_db", c.report.bin_width_db);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-config", e.what());
  }

  // One sample rate for the whole run.
  const int rate = c.synth.generic.sample_rate;
  if (c.synth.group.sample_rate != rate) {
    throw Error("bad-config", "synth.generic and synth.group must share sample_rate");
  }
  c.assets.procedural_config.sample_rate = rate;
  c.assets.procedural_config.seed = c.seed;
  c.teacher.role = ModelRole::kTeacher;
  c.student.role = ModelRole::kStudent;
  c.teacher.sample_rate = rate;
  c.student.sample_rate = rate;
  c.teacher.init_seed = mix_seed(c.seed, 101);
  c.student.init_seed = mix_seed(c.seed, 102);
  c.train.teacher.seed = mix_seed(c.seed, 201);
  c.train.student.seed = mix_seed(c.seed, 202);
  c.adapt.seed = mix_seed(c.seed, 301);
  c.teacher.validate();
  c.student.validate();
  if (c.synth.groups < 1 || c.synth.group_size < 1 || c.synth.group_size > 5) {
    throw Error("bad-config", "synth.groups >= 1 and synth.group_size in 1..5");
  }
  if (c.eval.batch < 1) throw Error("bad-config", "eval.batch must be positive");
  if (!(c.report.bin_width_db > 0.0)) throw Error("bad-config", "report.bin_width_db must be positive");
  return c;
}

namespace {

// Finds the child key of `node` that prefixes `rest` (longest first).
bool descend(Json& node, const std::string& rest, const std::string& value, const std::string& var) {
  if (!node.is_object()) return false;
  std::vector<std::string> keys;
  for (const auto& [k, _] : node.items()) keys.push_back(k);
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& key : keys) {
    if (rest == key) {
      Json parsed;
      try {
        parsed = Json::parse(value);
      } catch (const nlohmann::json::exception&) {
        parsed = value;
      }
      node[key] = parsed;
      return true;
    }
    if (rest.size() > key.size() + 1 && rest.compare(0, key.size(), key) == 0 && rest[key.size()] == '_') {
      if (descend(node[key], rest.substr(key.size() + 1), value, var)) return true;
    }
  }
  return false;
}

}  // namespace

void apply_env_overrides(Json& doc, const std::map<std::string, std::string>& env) {
  for (const auto& [name, value] : env) {
    if (name.rfind("TGIF_", 0) != 0) continue;
    std::string rest = name.substr(5);
    std::transform(rest.begin(), rest.end(), rest.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (rest == "test_tmp") continue;
    if (!descend(doc, rest, value, name)) {
      throw Error("bad-config", "environment override " + name + " names no config key");
    }
  }
}

std::map<std::string, std::string> tgif_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    if (name.rfind("TGIF_", 0) == 0) out[name] = entry.substr(eq + 1);
  }
  return out;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return resolve_run_config(RunConfig::defaults(), path, tgif_environment());
}

RunConfig resolve_run_config(const RunConfig& base, const std::optional<std::filesystem::path>& file,
                             const std::map<std::string, std::string>& env) {
  Json full = to_json(base);
  if (file) {
    Json doc;
    try {
      doc = Json::parse(read_text(*file));
    } catch (const nlohmann::json::exception& e) {
      throw Error("bad-config", file->string() + ": " + e.what());
    }
    if (!doc.is_object()) throw Error("bad-config", file->string() + ": top level must be an object");
    full.merge_patch(doc);
  }
  // Overrides address the fully populated document so every key exists.
  apply_env_overrides(full, env);
  try {
    return run_config_from_json(full);
  } catch (const Error& e) {
    if (!file) throw;
    const std::string what = e.what();
    throw Error(e.code(), file->string() + ": " + what.substr(e.code().size() + 2));
  }
}

}  // namespace tgif
