// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>

#include <torch/torch.h>

#include "test_util.hpp"
#include "tgif/assets.hpp"
#include "tgif/config.hpp"
#include "tgif/hash.hpp"
#include "tgif/synth.hpp"

namespace tgif::testing {

inline constexpr int kNnRate = 8000;

/// Small 8 kHz corpus with one generic manifest (train/val) and one group
/// manifest (adapt/val/test). Built once and reused by later test processes.
struct NnData {
  std::filesystem::path root;
  std::filesystem::path generic_manifest;
  std::filesystem::path group_manifest;
  TalkerGroup group;
};

inline NnData nn_data() {
  torch::set_num_threads(1);
  const char* env = std::getenv("TGIF_TEST_TMP");
  const std::filesystem::path root =
      std::filesystem::path(env != nullptr ? env : "/tmp/tgif-tests") / "nn_fixture_v1";
  NnData d;
  d.root = root;
  d.generic_manifest = root / "generic" / "manifest.jsonl";
  d.group_manifest = root / "group" / "manifest.jsonl";
  if (!std::filesystem::exists(root / "ready")) {
    std::filesystem::remove_all(root);
    ProceduralAssetConfig pc;
    pc.sample_rate = kNnRate;
    pc.generic_speakers = 6;
    pc.group_speakers = 3;
    pc.utterances_per_speaker = 3;
    pc.utterance_min_s = 1.5;
    pc.utterance_max_s = 2.5;
    pc.generic_rooms = 2;
    pc.group_rooms = 1;
    pc.rirs_per_room = 2;
    pc.noises_per_category = 1;
    pc.noise_s = 3.0;
    pc.seed = 5;
    generate_procedural_assets(root / "assets", pc);
    const auto generic = scan_assets(root / "assets" / "generic");
    const auto group_cat = scan_assets(root / "assets" / "group", PoolRole::kGroup);

    SynthConfig g = SynthConfig::generic_defaults();
    g.sample_rate = kNnRate;
    g.duration_s = 1.0;
    g.enrollment_duration_s = 1.0;
    g.k_max = 3;
    g.hours = 12.0 / 3600.0;
    g.splits = {{"train", 2.0}, {"val", 1.0}};
    build_manifest(g, generic, nullptr, root / "generic");

    const auto groups = make_groups(group_cat, 1, 3, 7);
    write_groups(root / "groups.json", groups);
    SynthConfig t = SynthConfig::group_defaults();
    t.sample_rate = kNnRate;
    t.duration_s = 1.0;
    t.enrollment_duration_s = 1.0;
    t.k_max = 3;
    t.hours = 10.0 / 3600.0;
    build_manifest(t, group_cat, &groups.front(), root / "group");
    write_text(root / "ready", "ok\n");
  }
  d.group = read_groups(root / "groups.json").front();
  return d;
}

/// Copy of a manifest directory so tests can mutate it.
inline std::filesystem::path copy_manifest_dir(const std::filesystem::path& manifest, const std::string& name) {
  const auto dst = scratch_dir(name);
  std::filesystem::copy(manifest.parent_path(), dst, std::filesystem::copy_options::recursive);
  return dst / manifest.filename();
}

inline ModelConfig tiny_student() {
  ModelConfig c;
  c.role = ModelRole::kStudent;
  c.sample_rate = kNnRate;
  c.student.encoder_filters = 16;
  c.student.encoder_kernel = 16;
  c.student.bottleneck = 16;
  c.student.hidden = 16;
  c.student.embed_dim = 16;
  c.init_seed = 11;
  return c;
}

inline ModelConfig tiny_teacher() {
  ModelConfig c;
  c.role = ModelRole::kTeacher;
  c.sample_rate = kNnRate;
  c.teacher.encoder_kernels = {8, 24, 48};
  c.teacher.encoder_filters = 16;
  c.teacher.bottleneck = 16;
  c.teacher.hidden = 32;
  c.teacher.blocks_per_stack = 2;
  c.teacher.stacks = 2;
  c.teacher.speaker_channels = 16;
  c.teacher.speaker_encoder_depth = 1;
  c.teacher.embed_dim = 16;
  c.init_seed = 12;
  return c;
}

}  // namespace tgif::testing
