// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// The command-line tool end to end on a tiny 8 kHz configuration: stage
// outputs, no-op reruns, snapshots and exit codes.

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tgif/checkpoint.hpp"
#include "tgif/config.hpp"
#include "tgif/hash.hpp"
#include "tgif/pipeline.hpp"
#include "tgif/report.hpp"

namespace tgif {
namespace {

namespace fs = std::filesystem;

const Json& tiny_config() {
  static const Json j = Json::parse(R"({
    "seed": 5,
    "assets": {"procedural": true, "procedural_config": {
      "generic_speakers": 6, "group_speakers": 3, "utterances_per_speaker": 3,
      "utterance_min_s": 1.5, "utterance_max_s": 2.5, "generic_rooms": 2, "group_rooms": 1,
      "rirs_per_room": 2, "noises_per_category": 1, "noise_s": 3.0}},
    "synth": {
      "generic": {"sample_rate": 8000, "duration_s": 1.0, "enrollment_duration_s": 1.0, "k_range": [1, 3],
                  "hours": 0.004, "splits": {"train": 2, "val": 1}},
      "group": {"sample_rate": 8000, "duration_s": 1.0, "enrollment_duration_s": 1.0, "k_range": [1, 3],
                "hours": 0.003},
      "groups": 1, "group_size": 3},
    "model": {
      "teacher": {"encoder_kernels": [8, 24, 48], "encoder_filters": 16, "bottleneck": 16, "hidden": 32,
                  "blocks_per_stack": 2, "stacks": 2, "speaker_channels": 16, "speaker_encoder_depth": 1,
                  "embed_dim": 16},
      "student": {"encoder_filters": 16, "encoder_kernel": 16, "bottleneck": 16, "hidden": 16, "embed_dim": 16}},
    "train": {"teacher": {"max_epochs": 1, "crop_s": 0.5, "batch_size": 4},
              "student": {"max_epochs": 1, "crop_s": 0.5, "batch_size": 4}},
    "adapt": {"epochs": 1, "segment_s": 1.0, "batch_size": 4}
  })");
  return j;
}

struct Run {
  int code = -1;
  std::string err;
};

// Runs the tool with stderr captured.
Run tgif(const std::string& args) {
  const auto err = fs::path(testing::scratch_dir("cli_stderr")) / "err.txt";
  const std::string cmd = std::string(TGIF_CLI) + " " + args + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text(err);
  return r;
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const auto p = dir / "config.json";
  write_text(p, j.dump(2));
  return p;
}

TEST(Cli, QuickstartStagesThenNoOpRerun) {
  const auto dir = testing::scratch_dir(testing::test_dir_name());
  Json j = tiny_config();
  j["out_dir"] = (dir / "run").string();
  const auto cfg_path = write_config(dir, j);

  const auto first = tgif("--config " + cfg_path.string() + " --preset default quickstart");
  ASSERT_EQ(first.code, 0) << first.err;
  const auto cfg = load_run_config(cfg_path);
  const pipeline::Layout L(cfg);
  EXPECT_TRUE(fs::exists(L.checkpoint(ModelRole::kTeacher)));
  EXPECT_TRUE(fs::exists(L.specialist(1, AdaptMode::kKd)));
  EXPECT_TRUE(fs::exists(L.specialist(1, AdaptMode::kOracle)));
  EXPECT_TRUE(fs::exists(L.report_dir() / "table_k.csv"));
  EXPECT_TRUE(fs::exists(L.snapshots() / "quickstart.config.json"));
  const auto table = read_text(L.report_dir() / "table_k.csv");
  for (const char* id : {"T,", "S,", "S-KD,", "S-KD-Oracle,"}) EXPECT_NE(table.find(std::string("\n") + id), std::string::npos) << id;
  const auto teacher_hash = sha256_file(L.checkpoint(ModelRole::kTeacher));

  const auto second = tgif("--config " + cfg_path.string() + " --preset default quickstart");
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_EQ(second.err.find(": done"), std::string::npos) << second.err;
  EXPECT_NE(second.err.find("pretrain_teacher: up to date"), std::string::npos);
  EXPECT_EQ(sha256_file(L.checkpoint(ModelRole::kTeacher)), teacher_hash);
  EXPECT_EQ(read_text(L.report_dir() / "table_k.csv"), table);

  // A changed adaptation setting reruns adaptation and evaluation only.
  const auto third = tgif("--config " + cfg_path.string() + " --preset default adapt --mode kd");
  EXPECT_EQ(third.code, 0) << third.err;
  EXPECT_NE(third.err.find("up to date"), std::string::npos);
  setenv("TGIF_ADAPT_EPOCHS", "2", 1);
  const auto fourth = tgif("--config " + cfg_path.string() + " --preset default adapt --mode kd");
  unsetenv("TGIF_ADAPT_EPOCHS");
  EXPECT_EQ(fourth.code, 0) << fourth.err;
  EXPECT_NE(fourth.err.find("adapt_group_01_kd: done"), std::string::npos) << fourth.err;
  const auto snap = Json::parse(read_text(L.snapshots() / "adapt.config.json"));
  EXPECT_EQ(snap["adapt"]["epochs"], 2);
}

TEST(Cli, VerbsComposeIntoTheSameLayout) {
  const auto dir = testing::scratch_dir(testing::test_dir_name());
  Json j = tiny_config();
  j["out_dir"] = (dir / "run").string();
  const auto c = "--config " + write_config(dir, j).string() + " ";
  ASSERT_EQ(tgif(c + "synth --role generic").code, 0);
  ASSERT_EQ(tgif(c + "synth --role group --group-id 1").code, 0);
  const auto cfg = load_run_config(dir / "config.json");
  const pipeline::Layout L(cfg);
  const auto manifest_bytes = read_text(L.generic_manifest());
  ASSERT_EQ(tgif(c + "synth --role generic").code, 0);
  EXPECT_EQ(read_text(L.generic_manifest()), manifest_bytes);

  ASSERT_EQ(tgif(c + "pretrain --role student").code, 0);
  ASSERT_EQ(tgif(c + "pretrain --role teacher").code, 0);
  ASSERT_EQ(tgif(c + "distill --group-id 1").code, 0);
  ASSERT_EQ(tgif(c + "adapt --group-id 1 --mode oracle").code, 0);
  const auto m = L.group_manifest(1).string();
  ASSERT_EQ(tgif(c + "eval --ckpt " + L.checkpoint(ModelRole::kStudent).string() + " --manifest " + m).code, 0);
  ASSERT_EQ(tgif(c + "eval --ckpt " + L.specialist(1, AdaptMode::kOracle).string() + " --manifest " + m).code, 0);
  EXPECT_TRUE(fs::exists(L.eval_dir() / "S_group_01.jsonl"));
  EXPECT_TRUE(fs::exists(L.eval_dir() / "S-KD-Oracle_group_01.jsonl"));
  ASSERT_EQ(tgif(c + "report").code, 0);
  const auto records = read_records(L.eval_dir() / "S-KD-Oracle_group_01.jsonl");
  ASSERT_FALSE(records.empty());
  for (const auto& r : records) EXPECT_EQ(r.group_id, 1);
}

TEST(Cli, ExitCodes) {
  const auto dir = testing::scratch_dir(testing::test_dir_name());
  Json j = tiny_config();
  j["out_dir"] = (dir / "run").string();
  const auto c = "--config " + write_config(dir, j).string() + " ";

  EXPECT_EQ(tgif("frobnicate").code, 2);
  EXPECT_EQ(tgif(c + "synth --role sideways").code, 2);
  // Unknown config key.
  Json bad = j;
  bad["adapt"]["epochz"] = 3;
  write_text(dir / "bad.json", bad.dump());
  const auto unknown = tgif("--config " + (dir / "bad.json").string() + " synth --role generic");
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("epochz"), std::string::npos) << unknown.err;
  setenv("TGIF_ADAPT_EPOCHZ", "3", 1);
  EXPECT_EQ(tgif(c + "synth --role generic").code, 2);
  unsetenv("TGIF_ADAPT_EPOCHZ");

  // Missing inputs are asset errors.
  EXPECT_EQ(tgif(c + "pretrain --role teacher").code, 3);
  Json ext = j;
  ext["assets"]["procedural"] = false;
  ext["assets"]["root"] = (dir / "nowhere").string();
  write_text(dir / "ext.json", ext.dump());
  EXPECT_EQ(tgif("--config " + (dir / "ext.json").string() + " synth --role generic").code, 3);

  // A teacher checkpoint handed to adaptation is a configuration error.
  ASSERT_EQ(tgif(c + "synth --role generic").code, 0);
  ASSERT_EQ(tgif(c + "synth --role group").code, 0);
  ASSERT_EQ(tgif(c + "pretrain --role teacher").code, 0);
  const auto cfg = load_run_config(dir / "config.json");
  const pipeline::Layout L(cfg);
  const auto wrong = tgif(c + "adapt --student " + L.checkpoint(ModelRole::kTeacher).string() + " --mode kd");
  EXPECT_EQ(wrong.code, 2) << wrong.err;

  // Divergence.
  setenv("TGIF_TRAIN_STUDENT_LR0", "1e30", 1);
  const auto diverged = tgif(c + "pretrain --role student");
  unsetenv("TGIF_TRAIN_STUDENT_LR0");
  EXPECT_EQ(diverged.code, 4) << diverged.err;
}

}  // namespace
}  // namespace tgif
