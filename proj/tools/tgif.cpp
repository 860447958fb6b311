// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Command-line entry point: one verb per pipeline stage plus `quickstart`.

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "tgif/checkpoint.hpp"
#include "tgif/config.hpp"
#include "tgif/error.hpp"
#include "tgif/pipeline.hpp"

namespace fs = std::filesystem;
namespace pl = tgif::pipeline;

namespace {

int exit_code_for(const std::string& code) {
  static const std::set<std::string> config{"bad-config",    "role-mismatch", "group-too-small", "pool-too-small",
                                            "bad-pool",      "bad-scene",     "bad-label",       "bad-input"};
  static const std::set<std::string> numeric{"diverged", "non-finite", "orthogonal-estimate"};
  if (config.count(code)) return 2;
  if (numeric.count(code)) return 4;
  return 3;  // assets, manifests, checkpoints and files
}

std::string default_model_id(const fs::path& ckpt) {
  const auto meta = tgif::nn::read_checkpoint_meta(ckpt);
  if (meta.config.role == tgif::ModelRole::kTeacher) return pl::kTeacherId;
  if (meta.adapt_mode) return pl::specialist_id(tgif::adapt_mode_from_string(*meta.adapt_mode));
  return pl::kStudentId;
}

void require(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw tgif::Error("asset-not-found", p.string() + " (" + hint + ")");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target-speaker extraction with talker-group familiarization"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_file;
  std::string preset = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_file, "JSON config merged over the preset")->check(CLI::ExistingFile);
  app.add_option("--preset", preset, "Built-in base configuration")
      ->check(CLI::IsMember({"default", "quickstart"}));
  app.add_option("--seed", seed, "Run seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "Output directory (overrides the config)");

  auto* synth = app.add_subcommand("synth", "Render a generic or group manifest");
  std::string synth_role;
  std::optional<int> synth_group;
  synth->add_option("--role", synth_role)->required()->check(CLI::IsMember({"generic", "group"}));
  synth->add_option("--group-id", synth_group, "Only this group (group role)");

  auto* pretrain = app.add_subcommand("pretrain", "Train a generalist on the generic manifest");
  std::string pretrain_role;
  pretrain->add_option("--role", pretrain_role)->required()->check(CLI::IsMember({"teacher", "student"}));

  auto* distill = app.add_subcommand("distill", "Write teacher pseudo targets into a group manifest");
  std::optional<std::string> distill_teacher;
  int distill_group = 0;
  distill->add_option("--teacher", distill_teacher, "Teacher checkpoint (default: the run's)");
  distill->add_option("--group-id", distill_group)->required();

  auto* adapt = app.add_subcommand("adapt", "Fine-tune the student on one or every group");
  std::optional<std::string> adapt_student;
  std::optional<int> adapt_group;
  std::optional<std::string> adapt_mode;
  std::optional<int> adapt_jobs;
  adapt->add_option("--student", adapt_student, "Student checkpoint (default: the run's)");
  adapt->add_option("--group-id", adapt_group, "Only this group (default: all)");
  adapt->add_option("--mode", adapt_mode, "kd or oracle (default: config adapt.modes)")
      ->check(CLI::IsMember({"kd", "oracle"}));
  adapt->add_option("--jobs", adapt_jobs, "Groups adapted in parallel")->check(CLI::PositiveNumber);

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a manifest split");
  std::string eval_ckpt, eval_manifest;
  std::optional<std::string> eval_split, eval_model_id;
  eval->add_option("--ckpt", eval_ckpt)->required()->check(CLI::ExistingFile);
  eval->add_option("--manifest", eval_manifest)->required()->check(CLI::ExistingFile);
  eval->add_option("--split", eval_split, "Default: config eval.split");
  eval->add_option("--model-id", eval_model_id, "Default: T, S, S-KD or S-KD-Oracle from the checkpoint");

  auto* report = app.add_subcommand("report", "Tables and curves from every eval record file");
  auto* quickstart = app.add_subcommand("quickstart", "Whole pipeline at desk scale");
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    tgif::RunConfig base = preset == "quickstart" ? tgif::RunConfig::quickstart() : tgif::RunConfig::defaults();
    // `quickstart` defaults to its own preset; file and environment still win.
    if (quickstart->parsed() && app.count("--preset") == 0) base = tgif::RunConfig::quickstart();
    std::optional<fs::path> file;
    if (config_file) file = *config_file;
    auto env = tgif::tgif_environment();
    if (seed) env["TGIF_SEED"] = std::to_string(*seed);
    if (out_dir) env["TGIF_OUT_DIR"] = *out_dir;
    tgif::RunConfig cfg = tgif::resolve_run_config(base, file, env);
    const pl::Layout L(cfg);
    const std::string verb = app.get_subcommands().front()->get_name();

    if (show->parsed()) {
      std::cout << tgif::to_json(cfg).dump(2) << "\n";
      return 0;
    }
    pl::write_snapshot(cfg, verb);

    if (synth->parsed()) {
      pl::prepare_assets(cfg);
      const auto r = synth_role == "generic" ? pl::synth_generic(cfg) : pl::synth_groups(cfg, synth_group);
      for (const auto& p : r.outputs) std::cout << p.string() << "\n";
    } else if (pretrain->parsed()) {
      require(L.generic_manifest(), "run `tgif synth --role generic` first");
      const auto role = tgif::role_from_string(pretrain_role);
      std::cout << pl::pretrain_role(cfg, role).outputs.front().string() << "\n";
    } else if (distill->parsed()) {
      const fs::path teacher = distill_teacher ? fs::path(*distill_teacher) : L.checkpoint(tgif::ModelRole::kTeacher);
      require(teacher, "run `tgif pretrain --role teacher` first");
      require(L.group_manifest(distill_group), "run `tgif synth --role group` first");
      std::cout << pl::distill_group(cfg, teacher, distill_group).outputs.front().string() << "\n";
    } else if (adapt->parsed()) {
      const fs::path student = adapt_student ? fs::path(*adapt_student) : L.checkpoint(tgif::ModelRole::kStudent);
      require(student, "run `tgif pretrain --role student` first");
      std::vector<int> groups = adapt_group ? std::vector<int>{*adapt_group} : pl::group_ids(cfg);
      for (int g : groups) require(L.group_manifest(g), "run `tgif synth --role group` first");
      std::vector<tgif::AdaptMode> modes = cfg.adapt_modes;
      if (adapt_mode) modes = {tgif::adapt_mode_from_string(*adapt_mode)};
      pl::adapt_groups(cfg, student, groups, modes, adapt_jobs.value_or(cfg.adapt_jobs));
      for (int g : groups) {
        for (auto m : modes) std::cout << L.specialist(g, m).string() << "\n";
      }
    } else if (eval->parsed()) {
      if (eval_split) cfg.eval.split = *eval_split;
      const std::string id = eval_model_id.value_or(default_model_id(eval_ckpt));
      const fs::path manifest(eval_manifest);
      const auto tag = fs::absolute(manifest).parent_path().filename().string();
      std::cout << pl::evaluate_stage(cfg, eval_ckpt, manifest, id, tag).outputs.front().string() << "\n";
    } else if (report->parsed()) {
      for (const auto& p : pl::report_stage(cfg).outputs) std::cout << p.string() << "\n";
    } else if (quickstart->parsed()) {
      const auto q = pl::run_quickstart(cfg);
      std::printf("parameters: teacher %lld, student %lld\n", static_cast<long long>(q.teacher_params),
                  static_cast<long long>(q.student_params));
      std::printf("group-test SI-SDRi on K>=2 mixtures:\n");
      for (const auto& [id, v] : q.multi_talker_si_sdri) std::printf("  %-12s %+.2f dB\n", id.c_str(), v);
      std::printf("report: %s (%.0f s)\n", L.report_dir().string().c_str(), q.wall_s);
    }
    return 0;
  } catch (const tgif::Error& e) {
    std::cerr << "tgif: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "tgif: " << e.what() << "\n";
    return 1;
  }
}
