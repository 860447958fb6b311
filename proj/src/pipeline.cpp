// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

#include <torch/torch.h>

#include "tgif/adapt.hpp"
#include "tgif/assets.hpp"
#include "tgif/checkpoint.hpp"
#include "tgif/error.hpp"
#include "tgif/eval.hpp"
#include "tgif/hash.hpp"
#include "tgif/rng.hpp"
#include "tgif/synth.hpp"
#include "tgif/train.hpp"

namespace tgif::pipeline {

namespace {

std::mutex log_mu;

void note(const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mu);
  std::clog << "[tgif] " << msg << std::endl;
}

std::string group_tag(int group_id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "group_%02d", group_id);
  return buf;
}

std::string digest(const Json& inputs) { return sha256_hex(inputs.dump()); }

bool is_current(const Layout& L, const std::string& stage, const std::string& d, const std::vector<fs::path>& outs) {
  const auto stamp = L.stamps() / (stage + ".json");
  if (!fs::exists(stamp)) return false;
  for (const auto& o : outs) {
    if (!fs::exists(o)) return false;
  }
  try {
    return Json::parse(read_text(stamp)).at("digest").get<std::string>() == d;
  } catch (const std::exception&) {
    return false;
  }
}

void stamp(const Layout& L, const std::string& stage, const std::string& d) {
  write_text(L.stamps() / (stage + ".json"), Json{{"stage", stage}, {"digest", d}}.dump(2) + "\n");
}

std::string stamp_digest(const Layout& L, const std::string& stage) {
  const auto p = L.stamps() / (stage + ".json");
  if (!fs::exists(p)) throw Error("io-error", "stage '" + stage + "' has not run yet (" + p.string() + ")");
  return Json::parse(read_text(p)).at("digest").get<std::string>();
}

std::string weights_hash(const fs::path& checkpoint) {
  if (!fs::exists(checkpoint)) throw Error("asset-not-found", checkpoint.string());
  return nn::read_checkpoint_meta(checkpoint).weights_hash;
}

template <typename F>
StageResult run_stage(const Layout& L, const std::string& stage, const Json& inputs, std::vector<fs::path> outs,
                      F&& body) {
  const auto d = digest(inputs);
  StageResult r;
  r.outputs = outs;
  if (is_current(L, stage, d, outs)) {
    note(stage + ": up to date");
    return r;
  }
  const auto t0 = std::chrono::steady_clock::now();
  body();
  stamp(L, stage, d);
  r.ran = true;
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.1f s)", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  note(stage + ": done" + buf);
  return r;
}

}  // namespace

fs::path Layout::group_dir(int group_id) const { return root / "data" / group_tag(group_id); }

fs::path Layout::specialist_dir(int group_id, AdaptMode mode) const {
  return root / "adapt" / group_tag(group_id) / to_string(mode);
}

std::string specialist_id(AdaptMode mode) { return mode == AdaptMode::kKd ? kKdId : kOracleId; }

fs::path write_snapshot(const RunConfig& cfg, const std::string& verb) {
  const auto p = Layout(cfg).snapshots() / (verb + ".config.json");
  write_text(p, to_json(cfg).dump(2) + "\n");
  return p;
}

// ---------------------------------------------------------------------------
// Data

fs::path assets_root(const RunConfig& cfg) {
  return cfg.assets.procedural ? Layout(cfg).assets() : cfg.assets.root;
}

StageResult prepare_assets(const RunConfig& cfg) {
  const Layout L(cfg);
  if (!cfg.assets.procedural) {
    for (const char* sub : {"generic", "group"}) {
      if (!fs::is_directory(cfg.assets.root / sub)) {
        throw Error("asset-not-found", (cfg.assets.root / sub).string() + " is not a directory");
      }
    }
    return {false, {cfg.assets.root}};
  }
  const Json inputs{{"procedural_config", to_json(cfg)["assets"]["procedural_config"]},
                    {"sample_rate", cfg.assets.procedural_config.sample_rate},
                    {"seed", cfg.seed}};
  return run_stage(L, "assets", inputs, {L.assets() / "ready"}, [&] {
    fs::remove_all(L.assets());
    generate_procedural_assets(L.assets(), cfg.assets.procedural_config);
    write_text(L.assets() / "ready", "ok\n");
  });
}

namespace {

Json assets_identity(const RunConfig& cfg) {
  const Layout L(cfg);
  if (cfg.assets.procedural) return Json(stamp_digest(L, "assets"));
  return Json(fs::absolute(cfg.assets.root).string());
}

}  // namespace

StageResult synth_generic(const RunConfig& cfg) {
  const Layout L(cfg);
  const auto sc = cfg.synth.generic_for(cfg.seed);
  const Json inputs{{"synth", Json(sc)}, {"assets", assets_identity(cfg)}};
  return run_stage(L, "synth_generic", inputs, {L.generic_manifest()}, [&] {
    const auto catalog = scan_assets(assets_root(cfg) / "generic");
    fs::remove_all(L.generic_manifest().parent_path());
    build_manifest(sc, catalog, nullptr, L.generic_manifest().parent_path(), cfg.synth.jobs);
  });
}

std::vector<int> group_ids(const RunConfig& cfg) {
  std::vector<int> ids;
  for (int g = 1; g <= cfg.synth.groups; ++g) ids.push_back(g);
  return ids;
}

StageResult synth_groups(const RunConfig& cfg, std::optional<int> only) {
  const Layout L(cfg);
  const Json base_inputs{{"synth", Json(cfg.synth.group_for(cfg.seed))},
                         {"groups", cfg.synth.groups},
                         {"group_size", cfg.synth.group_size},
                         {"assets", assets_identity(cfg)}};
  // Group membership first: every group's manifest depends on it.
  run_stage(L, "groups", base_inputs, {L.groups_file()}, [&] {
    const auto catalog = scan_assets(assets_root(cfg) / "group", PoolRole::kGroup);
    write_groups(L.groups_file(),
                 make_groups(catalog, cfg.synth.groups, cfg.synth.group_size, mix_seed(cfg.seed, 401)));
  });
  const auto groups = read_groups(L.groups_file());
  StageResult all;
  std::optional<AssetCatalog> catalog;
  for (const auto& g : groups) {
    if (only && *only != g.group_id) continue;
    Json inputs = base_inputs;
    inputs["group"] = Json(g);
    auto r = run_stage(L, "synth_" + group_tag(g.group_id), inputs, {L.group_manifest(g.group_id)}, [&] {
      if (!catalog) catalog = scan_assets(assets_root(cfg) / "group", PoolRole::kGroup);
      SynthConfig sc = cfg.synth.group_for(cfg.seed);
      sc.seed = mix_seed(sc.seed, static_cast<std::uint64_t>(g.group_id));
      fs::remove_all(L.group_dir(g.group_id));
      build_manifest(sc, *catalog, &g, L.group_dir(g.group_id), cfg.synth.jobs);
    });
    all.ran = all.ran || r.ran;
    all.outputs.push_back(L.group_manifest(g.group_id));
  }
  if (only && all.outputs.empty()) {
    throw Error("bad-config", "no group " + std::to_string(*only) + " (synth.groups = " +
                                  std::to_string(cfg.synth.groups) + ")");
  }
  return all;
}

// ---------------------------------------------------------------------------
// Models

StageResult pretrain_role(const RunConfig& cfg, ModelRole role) {
  const Layout L(cfg);
  const Json full = to_json(cfg);
  const std::string r = to_string(role);
  const ModelConfig& mc = role == ModelRole::kTeacher ? cfg.teacher : cfg.student;
  const Json inputs{{"model", mc},
                    {"train", full["train"][r]},
                    {"manifest", sha256_file(L.generic_manifest())}};
  return run_stage(L, "pretrain_" + r, inputs, {L.checkpoint(role)}, [&] {
    torch::set_num_threads(1);
    const TrainConfig& tc = role == ModelRole::kTeacher ? cfg.train.teacher : cfg.train.student;
    LossConfig lc = LossConfig::for_role(role);
    lc.gamma = role == ModelRole::kTeacher ? cfg.train.teacher_gamma : cfg.train.student_gamma;
    const auto res = nn::pretrain(mc, tc, lc, read_manifest(L.generic_manifest()), "train", "val", L.model_dir(role));
    char buf[128];
    std::snprintf(buf, sizeof buf, "pretrain %s: %d epochs, best val loss %.3f at epoch %d", r.c_str(),
                  res.epochs_run, res.best_val_loss, res.best_epoch);
    note(buf);
  });
}

StageResult distill_group(const RunConfig& cfg, const fs::path& teacher, int group_id) {
  const Layout L(cfg);
  const Json inputs{{"teacher", weights_hash(teacher)},
                    {"synth", stamp_digest(L, "synth_" + group_tag(group_id))}};
  const auto manifest = L.group_manifest(group_id);
  return run_stage(L, "distill_" + group_tag(group_id), inputs, {manifest}, [&] {
    torch::set_num_threads(1);
    const auto n = nn::distill_targets(teacher, manifest, {cfg.adapt.train_split, cfg.adapt.val_split});
    note("distill " + group_tag(group_id) + ": " + std::to_string(n) + " pseudo targets");
  });
}

StageResult adapt_group(const RunConfig& cfg, const fs::path& student, int group_id, AdaptMode mode) {
  const Layout L(cfg);
  AdaptConfig ac = cfg.adapt;
  ac.mode = mode;
  ac.group_id = group_id;
  ac.seed = mix_seed(cfg.adapt.seed, static_cast<std::uint64_t>(group_id));
  Json adapt_json = to_json(cfg)["adapt"];
  adapt_json.erase("modes");
  adapt_json.erase("jobs");
  const auto manifest = L.group_manifest(group_id);
  const Json inputs{{"student", weights_hash(student)},
                    {"adapt", adapt_json},
                    {"mode", to_string(mode)},
                    {"seed", ac.seed},
                    {"manifest", sha256_file(manifest)}};
  return run_stage(L, "adapt_" + group_tag(group_id) + "_" + to_string(mode), inputs,
                   {L.specialist(group_id, mode)}, [&] {
                     torch::set_num_threads(1);
                     nn::adapt(student, read_manifest(manifest), ac, L.specialist_dir(group_id, mode));
                   });
}

std::vector<StageResult> adapt_groups(const RunConfig& cfg, const fs::path& student, const std::vector<int>& groups,
                                      const std::vector<AdaptMode>& modes, int jobs) {
  std::vector<StageResult> results(groups.size() * modes.size());
  std::vector<std::string> errors(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < groups.size(); i = next++) {
      try {
        for (std::size_t m = 0; m < modes.size(); ++m) {
          results[i * modes.size() + m] = adapt_group(cfg, student, groups[i], modes[m]);
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
        note("adapt " + group_tag(groups[i]) + " failed: " + e.what());
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(groups.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::string first;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!errors[i].empty() && first.empty()) first = errors[i];
  }
  if (!first.empty()) {
    // Preserve the code of the first failure for the exit status.
    const auto colon = first.find(':');
    throw Error(colon == std::string::npos ? "io-error" : first.substr(0, colon),
                "adaptation failed for at least one group; first: " + first);
  }
  return results;
}

// ---------------------------------------------------------------------------
// Evaluation and report

StageResult evaluate_stage(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& manifest,
                           const std::string& model_id, const std::string& tag) {
  const Layout L(cfg);
  const std::string name = model_id + (tag.empty() ? "" : "_" + tag);
  const auto out = L.eval_dir() / (name + ".jsonl");
  const Json inputs{{"checkpoint", weights_hash(checkpoint)},
                    {"manifest", sha256_file(manifest)},
                    {"split", cfg.eval.split},
                    {"batch", cfg.eval.batch},
                    {"model_id", model_id}};
  return run_stage(L, "eval_" + name, inputs, {out}, [&] {
    torch::set_num_threads(1);
    const auto records =
        nn::evaluate_checkpoint(checkpoint, model_id, read_manifest(manifest), cfg.eval.split, cfg.eval.batch);
    write_records(out, records);
  });
}

std::map<std::string, double> multi_talker_means(const std::vector<EvalRecord>& records) {
  std::map<std::string, std::pair<double, int>> acc;
  for (const auto& r : records) {
    if (!r.ok() || r.K < 2) continue;
    acc[r.model_id].first += r.si_sdri_db;
    acc[r.model_id].second += 1;
  }
  std::map<std::string, double> out;
  for (const auto& [m, v] : acc) out[m] = v.first / v.second;
  return out;
}

StageResult report_stage(const RunConfig& cfg) {
  const Layout L(cfg);
  std::vector<EvalRecord> records;
  std::vector<fs::path> files;
  if (fs::is_directory(L.eval_dir())) {
    for (const auto& e : fs::directory_iterator(L.eval_dir())) {
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("asset-not-found", "no evaluation records under " + L.eval_dir().string());
  for (const auto& f : files) {
    auto rs = read_records(f);
    records.insert(records.end(), rs.begin(), rs.end());
  }
  auto table = breakdown_by_k(records, {kTeacherId, kStudentId, kKdId, kOracleId});
  apply_baselines(table, {{kKdId, kStudentId}, {kOracleId, kStudentId}});
  const auto curve = bin_by_input_sdr(records, cfg.report.bin_width_db);
  StageResult r;
  r.ran = true;
  r.outputs = render_report(L.report_dir(), table, curve);
  write_text(L.report_dir() / "table_k.txt", table_text(table));
  Json trend = Json::object();
  for (const auto& [m, v] : multi_talker_means(records)) trend[m] = v;
  write_text(L.report_dir() / "multi_talker_si_sdri.json", trend.dump(2) + "\n");
  r.outputs.push_back(L.report_dir() / "table_k.txt");
  r.outputs.push_back(L.report_dir() / "multi_talker_si_sdri.json");
  note("report: " + L.report_dir().string());
  return r;
}

// ---------------------------------------------------------------------------

QuickstartResult run_quickstart(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const Layout L(cfg);
  write_snapshot(cfg, "quickstart");
  prepare_assets(cfg);
  synth_generic(cfg);
  synth_groups(cfg);
  pretrain_role(cfg, ModelRole::kTeacher);
  pretrain_role(cfg, ModelRole::kStudent);
  const auto teacher = L.checkpoint(ModelRole::kTeacher);
  const auto student = L.checkpoint(ModelRole::kStudent);
  const auto groups = group_ids(cfg);
  const bool kd = std::find(cfg.adapt_modes.begin(), cfg.adapt_modes.end(), AdaptMode::kKd) != cfg.adapt_modes.end();
  if (kd) {
    for (int g : groups) distill_group(cfg, teacher, g);
  }
  adapt_groups(cfg, student, groups, cfg.adapt_modes, cfg.adapt_jobs);
  for (int g : groups) {
    const auto m = L.group_manifest(g);
    const auto tag = group_tag(g);
    evaluate_stage(cfg, teacher, m, kTeacherId, tag);
    evaluate_stage(cfg, student, m, kStudentId, tag);
    for (auto mode : cfg.adapt_modes) evaluate_stage(cfg, L.specialist(g, mode), m, specialist_id(mode), tag);
  }
  report_stage(cfg);

  QuickstartResult q;
  std::vector<EvalRecord> records;
  for (const auto& e : fs::directory_iterator(L.eval_dir())) {
    if (e.path().extension() != ".jsonl") continue;
    auto rs = read_records(e.path());
    records.insert(records.end(), rs.begin(), rs.end());
  }
  q.multi_talker_si_sdri = multi_talker_means(records);
  q.teacher_params = nn::parameter_count(*nn::make_model(cfg.teacher));
  q.student_params = nn::parameter_count(*nn::make_model(cfg.student));
  q.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return q;
}

}  // namespace tgif::pipeline
