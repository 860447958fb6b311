// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/adapt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include "tgif/checkpoint.hpp"
#include "tgif/error.hpp"
#include "tgif/hash.hpp"
#include "tgif/rng.hpp"
#include "tgif/wav.hpp"

namespace tgif::nn {

std::size_t distill_targets(const EstimateFn& teacher, const std::filesystem::path& manifest_path,
                            const std::vector<std::string>& splits) {
  Manifest m = read_manifest(manifest_path);
  std::size_t written = 0;
  for (auto& r : m.records) {
    if (std::find(splits.begin(), splits.end(), r.split) == splits.end()) continue;
    const auto mix_path = m.resolve(r.paths.mixture);
    const auto enr_path = m.resolve(r.paths.enrollment);
    if (!std::filesystem::exists(enr_path)) throw Error("asset-not-found", "enrollment " + enr_path.string());
    if (!std::filesystem::exists(mix_path)) throw Error("asset-not-found", "mixture " + mix_path.string());
    const AudioClip mix = read_wav(mix_path);
    const AudioClip enr = read_wav(enr_path);
    AudioClip pseudo;
    pseudo.samples = teacher(mix, enr, r);
    pseudo.sample_rate = mix.sample_rate;
    if (pseudo.size() != mix.size()) {
      throw Error("length-mismatch", "teacher output for " + r.scene_id + " differs from the mixture length");
    }
    check_finite(pseudo);
    const std::string rel = "pseudo/" + r.scene_id + "_pseudo.wav";
    write_wav(m.resolve(rel), pseudo);
    r.paths.pseudo_target = rel;
    ++written;
  }
  write_manifest(manifest_path, m.records);
  return written;
}

std::size_t distill_targets(const std::filesystem::path& teacher_checkpoint,
                            const std::filesystem::path& manifest_path, const std::vector<std::string>& splits) {
  return distill_targets(checkpoint_estimator(teacher_checkpoint, ModelRole::kTeacher), manifest_path, splits);
}

// ---------------------------------------------------------------------------

AdaptResult adapt(const std::filesystem::path& student_checkpoint, const Manifest& group_manifest,
                  const AdaptConfig& cfg, const std::filesystem::path& out_dir, FileAudit* audit) {
  cfg.validate();
  auto loaded = load_checkpoint(student_checkpoint);
  if (loaded.meta.config.role != ModelRole::kStudent) {
    throw Error("role-mismatch", student_checkpoint.string() + " is a " + to_string(loaded.meta.config.role) +
                                     "; only students are adapted");
  }
  auto& model = *loaded.model;
  const int rate = loaded.meta.config.sample_rate;

  // The target kind is the only thing the two modes disagree on.
  LoadOptions opts;
  opts.target = cfg.mode == AdaptMode::kKd ? TargetKind::kPseudo : TargetKind::kDry;
  opts.sample_rate = rate;
  opts.audit = audit;
  opts.purpose = "train";
  opts.inventory = &loaded.meta.speaker_inventory;
  const auto train = load_examples(group_manifest, cfg.train_split, opts);
  if (train.empty()) throw Error("bad-manifest", "no '" + cfg.train_split + "' records to adapt on");

  std::vector<Example> val;
  if (cfg.log_val && !group_manifest.split(cfg.val_split).empty()) {
    LoadOptions vopts = opts;
    vopts.target = TargetKind::kDry;
    vopts.purpose = "eval";
    val = load_examples(group_manifest, cfg.val_split, vopts);
  }

  const auto seg = crop_length(train, static_cast<std::int64_t>(std::llround(cfg.segment_s * rate)));
  const auto enr_len = enrollment_crop_length(train, train.front().enrollment.size(0));
  LossConfig loss;
  loss.gamma = cfg.gamma;

  model.train();
  torch::optim::Adam opt(model.parameters(), torch::optim::AdamOptions(cfg.lr));
  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "adapt_log.jsonl", std::ios::trunc);
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  AdaptResult result;
  result.parent_hash = loaded.meta.weights_hash;
  const auto n = train.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const std::string mode = to_string(cfg.mode);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    const auto order = rng.permutation(n);
    double sum_si = 0.0, sum_ce = 0.0, seen = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + bs)));
      std::vector<Crop> crops;
      for (auto i : idx) {
        Crop c;
        c.offset = static_cast<std::int64_t>(rng.integer(0, train[i].mixture.size(0) - seg));
        c.enrollment_offset = 0;
        crops.push_back(c);
      }
      auto b = make_batch(train, idx, crops, seg, enr_len);
      auto out = model.forward(b.mixture, b.enrollment);
      auto terms = mtl_loss(out.estimate, b.target, out.logits, b.labels, loss);
      const double si = terms.si_sdr.item<double>(), ce = terms.ce.item<double>();
      if (!std::isfinite(si) || !std::isfinite(ce)) {
        throw Error("diverged", "non-finite adaptation loss at epoch " + std::to_string(epoch));
      }
      opt.zero_grad();
      terms.total.backward();
      clip_gradients(model, cfg.grad_clip_norm);
      opt.step();
      const double total = si + cfg.gamma * ce;
      result.step_losses.push_back(total);
      const double w = static_cast<double>(idx.size());
      sum_si += w * si;
      sum_ce += w * ce;
      seen += w;
    }
    EpochLog e{epoch, "adapt", 0.0, sum_si / seen, sum_ce / seen, cfg.lr, wall()};
    e.loss = e.si_sdr_term + cfg.gamma * e.ce_term;
    result.epochs.push_back(e);
    Json line = to_json(e);
    line["group_id"] = cfg.group_id;
    line["mode"] = mode;
    if (!val.empty()) {
      // Logged for analysis; never used to stop or select.
      const double v = mean_si_sdri(model, val, seg, cfg.batch_size);
      result.val_si_sdri.push_back(v);
      line["val_si_sdri"] = v;
      model.train();
    }
    log << line.dump() << '\n';
    log.flush();
  }

  CheckpointMeta meta = loaded.meta;
  meta.epoch = cfg.epochs;
  meta.best_val_loss = result.epochs.empty() ? loaded.meta.best_val_loss : result.epochs.back().loss;
  meta.seed = cfg.seed;
  meta.rng_state = std::to_string(mix_seed(cfg.seed, static_cast<std::uint64_t>(cfg.epochs) + 1));
  meta.lineage = "adapted-from:" + loaded.meta.weights_hash;
  meta.parent = std::filesystem::absolute(student_checkpoint).lexically_normal().string();
  meta.group_id = cfg.group_id;
  meta.adapt_mode = mode;
  result.checkpoint = save_checkpoint(out_dir / "specialist.json", model, meta);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> mean_of(const std::vector<EvalRecord>& rs, const std::string& model) {
  double s = 0.0;
  int n = 0;
  for (const auto& r : rs) {
    if (r.model_id == model && r.ok()) {
      s += r.si_sdri_db;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return s / n;
}

GroupOutcome run_one_group(const std::filesystem::path& teacher, const std::filesystem::path& student,
                           const GroupJob& job, const AdaptConfig& base, const std::vector<AdaptMode>& modes,
                           const std::filesystem::path& out_dir, const std::string& eval_split) {
  GroupOutcome g;
  g.group_id = job.group_id;
  try {
    const bool kd = std::find(modes.begin(), modes.end(), AdaptMode::kKd) != modes.end();
    if (kd) distill_targets(teacher, job.manifest);
    const Manifest m = read_manifest(job.manifest);
    char tag[16];
    std::snprintf(tag, sizeof tag, "group_%02d", job.group_id);
    for (auto mode : modes) {
      AdaptConfig cfg = base;
      cfg.mode = mode;
      cfg.group_id = job.group_id;
      auto r = adapt(student, m, cfg, out_dir / tag / to_string(mode));
      (mode == AdaptMode::kKd ? g.kd_checkpoint : g.oracle_checkpoint) = r.checkpoint;
    }
    g.records = evaluate_checkpoint(student, "generalist", m, eval_split);
    if (g.kd_checkpoint) {
      auto r = evaluate_checkpoint(*g.kd_checkpoint, "kd", m, eval_split);
      g.records.insert(g.records.end(), r.begin(), r.end());
    }
    if (g.oracle_checkpoint) {
      auto r = evaluate_checkpoint(*g.oracle_checkpoint, "oracle", m, eval_split);
      g.records.insert(g.records.end(), r.begin(), r.end());
    }
  } catch (const std::exception& e) {
    g.error = e.what();
  }
  return g;
}

}  // namespace

SuiteResult run_group_suite(const std::filesystem::path& teacher_checkpoint,
                            const std::filesystem::path& student_checkpoint, const std::vector<GroupJob>& groups,
                            const AdaptConfig& base, const std::vector<AdaptMode>& modes,
                            const std::filesystem::path& out_dir, int jobs, const std::string& eval_split) {
  SuiteResult result;
  result.groups.resize(groups.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < groups.size(); i = next++) {
      result.groups[i] =
          run_one_group(teacher_checkpoint, student_checkpoint, groups[i], base, modes, out_dir, eval_split);
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(groups.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  auto cell = [](std::optional<double> v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  result.summary_csv = "group_id,generalist_si_sdri,kd_si_sdri,oracle_si_sdri,error\n";
  for (const auto& g : result.groups) {
    std::string err = g.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    result.summary_csv += std::to_string(g.group_id) + "," + cell(mean_of(g.records, "generalist")) + "," +
                          cell(mean_of(g.records, "kd")) + "," + cell(mean_of(g.records, "oracle")) + "," + err +
                          "\n";
  }
  write_text(out_dir / "suite_summary.csv", result.summary_csv);
  return result;
}

}  // namespace tgif::nn
