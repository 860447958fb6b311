// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tgif/error.hpp"
#include "tgif/hash.hpp"
#include "tgif/rng.hpp"
#include "tgif/schedule.hpp"
#include "tgif/wav.hpp"

namespace tgif::nn {

void FileAudit::note(const std::filesystem::path& path, const std::string& purpose) {
  std::lock_guard<std::mutex> lock(mu_);
  reads_.emplace_back(std::filesystem::weakly_canonical(path).string(), purpose);
}

bool FileAudit::was_read(const std::filesystem::path& path, const std::string& purpose) const {
  const auto key = std::filesystem::weakly_canonical(path).string();
  std::lock_guard<std::mutex> lock(mu_);
  return std::any_of(reads_.begin(), reads_.end(),
                     [&](const auto& r) { return r.first == key && (purpose.empty() || r.second == purpose); });
}

std::vector<std::pair<std::string, std::string>> FileAudit::reads() const {
  std::lock_guard<std::mutex> lock(mu_);
  return reads_;
}

namespace {

torch::Tensor read_tensor(const std::filesystem::path& path, int rate, const LoadOptions& opts) {
  if (!std::filesystem::exists(path)) throw Error("asset-not-found", path.string());
  if (opts.audit != nullptr) opts.audit->note(path, opts.purpose);
  const AudioClip clip = read_wav(path);
  if (clip.sample_rate != rate) {
    throw Error("rate-mismatch", path.string() + " is at " + std::to_string(clip.sample_rate) + " Hz, expected " +
                                     std::to_string(rate));
  }
  return to_tensor(clip.view());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void append_line(std::ofstream& log, const Json& j) {
  log << j.dump() << '\n';
  log.flush();
}

}  // namespace

std::vector<Example> load_examples(const Manifest& manifest, const std::string& split, const LoadOptions& opts) {
  std::vector<Example> out;
  for (const ManifestRecord* r : manifest.split(split)) {
    Example e;
    e.scene_id = r->scene_id;
    e.speaker = r->target_speaker;
    e.K = r->K;
    e.group_id = r->group_id;
    e.mixture = read_tensor(manifest.resolve(r->paths.mixture), opts.sample_rate, opts);
    if (opts.target == TargetKind::kPseudo) {
      if (!r->paths.pseudo_target) {
        throw Error("asset-not-found", "record " + r->scene_id + " has no pseudo target; run distillation first");
      }
      e.target = read_tensor(manifest.resolve(*r->paths.pseudo_target), opts.sample_rate, opts);
    } else {
      e.target = read_tensor(manifest.resolve(r->paths.dry_target), opts.sample_rate, opts);
    }
    e.enrollment = read_tensor(manifest.resolve(r->paths.enrollment), opts.sample_rate, opts);
    if (e.target.size(0) != e.mixture.size(0)) {
      throw Error("length-mismatch", "target and mixture lengths differ for " + r->scene_id);
    }
    if (opts.inventory != nullptr) {
      auto it = std::find(opts.inventory->begin(), opts.inventory->end(), e.speaker);
      e.label = it == opts.inventory->end() ? -1 : static_cast<int>(it - opts.inventory->begin());
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> speaker_inventory(const Manifest& manifest, const std::string& split) {
  std::set<std::string> s;
  for (const ManifestRecord* r : manifest.split(split)) s.insert(r->target_speaker);
  return {s.begin(), s.end()};
}

Json to_json(const EpochLog& e) {
  return Json{{"epoch", e.epoch},       {"split", e.split}, {"loss", e.loss}, {"si_sdr_term", e.si_sdr_term},
              {"ce_term", e.ce_term}, {"lr", e.lr},       {"wall_s", e.wall_s}};
}

// ---------------------------------------------------------------------------
// Batching

std::int64_t crop_length(const std::vector<Example>& items, std::int64_t requested) {
  std::int64_t len = requested;
  for (const auto& e : items) len = std::min(len, e.mixture.size(0));
  return len;
}

std::int64_t enrollment_crop_length(const std::vector<Example>& items, std::int64_t requested) {
  std::int64_t len = requested;
  for (const auto& e : items) len = std::min(len, e.enrollment.size(0));
  return len;
}

Crop center_crop(const Example& e, std::int64_t length, std::int64_t enrollment_length) {
  return {(e.mixture.size(0) - length) / 2, (e.enrollment.size(0) - enrollment_length) / 2};
}

Batch make_batch(const std::vector<Example>& items, const std::vector<std::size_t>& idx,
                 const std::vector<Crop>& crops, std::int64_t length, std::int64_t enrollment_length) {
  std::vector<torch::Tensor> mix, tgt, enr;
  std::vector<std::int64_t> labels;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto& e = items[idx[i]];
    mix.push_back(e.mixture.narrow(0, crops[i].offset, length));
    tgt.push_back(e.target.narrow(0, crops[i].offset, length));
    enr.push_back(e.enrollment.narrow(0, crops[i].enrollment_offset, enrollment_length));
    labels.push_back(e.label);
  }
  return {torch::stack(mix), torch::stack(tgt), torch::stack(enr), torch::tensor(labels, torch::kInt64)};
}

void clip_gradients(torch::nn::Module& model, double max_norm) {
  if (max_norm > 0.0) torch::nn::utils::clip_grad_norm_(model.parameters(), max_norm);
}

LossSummary evaluate_loss(Extractor& model, const std::vector<Example>& examples, const LossConfig& loss,
                          std::int64_t crop_samples, int batch_size) {
  torch::NoGradGuard no_grad;
  const auto len = crop_length(examples, crop_samples);
  const auto enr_len = enrollment_crop_length(examples, crop_samples);
  LossSummary s;
  double n = 0.0;
  for (std::size_t start = 0; start < examples.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> idx;
    std::vector<Crop> crops;
    for (std::size_t i = start; i < std::min(examples.size(), start + static_cast<std::size_t>(batch_size)); ++i) {
      idx.push_back(i);
      crops.push_back(center_crop(examples[i], len, enr_len));
    }
    auto b = make_batch(examples, idx, crops, len, enr_len);
    auto out = model.forward(b.mixture, b.enrollment);
    const auto w = static_cast<double>(idx.size());
    s.si_sdr_term += w * si_sdr_loss(out.estimate, b.target, loss.sisdr_eps).mean().item<double>();
    s.ce_term += w * ce_loss(out.logits, b.labels).mean().item<double>();
    n += w;
  }
  s.si_sdr_term /= n;
  s.ce_term /= n;
  s.loss = s.si_sdr_term + loss.gamma * s.ce_term;
  return s;
}

// ---------------------------------------------------------------------------
// Pretraining

PretrainResult pretrain(ModelConfig model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                        const Manifest& manifest, const std::string& train_split, const std::string& val_split,
                        const std::filesystem::path& out_dir) {
  const auto inventory = speaker_inventory(manifest, train_split);
  LoadOptions opts;
  opts.sample_rate = model_cfg.sample_rate;
  opts.inventory = &inventory;
  const auto train = load_examples(manifest, train_split, opts);
  opts.purpose = "val";
  const auto val = load_examples(manifest, val_split, opts);
  return pretrain_examples(std::move(model_cfg), train_cfg, loss_cfg, train, val, inventory, out_dir);
}

PretrainResult pretrain_examples(ModelConfig model_cfg, const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                                 const std::vector<Example>& train, const std::vector<Example>& val,
                                 const std::vector<std::string>& inventory, const std::filesystem::path& out_dir) {
  train_cfg.validate();
  if (train.empty() || val.empty()) throw Error("bad-manifest", "pretraining needs non-empty train and val splits");
  if (inventory.empty()) throw Error("bad-manifest", "empty speaker inventory");
  model_cfg.set_speaker_inventory(static_cast<int>(inventory.size()));
  auto model = make_model(model_cfg);
  model->train();

  const auto crop = crop_length(train, static_cast<std::int64_t>(std::llround(train_cfg.crop_s * model_cfg.sample_rate)));
  const auto enr_crop =
      enrollment_crop_length(train, static_cast<std::int64_t>(std::llround(train_cfg.crop_s * model_cfg.sample_rate)));
  const auto val_crop = static_cast<std::int64_t>(std::llround(train_cfg.crop_s * model_cfg.sample_rate));

  torch::optim::Adam opt(model->parameters(), torch::optim::AdamOptions(train_cfg.lr0));
  PlateauSchedule schedule(train_cfg);

  std::filesystem::create_directories(out_dir);
  std::ofstream log(out_dir / "train_log.jsonl", std::ios::trunc);
  const auto t0 = std::chrono::steady_clock::now();

  PretrainResult result;
  result.best_checkpoint = out_dir / "best.json";
  result.last_checkpoint = out_dir / "last.json";
  CheckpointMeta meta;
  meta.config = model_cfg;
  meta.seed = train_cfg.seed;
  meta.speaker_inventory = inventory;
  bool have_last = false;

  const auto n = train.size();
  const auto bs = static_cast<std::size_t>(train_cfg.batch_size);
  for (int epoch = 1; epoch <= train_cfg.max_epochs; ++epoch) {
    Rng rng(mix_seed(train_cfg.seed, static_cast<std::uint64_t>(epoch)));
    const auto order = rng.permutation(n);
    double sum_si = 0.0, sum_ce = 0.0, seen = 0.0;
    int step = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + bs)));
      std::vector<Crop> crops;
      for (auto i : idx) {
        const auto& e = train[i];
        Crop c;
        const auto span = e.mixture.size(0) - crop;
        // Re-draw crops whose target is silent.
        for (int attempt = 0;; ++attempt) {
          c.offset = static_cast<std::int64_t>(rng.integer(0, span));
          if (e.target.narrow(0, c.offset, crop).abs().max().item<float>() > 0.0f) break;
          if (attempt == 32) throw Error("silent-source", "no audible target crop in " + e.scene_id);
        }
        c.enrollment_offset = static_cast<std::int64_t>(rng.integer(0, e.enrollment.size(0) - enr_crop));
        crops.push_back(c);
      }
      auto b = make_batch(train, idx, crops, crop, enr_crop);
      auto out = model->forward(b.mixture, b.enrollment);
      auto terms = mtl_loss(out.estimate, b.target, out.logits, b.labels, loss_cfg);
      const double si = terms.si_sdr.item<double>(), ce = terms.ce.item<double>();
      if (!std::isfinite(si) || !std::isfinite(ce)) {
        throw Error("diverged", "non-finite loss at epoch " + std::to_string(epoch) + " step " +
                                    std::to_string(step) + "; last good checkpoint: " +
                                    (have_last ? result.last_checkpoint.string() : std::string("none")));
      }
      opt.zero_grad();
      terms.total.backward();
      clip_gradients(*model, train_cfg.grad_clip_norm);
      opt.step();
      ++step;
      const double w = static_cast<double>(idx.size());
      sum_si += w * si;
      sum_ce += w * ce;
      seen += w;
      if (train_cfg.log_steps) {
        append_line(log, Json{{"epoch", epoch},
                              {"step", step},
                              {"split", "train_step"},
                              {"loss", si + loss_cfg.gamma * ce},
                              {"si_sdr_term", si},
                              {"ce_term", ce},
                              {"lr", schedule.lr()},
                              {"wall_s", seconds_since(t0)}});
      }
    }
    EpochLog tr{epoch, "train", 0.0, sum_si / seen, sum_ce / seen, schedule.lr(), seconds_since(t0)};
    tr.loss = tr.si_sdr_term + loss_cfg.gamma * tr.ce_term;
    append_line(log, to_json(tr));
    result.trajectory.push_back(tr);
    result.lr_per_epoch.push_back(schedule.lr());

    const auto vs = evaluate_loss(*model, val, loss_cfg, val_crop, train_cfg.batch_size);
    if (!std::isfinite(vs.loss)) {
      throw Error("diverged", "non-finite validation loss at epoch " + std::to_string(epoch) +
                                  "; last good checkpoint: " +
                                  (have_last ? result.last_checkpoint.string() : std::string("none")));
    }
    EpochLog va{epoch, "val", vs.loss, vs.si_sdr_term, vs.ce_term, schedule.lr(), seconds_since(t0)};
    append_line(log, to_json(va));
    result.trajectory.push_back(va);

    const auto d = schedule.observe(vs.loss);
    meta.epoch = epoch;
    meta.best_val_loss = schedule.best();
    // The order stream is reseeded per epoch; this seed resumes it.
    meta.rng_state = std::to_string(mix_seed(train_cfg.seed, static_cast<std::uint64_t>(epoch) + 1));
    if (d.improved) {
      save_checkpoint(result.best_checkpoint, *model, meta);
      result.best_epoch = epoch;
      result.best_val_loss = vs.loss;
    }
    save_checkpoint(result.last_checkpoint, *model, meta);
    have_last = true;
    result.epochs_run = epoch;
    if (d.lr_reduced) {
      for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(d.lr);
      append_line(log, Json{{"event", "lr_reduced"}, {"validation", d.validation}, {"lr", d.lr}});
    }
    if (d.stop) {
      result.early_stopped = true;
      append_line(log, Json{{"event", "early_stop"}, {"validation", d.validation}});
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Memorization probe

double mean_si_sdri(Extractor& model, const std::vector<Example>& items, std::int64_t crop_samples, int batch_size) {
  torch::NoGradGuard no_grad;
  const auto len = crop_length(items, crop_samples);
  const auto enr_len = enrollment_crop_length(items, crop_samples);
  double sum = 0.0;
  for (std::size_t start = 0; start < items.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<std::size_t> idx;
    std::vector<Crop> crops;
    for (std::size_t i = start; i < std::min(items.size(), start + static_cast<std::size_t>(batch_size)); ++i) {
      idx.push_back(i);
      crops.push_back(center_crop(items[i], len, enr_len));
    }
    auto b = make_batch(items, idx, crops, len, enr_len);
    auto est = model.forward(b.mixture, b.enrollment).estimate;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto e = to_vector(est[static_cast<std::int64_t>(k)]);
      const auto x = to_vector(b.mixture[static_cast<std::int64_t>(k)]);
      const auto s = to_vector(b.target[static_cast<std::int64_t>(k)]);
      sum += clamp_db(si_sdr(e, s)) - clamp_db(si_sdr(x, s));
    }
  }
  return sum / static_cast<double>(items.size());
}

ProbeResult overfit_probe(const ModelConfig& model_cfg, const std::vector<Example>& items, const ProbeConfig& cfg,
                          const LossConfig& loss_cfg) {
  if (items.empty() || items.size() > 64) throw Error("bad-config", "probe needs 1..64 items");
  ProbeResult r;
  ModelConfig mc = model_cfg;
  int classes = 1;
  for (const auto& e : items) classes = std::max(classes, e.label + 1);
  mc.set_speaker_inventory(std::max(mc.speaker_inventory(), classes));
  r.model = make_model(mc);
  auto& model = *r.model;
  const auto crop = crop_length(items, static_cast<std::int64_t>(std::llround(cfg.crop_s * mc.sample_rate)));
  const auto enr_crop =
      enrollment_crop_length(items, static_cast<std::int64_t>(std::llround(cfg.crop_s * mc.sample_rate)));
  std::vector<std::size_t> all(items.size());
  std::vector<Crop> crops;
  for (std::size_t i = 0; i < items.size(); ++i) {
    all[i] = i;
    crops.push_back(center_crop(items[i], crop, enr_crop));
  }
  torch::optim::Adam opt(model.parameters(), torch::optim::AdamOptions(cfg.lr));
  const auto t0 = std::chrono::steady_clock::now();
  r.initial_sdri_db = mean_si_sdri(model, items, crop, cfg.batch_size);
  r.curve.emplace_back(0, r.initial_sdri_db);
  r.final_sdri_db = r.initial_sdri_db;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  std::size_t cursor = 0;
  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::vector<std::size_t> idx;
    std::vector<Crop> bc;
    for (std::size_t k = 0; k < std::min(bs, items.size()); ++k) {
      idx.push_back(all[cursor]);
      bc.push_back(crops[cursor]);
      cursor = (cursor + 1) % items.size();
    }
    auto b = make_batch(items, idx, bc, crop, enr_crop);
    auto out = model.forward(b.mixture, b.enrollment);
    auto terms = mtl_loss(out.estimate, b.target, out.logits, b.labels, loss_cfg);
    opt.zero_grad();
    terms.total.backward();
    clip_gradients(model, cfg.grad_clip_norm);
    opt.step();
    r.steps = step;
    const bool out_of_time = cfg.max_seconds > 0.0 && seconds_since(t0) > cfg.max_seconds;
    if (step % cfg.eval_every == 0 || step == cfg.max_steps || out_of_time) {
      r.final_sdri_db = mean_si_sdri(model, items, crop, cfg.batch_size);
      r.curve.emplace_back(step, r.final_sdri_db);
      if (r.final_sdri_db >= cfg.target_sdri_db) {
        r.reached = true;
        break;
      }
    }
    if (out_of_time) break;
  }
  r.status = r.reached ? "reached" : "underfit";
  return r;
}

}  // namespace tgif::nn
