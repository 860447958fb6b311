// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <torch/torch.h>

#include "reference_table.hpp"
#include "tgif/adapt.hpp"
#include "tgif/assets.hpp"
#include "tgif/checkpoint.hpp"
#include "tgif/config.hpp"
#include "tgif/error.hpp"
#include "tgif/eval.hpp"
#include "tgif/hash.hpp"
#include "tgif/losses.hpp"
#include "tgif/models.hpp"
#include "tgif/pipeline.hpp"
#include "tgif/report.hpp"
#include "tgif/rng.hpp"
#include "tgif/schedule.hpp"
#include "tgif/signal.hpp"
#include "tgif/synth.hpp"
#include "tgif/train.hpp"
#include "tgif/wav.hpp"

namespace fs = std::filesystem;
using namespace tgif;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path fresh(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<double> gaussian(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

AudioClip as_clip(std::vector<double> v, int rate) {
  AudioClip c;
  c.samples = std::move(v);
  c.sample_rate = rate;
  return c;
}

// Small procedural corpus with one generic manifest and one group manifest.
struct Corpus {
  fs::path generic_manifest;
  fs::path group_manifest;
};

Corpus make_corpus(const fs::path& dir, int rate, double scene_s, int generic_scenes, int group_scenes) {
  fresh(dir);
  ProceduralAssetConfig pc;
  pc.sample_rate = rate;
  pc.generic_speakers = 8;
  pc.group_speakers = 3;
  pc.utterances_per_speaker = 3;
  pc.utterance_min_s = scene_s;
  pc.utterance_max_s = scene_s + 1.0;
  pc.generic_rooms = 2;
  pc.group_rooms = 1;
  pc.rirs_per_room = 2;
  pc.noises_per_category = 1;
  pc.noise_s = scene_s + 1.0;
  pc.seed = 17;
  generate_procedural_assets(dir / "assets", pc);
  const auto generic = scan_assets(dir / "assets" / "generic");
  const auto group_cat = scan_assets(dir / "assets" / "group", PoolRole::kGroup);

  SynthConfig g = SynthConfig::generic_defaults();
  g.sample_rate = rate;
  g.duration_s = scene_s;
  g.enrollment_duration_s = scene_s;
  g.k_max = 3;
  g.hours = generic_scenes * scene_s / 3600.0;
  g.splits = {{"train", 3.0}, {"val", 1.0}};
  Corpus c;
  c.generic_manifest = build_manifest(g, generic, nullptr, dir / "generic");
  if (group_scenes == 0) return c;

  const auto groups = make_groups(group_cat, 1, 3, 7);
  SynthConfig t = SynthConfig::group_defaults();
  t.sample_rate = rate;
  t.duration_s = scene_s;
  t.enrollment_duration_s = scene_s;
  t.k_max = 3;
  t.hours = group_scenes * scene_s / 3600.0;
  c.group_manifest = build_manifest(t, group_cat, &groups.front(), dir / "group");
  return c;
}

ModelConfig tiny_student(int rate) {
  ModelConfig c;
  c.role = ModelRole::kStudent;
  c.sample_rate = rate;
  c.student.encoder_filters = 16;
  c.student.encoder_kernel = 16;
  c.student.bottleneck = 16;
  c.student.hidden = 16;
  c.student.embed_dim = 16;
  c.init_seed = 11;
  return c;
}

// ---------------------------------------------------------------------------
// 1. Metric oracle

// Projection formula in long double, coded without the library.
double brute_si_sdr(const std::vector<double>& e, const std::vector<double>& s) {
  long double es = 0, ss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    es += static_cast<long double>(e[i]) * s[i];
    ss += static_cast<long double>(s[i]) * s[i];
  }
  const long double a = es / ss;
  long double p = 0, n = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const long double t = a * s[i];
    const long double r = e[i] - t;
    p += t * t;
    n += r * r;
  }
  return static_cast<double>(10.0L * std::log10(p / n));
}

Outcome metric_oracle() {
  Rng rng(2026);
  double worst = 0.0, worst_scale = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto n = static_cast<std::size_t>(rng.integer(16, 4000));
    const auto s = gaussian(rng, n, rng.uniform(0.01, 5.0));
    auto e = gaussian(rng, n, rng.uniform(0.01, 5.0));
    const double gain = rng.uniform(-3.0, 3.0);
    for (std::size_t k = 0; k < n; ++k) e[k] += gain * s[k];
    const double got = si_sdr(e, s);
    worst = std::max(worst, std::abs(got - brute_si_sdr(e, s)));
    for (double c : {-3.0, 0.1, 10.0}) {
      auto ec = e, sc = s;
      for (double& v : ec) v *= c;
      for (double& v : sc) v *= c;
      worst_scale = std::max({worst_scale, std::abs(si_sdr(ec, s) - got), std::abs(si_sdr(e, sc) - got)});
    }
  }
  return {worst < 1e-6 && worst_scale < 1e-6,
          fmt("1000 pairs, max |delta| %.2e dB; scale c in {-3, 0.1, 10} max drift %.2e dB", worst, worst_scale)};
}

// ---------------------------------------------------------------------------
// 2. Synthesis exactness

Outcome synthesis_exactness(const fs::path& work) {
  const auto dir = fresh(work / "synthesis");
  ProceduralAssetConfig pc;
  pc.generic_speakers = 10;
  pc.group_speakers = 5;
  pc.utterances_per_speaker = 3;
  pc.generic_rooms = 3;
  pc.group_rooms = 1;
  pc.rirs_per_room = 3;
  pc.noises_per_category = 2;
  pc.seed = 23;
  generate_procedural_assets(dir, pc);
  const auto generic = scan_assets(dir / "generic");
  const auto group_cat = scan_assets(dir / "group", PoolRole::kGroup);
  const auto group = make_groups(group_cat, 1, 5, 3).front();
  AssetStore store(pc.sample_rate);

  SynthConfig gc = SynthConfig::generic_defaults();
  gc.duration_s = 4.0;
  SynthConfig tc = SynthConfig::group_defaults();
  tc.duration_s = 4.0;

  double worst_sir = 0.0, worst_snr = 0.0, worst_sum = 0.0;
  int checked_sir = 0;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const bool in_group = i % 5 == 4;
    const SceneSpec spec = in_group ? sample_scene(mix_seed(71, i), tc, group_cat, &group)
                                    : sample_scene(mix_seed(70, i), gc, generic);
    const RenderedScene r = render_scene(spec, in_group ? group_cat : generic, store);
    std::vector<double> interference(r.mixture.size(), 0.0);
    std::vector<double> sum(r.reverberant_target.samples);
    for (const auto& stem : r.interferers) {
      for (std::size_t k = 0; k < sum.size(); ++k) {
        interference[k] += stem.samples[k];
        sum[k] += stem.samples[k];
      }
    }
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k] += r.noise.samples[k];
      worst_sum = std::max(worst_sum, std::abs(sum[k] - r.mixture.samples[k]));
    }
    const AudioClip target = r.reverberant_target;
    if (spec.sir_db) {
      worst_sir = std::max(worst_sir, std::abs(ratio_db(target, as_clip(interference, target.sample_rate)) -
                                               *spec.sir_db));
      ++checked_sir;
    }
    if (spec.snr_db) worst_snr = std::max(worst_snr, std::abs(ratio_db(target, r.noise) - *spec.snr_db));
  }

  int reverberant = 0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    reverberant += sample_scene(mix_seed(2024, i), gc, generic).reverb_on_target ? 1 : 0;
  }
  const double freq = reverberant / 10000.0;
  const bool ok = worst_sir < 1e-6 && worst_snr < 1e-6 && worst_sum < 1e-10 && freq >= 0.79 && freq <= 0.81;
  return {ok, fmt("500 scenes (%d with interferers): max SIR err %.1e dB, SNR err %.1e dB, stem-sum err %.1e; "
                  "reverb %.4f over 10000 specs",
                  checked_sir, worst_sir, worst_snr, worst_sum, freq)};
}

// ---------------------------------------------------------------------------
// 3. Gradient correctness

double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max({std::sqrt(na), std::sqrt(nb), 1e-30});
}

Outcome gradient_correctness() {
  Rng rng(303);
  double worst_sisdr = 0.0, worst_ce = 0.0;
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(32, 256));
    const auto s = gaussian(rng, n);
    auto e = gaussian(rng, n, rng.uniform(0.1, 2.0));
    for (std::size_t k = 0; k < n; ++k) e[k] += s[k];
    auto te = torch::tensor(e, torch::kFloat64).unsqueeze(0).requires_grad_(true);
    nn::si_sdr_loss(te, torch::tensor(s, torch::kFloat64).unsqueeze(0)).sum().backward();
    const auto analytic = nn::to_vector(te.grad());
    std::vector<double> numeric(n);
    for (std::size_t k = 0; k < n; ++k) {
      auto ep = e, em = e;
      ep[k] += h;
      em[k] -= h;
      numeric[k] = (nn::loss_si_sdr(ep, s) - nn::loss_si_sdr(em, s)) / (2 * h);
    }
    worst_sisdr = std::max(worst_sisdr, relative_error(analytic, numeric));

    const auto classes = static_cast<std::size_t>(rng.integer(2, 40));
    const auto logits = gaussian(rng, classes, 3.0);
    const int label = static_cast<int>(rng.integer(0, static_cast<std::int64_t>(classes) - 1));
    auto tl = torch::tensor(logits, torch::kFloat64).unsqueeze(0).requires_grad_(true);
    nn::ce_loss(tl, torch::tensor({label}, torch::kInt64)).sum().backward();
    const auto ga = nn::to_vector(tl.grad());
    std::vector<double> gn(classes);
    for (std::size_t k = 0; k < classes; ++k) {
      auto lp = logits, lm = logits;
      lp[k] += h;
      lm[k] -= h;
      gn[k] = (nn::loss_ce(lp, label) - nn::loss_ce(lm, label)) / (2 * h);
    }
    worst_ce = std::max(worst_ce, relative_error(ga, gn));
  }
  return {worst_sisdr < 1e-4 && worst_ce < 1e-4,
          fmt("20 instances, max relative error: SI-SDR loss %.2e, CE loss %.2e", worst_sisdr, worst_ce)};
}

// ---------------------------------------------------------------------------
// 4. Schedule fidelity

Outcome schedule_fidelity() {
  const TrainConfig cfg = TrainConfig::for_role(ModelRole::kStudent);
  nn::PlateauSchedule sched(cfg);
  int first_halving = 0, stop_at = 0;
  double lr_before = 0.0, lr_after = 0.0;
  for (int v = 1; v <= 10000 && stop_at == 0; ++v) {
    const auto d = sched.observe(1.0);
    if (d.lr_reduced && first_halving == 0) {
      first_halving = v;
      lr_after = d.lr;
    }
    if (first_halving == 0) lr_before = d.lr;
    if (d.stop) stop_at = v;
  }
  // Validation 1 sets the best; every later one is non-improving.
  const int non_improving = stop_at - 1;
  const bool ok = first_halving == 21 && lr_after == 0.5 * lr_before && non_improving == 120;
  return {ok, fmt("first halving at validation %d (%.1e -> %.1e); stop after %d non-improving validations",
                  first_halving, lr_before, lr_after, non_improving)};
}

// ---------------------------------------------------------------------------
// 5. Memorization probe

Outcome memorization_probe(const fs::path& work, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelConfig mc = RunConfig::defaults().student;
  const Corpus c = make_corpus(work / "probe", mc.sample_rate, 2.0, 48, 0);
  nn::LoadOptions o;
  o.sample_rate = mc.sample_rate;
  auto items = nn::load_examples(read_manifest(c.generic_manifest), "train", o);
  if (items.size() < 32) return {false, fmt("only %zu training items", items.size())};
  items.resize(32);

  nn::ProbeConfig single;
  single.target_sdri_db = 10.0;
  single.batch_size = 1;
  single.max_seconds = 0.3 * budget_s;
  const auto one = nn::overfit_probe(mc, {items.front()}, single);

  nn::ProbeConfig many;
  many.target_sdri_db = 5.0;
  many.max_steps = 2000;
  many.eval_every = 50;
  many.max_seconds = budget_s - std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() - 30.0;
  const auto all = nn::overfit_probe(mc, items, many);
  return {one.final_sdri_db >= 10.0 && all.final_sdri_db >= 5.0,
          fmt("desk student (%lld params, %d Hz): 1 item %+.2f -> %+.2f dB in %d steps; "
              "32 items %+.2f -> %+.2f dB in %d steps",
              static_cast<long long>(nn::parameter_count(*nn::make_model(mc))), mc.sample_rate, one.initial_sdri_db,
              one.final_sdri_db, one.steps, all.initial_sdri_db, all.final_sdri_db, all.steps)};
}

// ---------------------------------------------------------------------------
// 6. KD-modes identity

Outcome kd_identity(const fs::path& work) {
  constexpr int kRate = 8000;
  const Corpus c = make_corpus(work / "kd_identity", kRate, 1.0, 16, 12);
  TrainConfig tc = TrainConfig::for_role(ModelRole::kStudent);
  tc.max_epochs = 1;
  tc.batch_size = 4;
  tc.crop_s = 0.5;
  const auto student = nn::pretrain(tiny_student(kRate), tc, LossConfig::for_role(ModelRole::kStudent),
                                    read_manifest(c.generic_manifest), "train", "val", work / "kd_identity" / "student")
                           .best_checkpoint;
  // Pseudo targets that are bitwise copies of the dry targets.
  const Manifest before = read_manifest(c.group_manifest);
  nn::EstimateFn copy_dry = [&](const AudioClip&, const AudioClip&, const ManifestRecord& r) {
    return read_wav(before.resolve(r.paths.dry_target)).samples;
  };
  nn::distill_targets(copy_dry, c.group_manifest);
  const auto m = read_manifest(c.group_manifest);
  for (const auto& r : m.records) {
    if (r.split != "adapt" && r.split != "val") continue;
    if (read_wav(m.resolve(*r.paths.pseudo_target)).samples != read_wav(m.resolve(r.paths.dry_target)).samples) {
      return {false, "pseudo target differs from dry target for " + r.scene_id};
    }
  }
  AdaptConfig ac;
  ac.epochs = 3;
  ac.segment_s = 1.0;
  ac.batch_size = 4;
  ac.seed = 9;
  ac.group_id = m.records.front().group_id.value();
  ac.mode = AdaptMode::kKd;
  const auto kd = nn::adapt(student, m, ac, work / "kd_identity" / "kd");
  ac.mode = AdaptMode::kOracle;
  const auto oracle = nn::adapt(student, m, ac, work / "kd_identity" / "oracle");
  if (kd.step_losses.size() != oracle.step_losses.size() || kd.step_losses.empty()) {
    return {false, fmt("step counts differ: %zu vs %zu", kd.step_losses.size(), oracle.step_losses.size())};
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < kd.step_losses.size(); ++i) {
    worst = std::max(worst, std::abs(kd.step_losses[i] - oracle.step_losses[i]));
  }
  return {worst < 1e-9, fmt("%zu adaptation steps per mode, max |kd - oracle| loss %.2e", kd.step_losses.size(), worst)};
}

// ---------------------------------------------------------------------------
// 7. Trend replication

Outcome trend_replication(const fs::path& work, bool reuse) {
  double s = 0, kd = 0, oracle = 0;
  std::string per_seed;
  std::int64_t tp = 0, sp = 0;
  for (int seed = 1; seed <= 3; ++seed) {
    const RunConfig cfg = resolve_run_config(
        RunConfig::quickstart(), std::nullopt,
        {{"TGIF_SEED", std::to_string(seed)}, {"TGIF_OUT_DIR", (work / "trend" / ("seed_" + std::to_string(seed))).string()}});
    if (!reuse) fs::remove_all(cfg.out_dir);
    const auto q = pipeline::run_quickstart(cfg);
    tp = q.teacher_params;
    sp = q.student_params;
    const auto& m = q.multi_talker_si_sdri;
    if (!m.count(pipeline::kStudentId) || !m.count(pipeline::kKdId) || !m.count(pipeline::kOracleId)) {
      return {false, fmt("seed %d produced no K>=2 group-test records", seed)};
    }
    s += m.at(pipeline::kStudentId) / 3;
    kd += m.at(pipeline::kKdId) / 3;
    oracle += m.at(pipeline::kOracleId) / 3;
    per_seed += fmt(" seed%d S %+.2f KD %+.2f Oracle %+.2f (%.0f s);", seed, m.at(pipeline::kStudentId),
                    m.at(pipeline::kKdId), m.at(pipeline::kOracleId), q.wall_s);
  }
  const double ratio = static_cast<double>(tp) / static_cast<double>(sp);
  const bool ok = ratio >= 4.0 && kd - s > 0.0 && oracle >= kd;
  return {ok, fmt("teacher/student params %.1fx;", ratio) + per_seed +
                  fmt(" 3-seed K>=2 SI-SDRi: S %+.2f, KD %+.2f (margin %+.2f), Oracle %+.2f dB", s, kd, kd - s,
                      oracle)};
}

// ---------------------------------------------------------------------------
// 8. Determinism

Outcome determinism(const fs::path& work) {
  constexpr int kRate = 8000;
  const auto dir = fresh(work / "determinism");
  ProceduralAssetConfig pc;
  pc.sample_rate = kRate;
  pc.generic_speakers = 6;
  pc.group_speakers = 3;
  pc.generic_rooms = 2;
  pc.group_rooms = 1;
  pc.noises_per_category = 1;
  pc.seed = 31;
  generate_procedural_assets(dir / "assets", pc);
  const auto catalog = scan_assets(dir / "assets" / "generic");
  SynthConfig g = SynthConfig::generic_defaults();
  g.sample_rate = kRate;
  g.duration_s = 2.0;
  g.hours = 24 * 2.0 / 3600.0;
  g.seed = 77;
  const auto m1 = build_manifest(g, catalog, nullptr, dir / "a", 1);
  const auto m2 = build_manifest(g, catalog, nullptr, dir / "b", 2);
  const std::string first = read_text(m1);
  bool manifests_equal = first == read_text(m2);
  const Manifest ma = read_manifest(m1), mb = read_manifest(m2);
  for (const auto& r : ma.records) {
    manifests_equal = manifests_equal && sha256_file(ma.resolve(r.paths.mixture)) == sha256_file(mb.resolve(r.paths.mixture));
  }
  const auto m3 = build_manifest(g, catalog, nullptr, dir / "a", 1);
  const bool rerun_bytes = read_text(m3) == first;

  // Re-evaluating a checkpoint.
  auto model = nn::make_model(tiny_student(kRate));
  nn::CheckpointMeta meta;
  meta.config = tiny_student(kRate);
  const auto ckpt = nn::save_checkpoint(dir / "ckpt" / "model.json", *model, meta);
  const auto manifest = read_manifest(m1);
  const auto e1 = serialize_records(nn::evaluate_checkpoint(ckpt, "S", manifest, "train", 4));
  const auto e2 = serialize_records(nn::evaluate_checkpoint(ckpt, "S", manifest, "train", 4));

  // Report CSVs from the same records, in two orders.
  auto records = nn::evaluate_checkpoint(ckpt, "S", manifest, "train", 4);
  auto table = breakdown_by_k(records, {"S"});
  const auto p1 = render_report(dir / "report1", table, bin_by_input_sdr(records));
  std::reverse(records.begin(), records.end());
  const auto p2 = render_report(dir / "report2", breakdown_by_k(records, {"S"}), bin_by_input_sdr(records));
  bool csv_equal = true;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p1[i].extension() == ".csv") csv_equal = csv_equal && sha256_file(p1[i]) == sha256_file(p2[i]);
  }
  const bool ok = manifests_equal && rerun_bytes && e1 == e2 && csv_equal;
  return {ok, fmt("manifest bytes %s (jobs 1 vs 2 %s); eval records %s; report CSVs %s",
                  rerun_bytes ? "identical" : "DIFFER", manifests_equal ? "identical" : "DIFFER",
                  e1 == e2 ? "identical" : "DIFFER",
                  csv_equal ? "identical" : "DIFFER")};
}

// ---------------------------------------------------------------------------
// 9. Report shape

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Outcome report_shape() {
  const auto table = testing::published_table();
  std::istringstream csv(table_csv(table));
  std::string line;
  std::getline(csv, line);
  const auto header = split_csv(line);
  bool ok = header.size() == 1 + 3 * kBucketCount;
  std::size_t row = 0, cells_checked = 0;
  while (std::getline(csv, line)) {
    const auto& want = testing::published_rows().at(row++);
    const auto cells = split_csv(line);
    ok = ok && cells.size() == header.size() && cells[0] == want.model;
    for (std::size_t b = 0; b < kBucketCount && ok; ++b) {
      ok = ok && cells[1 + 3 * b] == fmt("%.2f", want.si_sdr[b]) && cells[3 + 3 * b] == fmt("%.2f", want.si_sdri[b]) &&
           cells[2 + 3 * b] == (want.has_delta ? fmt("%+.2f", want.delta[b]) : std::string());
      cells_checked += 3;
    }
  }
  ok = ok && row == testing::published_rows().size();

  Rng rng(9);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 2000; ++i) {
    EvalRecord r;
    r.scene_id = "s" + std::to_string(i / 3);
    r.model_id = std::vector<std::string>{"S", "S-KD", "S-KD-Oracle"}[static_cast<std::size_t>(i % 3)];
    r.K = static_cast<int>(rng.integer(1, 5));
    r.input_sdr_db = rng.uniform(-25.0, 25.0);
    r.si_sdri_db = rng.uniform(-5.0, 20.0);
    records.push_back(r);
  }
  const auto curve = bin_by_input_sdr(records, 1.0);
  std::size_t total = 0;
  for (auto n : curve.counts) total += n;
  ok = ok && total == records.size();
  return {ok, fmt("%zu rows x %zu columns, %zu published cells reproduced; curve bins hold %zu of %zu records",
                  row, header.size(), cells_checked, total, records.size())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-9"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  bool reuse = false;
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  app.add_flag("--reuse", reuse, "Reuse completed quickstart stages (criterion 7)");
  CLI11_PARSE(app, argc, argv);
  torch::set_num_threads(1);
  const fs::path root = fs::absolute(work);
  fs::create_directories(root);

  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle", 10, metric_oracle},
      {2, "synthesis exactness", 120, [&] { return synthesis_exactness(root); }},
      {3, "gradient correctness", 60, gradient_correctness},
      {4, "schedule fidelity", 10, schedule_fidelity},
      {5, "memorization probe", 600, [&] { return memorization_probe(root, 600); }},
      {6, "kd-modes identity", 60, [&] { return kd_identity(root); }},
      {7, "trend replication", 1800, [&] { return trend_replication(root, reuse); }},
      {8, "determinism", 120, [&] { return determinism(root); }},
      {9, "report shape", 10, report_shape},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.ok && wall < c.budget_s;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name << "): " << o.detail
              << fmt(" [%.1f s, budget %.0f s%s]", wall, c.budget_s, wall < c.budget_s ? "" : ", OVER BUDGET")
              << std::endl;
  }
  return failed;
}
