// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/eval.hpp"

#include "tgif/checkpoint.hpp"
#include "tgif/error.hpp"
#include "tgif/models.hpp"
#include "tgif/wav.hpp"

namespace tgif::nn {

namespace {

AudioClip read_checked(const Manifest& m, const std::string& rel) {
  const auto path = m.resolve(rel);
  if (!std::filesystem::exists(path)) throw Error("asset-not-found", path.string());
  return read_wav(path);
}

EvalRecord error_row(const ManifestRecord& r, const std::string& model_id, const std::string& what) {
  EvalRecord e;
  e.scene_id = r.scene_id;
  e.model_id = model_id;
  e.K = r.K;
  e.group_id = r.group_id;
  e.error = what;
  return e;
}

}  // namespace

EstimateFn checkpoint_estimator(const std::filesystem::path& checkpoint, std::optional<ModelRole> required_role) {
  auto loaded = std::make_shared<LoadedModel>(load_checkpoint(checkpoint));
  if (required_role && loaded->meta.config.role != *required_role) {
    throw Error("role-mismatch", checkpoint.string() + " is a " + to_string(loaded->meta.config.role) +
                                     ", expected a " + to_string(*required_role));
  }
  return [loaded](const AudioClip& mixture, const AudioClip& enrollment, const ManifestRecord&) {
    return run_extractor(*loaded->model, mixture, enrollment).estimate.samples;
  };
}

std::vector<EvalRecord> evaluate(const EstimateFn& system, const std::string& model_id, const Manifest& manifest,
                                 const std::string& split) {
  std::vector<EvalRecord> out;
  for (const ManifestRecord* r : manifest.split(split)) {
    try {
      const AudioClip mix = read_checked(manifest, r->paths.mixture);
      const AudioClip dry = read_checked(manifest, r->paths.dry_target);
      const AudioClip enr = read_checked(manifest, r->paths.enrollment);
      const auto est = system(mix, enr, *r);
      if (est.size() != mix.size()) throw Error("length-mismatch", "estimate length differs from the mixture");
      out.push_back(score_example(r->scene_id, model_id, r->K, r->group_id, mix.view(), dry.view(), est));
    } catch (const std::exception& e) {
      out.push_back(error_row(*r, model_id, e.what()));
    }
  }
  return out;
}

std::vector<EvalRecord> evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& model_id,
                                            const Manifest& manifest, const std::string& split, int batch) {
  if (batch < 1) throw Error("bad-config", "eval batch must be positive");
  auto loaded = load_checkpoint(checkpoint);
  auto& model = *loaded.model;
  const int rate = loaded.meta.config.sample_rate;
  torch::NoGradGuard no_grad;

  struct Item {
    const ManifestRecord* rec;
    AudioClip mix, dry, enr;
  };
  std::vector<EvalRecord> out;
  std::vector<Item> pending;
  auto flush_one = [&](const Item& it) {
    try {
      auto est = run_extractor(model, it.mix, it.enr).estimate;
      out.push_back(score_example(it.rec->scene_id, model_id, it.rec->K, it.rec->group_id, it.mix.view(),
                                  it.dry.view(), est.view()));
    } catch (const std::exception& e) {
      out.push_back(error_row(*it.rec, model_id, e.what()));
    }
  };
  auto flush = [&] {
    if (pending.empty()) return;
    bool batched = pending.size() > 1;
    for (const auto& it : pending) {
      batched = batched && it.mix.size() == pending.front().mix.size() &&
                it.enr.size() == pending.front().enr.size() && it.mix.sample_rate == rate &&
                it.enr.sample_rate == rate;
    }
    if (batched) {
      try {
        std::vector<torch::Tensor> m, e;
        for (const auto& it : pending) {
          m.push_back(to_tensor(it.mix.view()));
          e.push_back(to_tensor(it.enr.view()));
        }
        auto est = model.forward(torch::stack(m), torch::stack(e)).estimate;
        std::vector<EvalRecord> rows;
        for (std::size_t k = 0; k < pending.size(); ++k) {
          const auto& it = pending[k];
          const auto v = to_vector(est[static_cast<std::int64_t>(k)]);
          rows.push_back(score_example(it.rec->scene_id, model_id, it.rec->K, it.rec->group_id, it.mix.view(),
                                       it.dry.view(), v));
        }
        out.insert(out.end(), rows.begin(), rows.end());
        pending.clear();
        return;
      } catch (const std::exception&) {
        // Fall through to per-item scoring so one bad item only costs its row.
      }
    }
    for (const auto& it : pending) flush_one(it);
    pending.clear();
  };

  for (const ManifestRecord* r : manifest.split(split)) {
    try {
      Item it{r, read_checked(manifest, r->paths.mixture), read_checked(manifest, r->paths.dry_target),
              read_checked(manifest, r->paths.enrollment)};
      pending.push_back(std::move(it));
    } catch (const std::exception& e) {
      flush();
      out.push_back(error_row(*r, model_id, e.what()));
      continue;
    }
    if (static_cast<int>(pending.size()) == batch) flush();
  }
  flush();
  return out;
}

}  // namespace tgif::nn
