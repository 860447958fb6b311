// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/losses.hpp"

#include <algorithm>
#include <cmath>

#include "tgif/error.hpp"
#include "tgif/signal.hpp"

namespace tgif::nn {

torch::Tensor si_sdr_loss(const torch::Tensor& estimate, const torch::Tensor& target, double eps) {
  if (estimate.sizes() != target.sizes() || estimate.dim() != 2) {
    throw Error("length-mismatch", "estimate and target must both be [batch, samples] of equal shape");
  }
  auto tt = (target * target).sum(1);
  if ((tt == 0).any().item<bool>()) throw Error("silent-source", "target has zero power");
  auto alpha = (estimate * target).sum(1) / tt;
  auto proj = alpha.unsqueeze(1) * target;
  auto noise = proj - estimate;
  auto db = 10.0 * torch::log10(((proj * proj).sum(1) + eps) / ((noise * noise).sum(1) + eps));
  return -torch::clamp(db, -kMetricClampDb, kMetricClampDb);
}

torch::Tensor ce_loss(const torch::Tensor& logits, const torch::Tensor& labels) {
  if (logits.dim() != 2 || labels.dim() != 1 || labels.size(0) != logits.size(0)) {
    throw Error("bad-label", "logits must be [B, C] and labels [B]");
  }
  const auto C = logits.size(1);
  if ((labels < -1).any().item<bool>() || (labels >= C).any().item<bool>()) {
    throw Error("bad-label", "label outside [0, " + std::to_string(C) + ")");
  }
  auto known = labels >= 0;
  auto safe = torch::where(known, labels, torch::zeros_like(labels));
  auto nll = -torch::log_softmax(logits, 1).gather(1, safe.unsqueeze(1)).squeeze(1);
  return torch::where(known, nll, torch::zeros_like(nll));
}

LossTerms mtl_loss(const torch::Tensor& estimate, const torch::Tensor& target, const torch::Tensor& logits,
                   const torch::Tensor& labels, const LossConfig& cfg) {
  LossTerms t;
  t.si_sdr = si_sdr_loss(estimate, target, cfg.sisdr_eps).mean();
  if (cfg.gamma == 0.0) {
    {
      torch::NoGradGuard no_grad;
      t.ce = ce_loss(logits, labels).mean();
    }
    t.total = t.si_sdr;
  } else {
    t.ce = ce_loss(logits, labels).mean();
    t.total = t.si_sdr + cfg.gamma * t.ce;
  }
  return t;
}

double loss_si_sdr(std::span<const double> estimate, std::span<const double> target, double eps) {
  if (estimate.size() != target.size()) throw Error("length-mismatch", "estimate and target differ in length");
  double tt = 0.0, et = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    tt += target[i] * target[i];
    et += estimate[i] * target[i];
  }
  if (tt == 0.0) throw Error("silent-source", "target has zero power");
  const double alpha = et / tt;
  double pp = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double p = alpha * target[i];
    pp += p * p;
    nn += (p - estimate[i]) * (p - estimate[i]);
  }
  const double db = 10.0 * std::log10((pp + eps) / (nn + eps));
  return -std::clamp(db, -kMetricClampDb, kMetricClampDb);
}

double loss_ce(std::span<const double> logits, int target_class) {
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= logits.size()) {
    throw Error("bad-label", "class " + std::to_string(target_class) + " outside the inventory");
  }
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return -(logits[static_cast<std::size_t>(target_class)] - m - std::log(z));
}

double loss_mtl(std::span<const double> estimate, std::span<const double> target, std::span<const double> logits,
                int target_class, const LossConfig& cfg) {
  const double si = loss_si_sdr(estimate, target, cfg.sisdr_eps);
  if (cfg.gamma == 0.0) return si;
  return si + cfg.gamma * loss_ce(logits, target_class);
}

}  // namespace tgif::nn
