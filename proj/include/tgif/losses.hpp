// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include <torch/torch.h>

#include "tgif/config.hpp"

namespace tgif::nn {

/// Per-example negative SI-SDR, [B]. The log argument carries eps on both
/// energies and the dB value is clamped to [-60, 60], so a perfect estimate
/// scores -60. Throws "silent-source" for an all-zero target row.
torch::Tensor si_sdr_loss(const torch::Tensor& estimate, const torch::Tensor& target, double eps = 1e-8);

/// Per-example cross-entropy, natural log, [B]. Labels are int64 in [0, C);
/// a label of -1 marks "speaker outside the inventory" and contributes 0.
/// Anything else throws "bad-label".
torch::Tensor ce_loss(const torch::Tensor& logits, const torch::Tensor& labels);

struct LossTerms {
  torch::Tensor total;  // scalar, mean over the batch
  torch::Tensor si_sdr;
  torch::Tensor ce;
};

/// si_sdr + gamma * ce, each averaged over the batch. With gamma == 0 the CE
/// term is reported but does not enter the graph.
LossTerms mtl_loss(const torch::Tensor& estimate, const torch::Tensor& target, const torch::Tensor& logits,
                   const torch::Tensor& labels, const LossConfig& cfg);

// Scalar double-precision counterparts used as oracles.
double loss_si_sdr(std::span<const double> estimate, std::span<const double> target, double eps = 1e-8);
double loss_ce(std::span<const double> logits, int target_class);
double loss_mtl(std::span<const double> estimate, std::span<const double> target, std::span<const double> logits,
                int target_class, const LossConfig& cfg);

}  // namespace tgif::nn
