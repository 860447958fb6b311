// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <memory>
#include <vector>

#include <torch/torch.h>

#include "tgif/config.hpp"
#include "tgif/signal.hpp"

namespace tgif::nn {

/// Global layer norm over (channels, time) per example with per-channel
/// affine terms. Zero input maps to the bias, never NaN.
class GlobalLayerNormImpl : public torch::nn::Module {
 public:
  explicit GlobalLayerNormImpl(int channels, double eps = 1e-8);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  double eps_;
  torch::Tensor gamma_, beta_;
};
TORCH_MODULE(GlobalLayerNorm);

/// Dilated depthwise-separable residual block. When `scale` is given the
/// hidden activations are multiplied by it (and shifted by `shift`) right
/// after the first normalization.
class TcnBlockImpl : public torch::nn::Module {
 public:
  TcnBlockImpl(int channels, int hidden, int dilation);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& scale = {},
                        const torch::Tensor& shift = {});

 private:
  torch::nn::Conv1d in_{nullptr}, depthwise_{nullptr}, out_{nullptr};
  torch::nn::PReLU act1_{nullptr}, act2_{nullptr};
  GlobalLayerNorm norm1_{nullptr}, norm2_{nullptr};
};
TORCH_MODULE(TcnBlock);

struct ForwardOut {
  torch::Tensor estimate;   // [B, T], same length as the mixture
  torch::Tensor logits;     // [B, C]
  torch::Tensor embedding;  // [B, E]
};

/// Common surface of teacher and student. Inputs are [B, T] waveforms.
class Extractor : public torch::nn::Module {
 public:
  explicit Extractor(ModelConfig config) : config_(std::move(config)) {}
  ~Extractor() override = default;

  virtual ForwardOut forward(const torch::Tensor& mixture, const torch::Tensor& enrollment) = 0;
  virtual torch::Tensor embed(const torch::Tensor& enrollment) = 0;
  /// Extraction with a caller-supplied embedding [B, E].
  virtual torch::Tensor extract_with(const torch::Tensor& mixture, const torch::Tensor& embedding) = 0;

  const ModelConfig& config() const { return config_; }
  /// When set, every masker/separator block output is appended here.
  std::vector<torch::Tensor>* trace = nullptr;

 protected:
  /// Throws "bad-input" unless x is [B, T] with T >= the shortest kernel.
  void check_input(const torch::Tensor& x, const char* what) const;

  ModelConfig config_;
};

class StudentNet : public Extractor {
 public:
  explicit StudentNet(const ModelConfig& config);
  ForwardOut forward(const torch::Tensor& mixture, const torch::Tensor& enrollment) override;
  torch::Tensor embed(const torch::Tensor& enrollment) override;
  torch::Tensor extract_with(const torch::Tensor& mixture, const torch::Tensor& embedding) override;

 private:
  torch::Tensor encode(const torch::Tensor& wave, std::int64_t* padded_len);

  torch::nn::Conv1d encoder_{nullptr};
  torch::nn::ConvTranspose1d decoder_{nullptr};
  GlobalLayerNorm in_norm_{nullptr};
  torch::nn::Conv1d in_proj_{nullptr}, out_proj_{nullptr};
  torch::nn::PReLU out_act_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::Sequential speaker_{nullptr};
  torch::nn::Linear speaker_out_{nullptr}, fusion_{nullptr}, classifier_{nullptr};
};

/// Three parallel encoders with kernels L1 < L2 < L3 and a common stride
/// L1/2. Longer kernels see extra right padding so every scale yields the
/// same frame count. Output is [B, 3N, frames].
class MultiScaleEncoderImpl : public torch::nn::Module {
 public:
  MultiScaleEncoderImpl(const std::vector<int>& kernels, int filters);
  torch::Tensor forward(const torch::Tensor& wave, std::int64_t* padded_len = nullptr);

 private:
  std::vector<int> kernels_;
  std::vector<torch::nn::Conv1d> convs_;
};
TORCH_MODULE(MultiScaleEncoder);

class TeacherNet : public Extractor {
 public:
  explicit TeacherNet(const ModelConfig& config);
  ForwardOut forward(const torch::Tensor& mixture, const torch::Tensor& enrollment) override;
  torch::Tensor embed(const torch::Tensor& enrollment) override;
  torch::Tensor extract_with(const torch::Tensor& mixture, const torch::Tensor& embedding) override;

  /// The mixture and enrollment paths use this one module.
  MultiScaleEncoder mixture_encoder() const { return encoder_; }
  MultiScaleEncoder enrollment_encoder() const { return encoder_; }

 private:
  MultiScaleEncoder encoder_{nullptr};
  torch::nn::ConvTranspose1d decoder_{nullptr};
  GlobalLayerNorm in_norm_{nullptr};
  torch::nn::Conv1d in_proj_{nullptr}, out_proj_{nullptr};
  torch::nn::PReLU out_act_{nullptr};
  torch::nn::ModuleList blocks_{nullptr};
  torch::nn::ModuleList film_scale_{nullptr}, film_shift_{nullptr};
  GlobalLayerNorm spk_norm_{nullptr};
  torch::nn::Conv1d spk_in_{nullptr}, spk_out_{nullptr};
  torch::nn::ModuleList spk_blocks_{nullptr};
  torch::nn::Linear classifier_{nullptr};
};

/// Builds the network for config.role, seeding parameter init from
/// config.init_seed. Serialized internally because torch's generator is
/// process-global.
std::shared_ptr<Extractor> make_model(const ModelConfig& config);

std::int64_t parameter_count(const torch::nn::Module& model);

/// Single-example inference on clips; checks sample rates ("rate-mismatch")
/// and lengths ("bad-input").
struct Extraction {
  AudioClip estimate;
  std::vector<double> logits;
};
Extraction run_extractor(Extractor& model, const AudioClip& mixture, const AudioClip& enrollment);
std::vector<double> speaker_embedding(Extractor& model, const AudioClip& enrollment);

torch::Tensor to_tensor(std::span<const double> samples);
std::vector<double> to_vector(const torch::Tensor& t);

}  // namespace tgif::nn
