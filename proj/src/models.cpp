// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/models.hpp"

#include <mutex>

#include "tgif/error.hpp"

namespace tgif::nn {

namespace F = torch::nn::functional;

GlobalLayerNormImpl::GlobalLayerNormImpl(int channels, double eps) : eps_(eps) {
  gamma_ = register_parameter("gamma", torch::ones({1, channels, 1}));
  beta_ = register_parameter("beta", torch::zeros({1, channels, 1}));
}

torch::Tensor GlobalLayerNormImpl::forward(const torch::Tensor& x) {
  auto mean = x.mean({1, 2}, true);
  auto centered = x - mean;
  auto var = centered.pow(2).mean({1, 2}, true);
  return centered / torch::sqrt(var + eps_) * gamma_ + beta_;
}

TcnBlockImpl::TcnBlockImpl(int channels, int hidden, int dilation) {
  in_ = register_module("in", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, hidden, 1)));
  act1_ = register_module("act1", torch::nn::PReLU());
  norm1_ = register_module("norm1", GlobalLayerNorm(hidden));
  depthwise_ = register_module(
      "depthwise", torch::nn::Conv1d(torch::nn::Conv1dOptions(hidden, hidden, 3)
                                         .dilation(dilation)
                                         .padding(dilation)
                                         .groups(hidden)));
  act2_ = register_module("act2", torch::nn::PReLU());
  norm2_ = register_module("norm2", GlobalLayerNorm(hidden));
  out_ = register_module("out", torch::nn::Conv1d(torch::nn::Conv1dOptions(hidden, channels, 1)));
}

torch::Tensor TcnBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& scale,
                                    const torch::Tensor& shift) {
  auto y = norm1_(act1_(in_(x)));
  if (scale.defined()) y = y * scale;
  if (shift.defined()) y = y + shift;
  y = norm2_(act2_(depthwise_(y)));
  return x + out_(y);
}

void Extractor::check_input(const torch::Tensor& x, const char* what) const {
  if (x.dim() != 2) throw Error("bad-input", std::string(what) + " must be [batch, samples]");
  const auto min_len = config_.min_input_samples();
  if (x.size(1) < min_len) {
    throw Error("bad-input", std::string(what) + " has " + std::to_string(x.size(1)) +
                                 " samples, shorter than one kernel (" + std::to_string(min_len) + ")");
  }
  if (!torch::isfinite(x).all().item<bool>()) throw Error("bad-input", std::string(what) + " is not finite");
}

namespace {

// Frame count and padded length so that a stride-S kernel-L encoder covers
// all T samples and the transposed decoder returns exactly the padded length.
std::int64_t padded_length(std::int64_t T, int L, int S) {
  const std::int64_t frames = T <= L ? 1 : (T - L + S - 1) / S + 1;
  return (frames - 1) * S + L;
}

}  // namespace

// ---------------------------------------------------------------------------
// Student

StudentNet::StudentNet(const ModelConfig& config) : Extractor(config) {
  const auto& c = config_.student;
  const int N = c.encoder_filters, L = c.encoder_kernel, S = c.stride();
  encoder_ = register_module("encoder",
                             torch::nn::Conv1d(torch::nn::Conv1dOptions(1, N, L).stride(S).bias(false)));
  decoder_ = register_module(
      "decoder", torch::nn::ConvTranspose1d(torch::nn::ConvTranspose1dOptions(N, 1, L).stride(S).bias(false)));
  in_norm_ = register_module("in_norm", GlobalLayerNorm(N));
  in_proj_ = register_module("in_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(N, c.bottleneck, 1)));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  for (int b = 0; b < c.masker_blocks(); ++b) {
    blocks_->push_back(TcnBlock(c.bottleneck, c.hidden, 1 << (b % c.blocks_per_repeat)));
  }
  out_act_ = register_module("out_act", torch::nn::PReLU());
  out_proj_ = register_module("out_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(c.bottleneck, N, 1)));

  speaker_ = register_module("speaker", torch::nn::Sequential());
  int in = N;
  for (int i = 0; i < c.speaker_layers; ++i) {
    speaker_->push_back(torch::nn::Conv1d(torch::nn::Conv1dOptions(in, c.embed_dim, 1)));
    speaker_->push_back(torch::nn::PReLU());
    speaker_->push_back(GlobalLayerNorm(c.embed_dim));
    in = c.embed_dim;
  }
  speaker_out_ = register_module("speaker_out", torch::nn::Linear(in, c.embed_dim));
  fusion_ = register_module("fusion", torch::nn::Linear(c.embed_dim, c.hidden));
  classifier_ = register_module("classifier", torch::nn::Linear(c.embed_dim, c.speaker_inventory));
}

torch::Tensor StudentNet::encode(const torch::Tensor& wave, std::int64_t* padded_len) {
  const auto& c = config_.student;
  const auto T = wave.size(1);
  const auto Tp = padded_length(T, c.encoder_kernel, c.stride());
  if (padded_len != nullptr) *padded_len = Tp;
  auto x = F::pad(wave.unsqueeze(1), F::PadFuncOptions({0, Tp - T}));
  return torch::relu(encoder_(x));
}

torch::Tensor StudentNet::embed(const torch::Tensor& enrollment) {
  check_input(enrollment, "enrollment");
  auto h = speaker_->is_empty() ? encode(enrollment, nullptr) : speaker_->forward(encode(enrollment, nullptr));
  return speaker_out_(h.mean(2));
}

torch::Tensor StudentNet::extract_with(const torch::Tensor& mixture, const torch::Tensor& embedding) {
  check_input(mixture, "mixture");
  std::int64_t Tp = 0;
  auto w = encode(mixture, &Tp);
  auto y = in_proj_(in_norm_(w));
  const int fusion = config_.student.fusion_index;
  for (std::size_t b = 0; b < blocks_->size(); ++b) {
    auto block = blocks_[b]->as<TcnBlockImpl>();
    if (static_cast<int>(b) + 1 == fusion) {
      y = block->forward(y, fusion_(embedding).unsqueeze(-1));
    } else {
      y = block->forward(y);
    }
    if (trace != nullptr) trace->push_back(y.detach().clone());
  }
  auto mask = torch::sigmoid(out_proj_(out_act_(y)));
  auto est = decoder_(w * mask).squeeze(1);
  return est.narrow(1, 0, mixture.size(1));
}

ForwardOut StudentNet::forward(const torch::Tensor& mixture, const torch::Tensor& enrollment) {
  auto e = embed(enrollment);
  return {extract_with(mixture, e), classifier_(e), e};
}

// ---------------------------------------------------------------------------
// Teacher

MultiScaleEncoderImpl::MultiScaleEncoderImpl(const std::vector<int>& kernels, int filters) : kernels_(kernels) {
  const int S = kernels.front() / 2;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    convs_.push_back(register_module("conv" + std::to_string(i),
                                     torch::nn::Conv1d(torch::nn::Conv1dOptions(1, filters, kernels[i]).stride(S))));
  }
}

torch::Tensor MultiScaleEncoderImpl::forward(const torch::Tensor& wave, std::int64_t* padded_len) {
  const int L1 = kernels_.front(), S = L1 / 2;
  const auto T = wave.size(1);
  const auto Tp = padded_length(T, L1, S);
  if (padded_len != nullptr) *padded_len = Tp;
  auto x = wave.unsqueeze(1);
  std::vector<torch::Tensor> scales;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    auto xi = F::pad(x, F::PadFuncOptions({0, Tp - T + kernels_[i] - L1}));
    scales.push_back(torch::relu(convs_[i](xi)));
  }
  return torch::cat(scales, 1);
}

namespace {

class SpeakerResBlockImpl : public torch::nn::Module {
 public:
  explicit SpeakerResBlockImpl(int channels) {
    conv1_ = register_module("conv1", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, channels, 1)));
    norm1_ = register_module("norm1", GlobalLayerNorm(channels));
    act1_ = register_module("act1", torch::nn::PReLU());
    conv2_ = register_module("conv2", torch::nn::Conv1d(torch::nn::Conv1dOptions(channels, channels, 1)));
    norm2_ = register_module("norm2", GlobalLayerNorm(channels));
    act2_ = register_module("act2", torch::nn::PReLU());
  }
  torch::Tensor forward(const torch::Tensor& x) {
    auto y = norm2_(conv2_(act1_(norm1_(conv1_(x)))));
    y = act2_(x + y);
    return y.size(2) >= 3 ? F::max_pool1d(y, F::MaxPool1dFuncOptions(3)) : y;
  }

 private:
  torch::nn::Conv1d conv1_{nullptr}, conv2_{nullptr};
  GlobalLayerNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::PReLU act1_{nullptr}, act2_{nullptr};
};
TORCH_MODULE(SpeakerResBlock);

}  // namespace

TeacherNet::TeacherNet(const ModelConfig& config) : Extractor(config) {
  const auto& c = config_.teacher;
  const int N3 = 3 * c.encoder_filters, L1 = c.encoder_kernels.front(), S = c.stride();
  encoder_ = register_module("encoder", MultiScaleEncoder(c.encoder_kernels, c.encoder_filters));
  // One decoder at the finest kernel reads all masked scales.
  decoder_ = register_module(
      "decoder", torch::nn::ConvTranspose1d(torch::nn::ConvTranspose1dOptions(N3, 1, L1).stride(S).bias(false)));
  in_norm_ = register_module("in_norm", GlobalLayerNorm(N3));
  in_proj_ = register_module("in_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(N3, c.bottleneck, 1)));
  blocks_ = register_module("blocks", torch::nn::ModuleList());
  film_scale_ = register_module("film_scale", torch::nn::ModuleList());
  film_shift_ = register_module("film_shift", torch::nn::ModuleList());
  for (int s = 0; s < c.stacks; ++s) {
    for (int b = 0; b < c.blocks_per_stack; ++b) blocks_->push_back(TcnBlock(c.bottleneck, c.hidden, 1 << b));
    film_scale_->push_back(torch::nn::Linear(c.embed_dim, c.hidden));
    film_shift_->push_back(torch::nn::Linear(c.embed_dim, c.hidden));
  }
  out_act_ = register_module("out_act", torch::nn::PReLU());
  out_proj_ = register_module("out_proj", torch::nn::Conv1d(torch::nn::Conv1dOptions(c.bottleneck, N3, 1)));

  spk_norm_ = register_module("spk_norm", GlobalLayerNorm(N3));
  spk_in_ = register_module("spk_in", torch::nn::Conv1d(torch::nn::Conv1dOptions(N3, c.speaker_channels, 1)));
  spk_blocks_ = register_module("spk_blocks", torch::nn::ModuleList());
  for (int i = 0; i < c.speaker_encoder_depth; ++i) spk_blocks_->push_back(SpeakerResBlock(c.speaker_channels));
  spk_out_ = register_module("spk_out",
                             torch::nn::Conv1d(torch::nn::Conv1dOptions(c.speaker_channels, c.embed_dim, 1)));
  classifier_ = register_module("classifier", torch::nn::Linear(c.embed_dim, c.speaker_inventory));
}

torch::Tensor TeacherNet::embed(const torch::Tensor& enrollment) {
  check_input(enrollment, "enrollment");
  auto h = spk_in_(spk_norm_(encoder_(enrollment)));
  for (const auto& block : *spk_blocks_) h = block->as<SpeakerResBlockImpl>()->forward(h);
  return spk_out_(h).mean(2);
}

torch::Tensor TeacherNet::extract_with(const torch::Tensor& mixture, const torch::Tensor& embedding) {
  check_input(mixture, "mixture");
  const auto& c = config_.teacher;
  auto w = encoder_(mixture);
  auto y = in_proj_(in_norm_(w));
  for (std::size_t b = 0; b < blocks_->size(); ++b) {
    auto block = blocks_[b]->as<TcnBlockImpl>();
    const auto stack = b / static_cast<std::size_t>(c.blocks_per_stack);
    if (b % static_cast<std::size_t>(c.blocks_per_stack) == 0) {
      auto scale = film_scale_[stack]->as<torch::nn::LinearImpl>()->forward(embedding).unsqueeze(-1);
      auto shift = film_shift_[stack]->as<torch::nn::LinearImpl>()->forward(embedding).unsqueeze(-1);
      y = block->forward(y, scale, shift);
    } else {
      y = block->forward(y);
    }
    if (trace != nullptr) trace->push_back(y.detach().clone());
  }
  auto mask = torch::sigmoid(out_proj_(out_act_(y)));
  auto est = decoder_(w * mask).squeeze(1);
  return est.narrow(1, 0, mixture.size(1));
}

ForwardOut TeacherNet::forward(const torch::Tensor& mixture, const torch::Tensor& enrollment) {
  auto e = embed(enrollment);
  return {extract_with(mixture, e), classifier_(e), e};
}

// ---------------------------------------------------------------------------

std::shared_ptr<Extractor> make_model(const ModelConfig& config) {
  config.validate();
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  torch::manual_seed(config.init_seed);
  if (config.role == ModelRole::kTeacher) return std::make_shared<TeacherNet>(config);
  return std::make_shared<StudentNet>(config);
}

std::int64_t parameter_count(const torch::nn::Module& model) {
  std::int64_t n = 0;
  for (const auto& p : model.parameters()) n += p.numel();
  return n;
}

torch::Tensor to_tensor(std::span<const double> samples) {
  auto t = torch::empty({static_cast<std::int64_t>(samples.size())}, torch::kFloat64);
  std::copy(samples.begin(), samples.end(), t.data_ptr<double>());
  return t.to(torch::kFloat32);
}

std::vector<double> to_vector(const torch::Tensor& t) {
  auto d = t.detach().to(torch::kFloat64).contiguous().flatten();
  return {d.data_ptr<double>(), d.data_ptr<double>() + d.numel()};
}

namespace {

torch::ScalarType param_dtype(Extractor& model) {
  auto params = model.parameters();
  return params.empty() ? torch::kFloat32 : params.front().scalar_type();
}

void check_rate(const Extractor& model, const AudioClip& clip, const char* what) {
  if (clip.sample_rate != model.config().sample_rate) {
    throw Error("rate-mismatch", std::string(what) + " is at " + std::to_string(clip.sample_rate) +
                                     " Hz, model expects " + std::to_string(model.config().sample_rate));
  }
}

}  // namespace

Extraction run_extractor(Extractor& model, const AudioClip& mixture, const AudioClip& enrollment) {
  check_rate(model, mixture, "mixture");
  check_rate(model, enrollment, "enrollment");
  torch::NoGradGuard no_grad;
  const auto dtype = param_dtype(model);
  auto out = model.forward(to_tensor(mixture.view()).to(dtype).unsqueeze(0),
                           to_tensor(enrollment.view()).to(dtype).unsqueeze(0));
  Extraction ex;
  ex.estimate.samples = to_vector(out.estimate);
  ex.estimate.sample_rate = mixture.sample_rate;
  ex.estimate.source_id = mixture.source_id;
  ex.logits = to_vector(out.logits);
  return ex;
}

std::vector<double> speaker_embedding(Extractor& model, const AudioClip& enrollment) {
  check_rate(model, enrollment, "enrollment");
  torch::NoGradGuard no_grad;
  return to_vector(model.embed(to_tensor(enrollment.view()).to(param_dtype(model)).unsqueeze(0)));
}

}  // namespace tgif::nn
