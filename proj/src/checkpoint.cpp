// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/checkpoint.hpp"

#include <algorithm>
#include <cstring>

#include "tgif/error.hpp"
#include "tgif/hash.hpp"

namespace tgif::nn {

int CheckpointMeta::class_of(const std::string& speaker) const {
  auto it = std::find(speaker_inventory.begin(), speaker_inventory.end(), speaker);
  return it == speaker_inventory.end() ? -1 : static_cast<int>(it - speaker_inventory.begin());
}

void to_json(Json& j, const CheckpointMeta& m) {
  j = Json{{"config", m.config},
           {"config_hash", m.config_hash},
           {"role", to_string(m.config.role)},
           {"epoch", m.epoch},
           {"best_val_loss", m.best_val_loss},
           {"seed", m.seed},
           {"rng_state", m.rng_state},
           {"lineage", m.lineage},
           {"parent", m.parent},
           {"group_id", m.group_id ? Json(*m.group_id) : Json(nullptr)},
           {"adapt_mode", m.adapt_mode ? Json(*m.adapt_mode) : Json(nullptr)},
           {"speaker_inventory", m.speaker_inventory},
           {"weights_hash", m.weights_hash}};
}

void from_json(const Json& j, CheckpointMeta& m) {
  m.config = j.at("config").get<ModelConfig>();
  m.config_hash = j.at("config_hash").get<std::string>();
  if (j.at("role").get<std::string>() != to_string(m.config.role)) {
    throw Error("bad-checkpoint", "role field disagrees with the config");
  }
  m.epoch = j.at("epoch").get<int>();
  m.best_val_loss = j.at("best_val_loss").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.rng_state = j.at("rng_state").get<std::string>();
  m.lineage = j.at("lineage").get<std::string>();
  m.parent = j.at("parent").get<std::string>();
  m.group_id.reset();
  if (!j.at("group_id").is_null()) m.group_id = j.at("group_id").get<int>();
  m.adapt_mode.reset();
  if (!j.at("adapt_mode").is_null()) m.adapt_mode = j.at("adapt_mode").get<std::string>();
  m.speaker_inventory = j.at("speaker_inventory").get<std::vector<std::string>>();
  m.weights_hash = j.at("weights_hash").get<std::string>();
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (pos + 4 > in.size()) throw Error("bad-checkpoint", "truncated weights file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 4;
  return v;
}

constexpr char kMagic[] = "TGIFW001";

std::vector<std::pair<std::string, torch::Tensor>> named_state(const torch::nn::Module& model) {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  for (const auto& p : model.named_parameters()) out.emplace_back(p.key(), p.value());
  for (const auto& b : model.named_buffers()) out.emplace_back(b.key(), b.value());
  return out;
}

}  // namespace

std::string serialize_weights(const torch::nn::Module& model) {
  std::string out(kMagic, 8);
  const auto state = named_state(model);
  put_u32(out, static_cast<std::uint32_t>(state.size()));
  for (const auto& [name, tensor] : state) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor.dim()));
    for (auto s : tensor.sizes()) put_u32(out, static_cast<std::uint32_t>(s));
    auto t = tensor.detach().to(torch::kFloat32).contiguous();
    const auto bytes = static_cast<std::size_t>(t.numel()) * sizeof(float);
    const auto* p = reinterpret_cast<const char*>(t.data_ptr<float>());
    out.append(p, bytes);
  }
  return out;
}

void load_weights(torch::nn::Module& model, const std::string& blob) {
  if (blob.size() < 8 || blob.compare(0, 8, kMagic) != 0) throw Error("bad-checkpoint", "not a weights file");
  std::size_t pos = 8;
  const auto count = get_u32(blob, pos);
  auto state = named_state(model);
  if (count != state.size()) {
    throw Error("bad-checkpoint", "weights file has " + std::to_string(count) + " tensors, model has " +
                                      std::to_string(state.size()));
  }
  torch::NoGradGuard no_grad;
  for (auto& [name, tensor] : state) {
    const auto len = get_u32(blob, pos);
    if (pos + len > blob.size()) throw Error("bad-checkpoint", "truncated weights file");
    const std::string stored = blob.substr(pos, len);
    pos += len;
    if (stored != name) throw Error("bad-checkpoint", "expected tensor '" + name + "', found '" + stored + "'");
    const auto dim = get_u32(blob, pos);
    std::vector<std::int64_t> shape;
    for (std::uint32_t d = 0; d < dim; ++d) shape.push_back(get_u32(blob, pos));
    if (torch::IntArrayRef(shape) != tensor.sizes()) throw Error("bad-checkpoint", "shape mismatch for " + name);
    const auto bytes = static_cast<std::size_t>(tensor.numel()) * sizeof(float);
    if (pos + bytes > blob.size()) throw Error("bad-checkpoint", "truncated weights file");
    auto src = torch::empty(shape, torch::kFloat32);
    std::memcpy(src.data_ptr<float>(), blob.data() + pos, bytes);
    pos += bytes;
    tensor.copy_(src.to(tensor.scalar_type()));
  }
  if (pos != blob.size()) throw Error("bad-checkpoint", "trailing bytes in weights file");
}

std::filesystem::path weights_path(const std::filesystem::path& sidecar) {
  auto p = sidecar;
  p.replace_extension(".weights");
  return p;
}

std::filesystem::path save_checkpoint(const std::filesystem::path& path, const torch::nn::Module& model,
                                      CheckpointMeta meta) {
  const auto blob = serialize_weights(model);
  meta.config_hash = meta.config.hash();
  meta.weights_hash = sha256_hex(blob);
  // Weights first so a sidecar never points at missing bytes.
  write_text(weights_path(path), blob);
  write_text(path, Json(meta).dump(2) + "\n");
  return path;
}

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& path) {
  try {
    return Json::parse(read_text(path)).get<CheckpointMeta>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad-checkpoint", path.string() + ": " + e.what());
  }
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  LoadedModel out;
  out.path = path;
  out.meta = read_checkpoint_meta(path);
  if (out.meta.config.hash() != out.meta.config_hash) {
    throw Error("bad-checkpoint", path.string() + ": config hash does not match the architecture");
  }
  const auto blob = read_text(weights_path(path));
  if (sha256_hex(blob) != out.meta.weights_hash) {
    throw Error("bad-checkpoint", path.string() + ": weights hash mismatch");
  }
  out.model = make_model(out.meta.config);
  load_weights(*out.model, blob);
  return out;
}

}  // namespace tgif::nn
