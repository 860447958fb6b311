// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>

#include "tgif/signal.hpp"

namespace tgif {

enum class WavFormat { kPcm16, kFloat32 };

// Mono RIFF/WAVE only. Errors: "asset-not-found", "bad-wav", "io-error".
AudioClip read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavFormat format = WavFormat::kFloat32);

/// Rounds every sample through float32, i.e. exactly what a kFloat32
/// file will hold.
void quantize_float32(AudioClip& clip);

}  // namespace tgif
