// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tgif/config.hpp"
#include "tgif/report.hpp"
#include "tgif/synth.hpp"

namespace tgif::nn {

/// Any extraction system: (mixture, enrollment, record) -> estimate samples.
using EstimateFn =
    std::function<std::vector<double>(const AudioClip& mixture, const AudioClip& enrollment, const ManifestRecord&)>;

/// Wraps a checkpoint. With `required_role` set, other roles throw
/// "role-mismatch".
EstimateFn checkpoint_estimator(const std::filesystem::path& checkpoint,
                                std::optional<ModelRole> required_role = std::nullopt);

/// Scores every record of `split` against its dry target. A failing item
/// becomes an error row and the run continues.
std::vector<EvalRecord> evaluate(const EstimateFn& system, const std::string& model_id, const Manifest& manifest,
                                 const std::string& split);

/// Checkpoint evaluation, running `batch` equal-length items per forward.
std::vector<EvalRecord> evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::string& model_id,
                                            const Manifest& manifest, const std::string& split, int batch = 4);

}  // namespace tgif::nn
