// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgif/json_util.hpp"
#include "tgif/signal.hpp"

namespace tgif {

/// Per-example scores. Metric fields hold clamped values; a non-empty
/// `error` marks a row whose item failed and carries no metrics.
struct EvalRecord {
  std::string scene_id;
  std::string model_id;
  int K = 1;
  std::optional<int> group_id;
  double input_si_sdr_db = 0.0;
  double input_sdr_db = 0.0;
  double output_si_sdr_db = 0.0;
  double si_sdri_db = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Scores one estimate against the dry target. si_sdri is taken from the
/// clamped values so the mean identity holds exactly.
EvalRecord score_example(const std::string& scene_id, const std::string& model_id, int K,
                         std::optional<int> group_id, std::span<const double> mixture,
                         std::span<const double> dry_target, std::span<const double> estimate);

void to_json(Json& j, const EvalRecord& r);
void from_json(const Json& j, EvalRecord& r);
std::string serialize_records(const std::vector<EvalRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Breakdown by number of speakers.

inline constexpr int kMaxSpeakers = 5;
inline constexpr std::size_t kBucketCount = kMaxSpeakers + 1;  // overall, K=1..5

struct KCell {
  std::size_t count = 0;
  std::optional<double> si_sdr;   // empty: bucket has no records
  std::optional<double> si_sdri;
  std::optional<double> delta;    // SI-SDR minus the row's baseline, same bucket
};

struct KTable {
  std::vector<std::string> models;
  std::vector<std::array<KCell, kBucketCount>> rows;

  const std::array<KCell, kBucketCount>& row(const std::string& model) const;
};

/// Bucket labels: "overall", "K1".."K5".
const std::array<std::string, kBucketCount>& bucket_names();

/// Means over clamped values. `order` fixes the row order (models missing
/// from it follow in sorted order). Error rows are skipped.
KTable breakdown_by_k(const std::vector<EvalRecord>& records,
                      const std::vector<std::string>& order = {});

/// Fills `delta` for every row named in `baselines` (model -> baseline model).
void apply_baselines(KTable& table, const std::map<std::string, std::string>& baselines);

/// 19 columns: model, then si_sdr/delta/si_sdri for each bucket.
std::string table_csv(const KTable& table);
/// Text rendering, e.g. "2.98 (+1.26) | 11.52".
std::string table_text(const KTable& table);

// ---------------------------------------------------------------------------
// Improvement as a function of input SDR.

struct SdrCurve {
  double bin_width_db = 1.0;
  std::vector<long long> bin_index;  // bin n covers [n w, (n + 1) w)
  std::vector<std::size_t> counts;   // records of every model in the bin
  std::vector<std::string> models;
  std::vector<std::vector<std::optional<double>>> mean_si_sdri;  // [model][bin]

  double center(std::size_t i) const { return (static_cast<double>(bin_index[i]) + 0.5) * bin_width_db; }
};

SdrCurve bin_by_input_sdr(const std::vector<EvalRecord>& records, double bin_width_db = 1.0);
std::string curve_csv(const SdrCurve& curve);

/// Writes table_k.csv, curve_input_sdr.csv and SVG plots drawn from the CSV
/// text alone. Returns the written paths.
std::vector<std::filesystem::path> render_report(const std::filesystem::path& dir, const KTable& table,
                                                 const SdrCurve& curve);

/// SVG renderings that read only the CSV produced above.
std::string table_svg_from_csv(const std::string& csv);
std::string curve_svg_from_csv(const std::string& csv);

}  // namespace tgif
