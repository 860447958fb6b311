// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "tgif/report.hpp"

namespace tgif::testing {

// Published per-bucket means (overall, K1..K5) and the parenthesised deltas
// for the adapted rows. Used to check that our table layout reproduces them.
struct PublishedRow {
  std::string model;
  std::array<double, kBucketCount> si_sdr;
  std::array<double, kBucketCount> si_sdri;
  std::array<double, kBucketCount> delta;  // ignored when has_delta is false
  bool has_delta;
};

inline const std::vector<PublishedRow>& published_rows() {
  static const std::vector<PublishedRow> kRows = {
      {"T", {4.66, 8.60, 4.32, 0.66, -2.03, -6.18}, {13.20, 13.63, 13.99, 12.72, 11.54, 8.93}, {}, false},
      {"S128", {1.72, 6.06, 0.97, -2.53, -5.51, -8.79}, {10.26, 11.10, 10.64, 9.53, 8.06, 6.32}, {}, false},
      {"S256", {2.36, 6.65, 1.57, -1.90, -4.50, -8.20}, {10.90, 11.68, 11.24, 10.16, 9.07, 6.91}, {}, false},
      {"KD128", {2.98, 6.18, 2.43, -0.13, -2.08, -5.50}, {11.52, 11.22, 12.10, 11.92, 11.49, 9.61},
       {1.26, 0.12, 1.46, 2.40, 3.43, 3.29}, true},
      {"KD256", {3.44, 6.50, 3.03, 0.33, -1.54, -4.73}, {11.97, 11.54, 12.70, 12.38, 12.03, 10.38},
       {1.08, -0.15, 1.46, 2.23, 2.96, 3.47}, true},
      {"Oracle128", {3.82, 6.63, 2.95, 1.18, -0.27, -2.22}, {12.36, 11.66, 12.62, 13.23, 13.30, 12.89},
       {2.10, 0.57, 1.98, 3.71, 5.24, 6.57}, true},
      {"Oracle256", {4.42, 7.05, 3.74, 1.88, 0.57, -1.78}, {12.96, 12.08, 13.41, 13.93, 14.14, 13.34},
       {2.06, 0.40, 2.17, 3.78, 5.07, 6.42}, true},
  };
  return kRows;
}

inline const std::map<std::string, std::string>& published_baselines() {
  static const std::map<std::string, std::string> kBase = {
      {"KD128", "S128"}, {"KD256", "S256"}, {"Oracle128", "S128"}, {"Oracle256", "S256"}};
  return kBase;
}

inline KTable published_table() {
  KTable t;
  for (const auto& row : published_rows()) {
    t.models.push_back(row.model);
    std::array<KCell, kBucketCount> cells;
    for (std::size_t b = 0; b < kBucketCount; ++b) {
      cells[b].count = 1;
      cells[b].si_sdr = row.si_sdr[b];
      cells[b].si_sdri = row.si_sdri[b];
    }
    t.rows.push_back(cells);
  }
  apply_baselines(t, published_baselines());
  return t;
}

}  // namespace tgif::testing
