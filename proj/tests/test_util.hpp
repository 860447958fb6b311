// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tgif/rng.hpp"
#include "tgif/signal.hpp"

namespace tgif::testing {

/// Fresh scratch directory under the build tree (or /tmp).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* root = std::getenv("TGIF_TEST_TMP");
  std::filesystem::path dir =
      std::filesystem::path(root != nullptr ? root : "/tmp/tgif-tests") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string test_dir_name() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  return std::string(info->test_suite_name()) + "." + info->name();
}

inline std::vector<double> gaussian(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline AudioClip clip(std::vector<double> samples, int rate = kDefaultSampleRate) {
  AudioClip c;
  c.samples = std::move(samples);
  c.sample_rate = rate;
  return c;
}

}  // namespace tgif::testing
