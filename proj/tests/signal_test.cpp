// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/signal.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "tgif/error.hpp"

namespace tgif {
namespace {

using testing::clip;
using testing::gaussian;

// Independent routes used as oracles below.
std::vector<double> brute_force_convolution(const std::vector<double>& s,
                                            const std::vector<double>& h) {
  std::vector<double> full(s.size() + h.size() - 1, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t k = 0; k < h.size(); ++k) full[i + k] += s[i] * h[k];
  }
  full.resize(s.size());
  return full;
}

// SI-SDR through the normalized correlation: rho^2 / (1 - rho^2).
double si_sdr_by_correlation(const std::vector<double>& e, const std::vector<double>& r) {
  long double ee = 0, rr = 0, er = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    ee += static_cast<long double>(e[i]) * e[i];
    rr += static_cast<long double>(r[i]) * r[i];
    er += static_cast<long double>(e[i]) * r[i];
  }
  const long double rho2 = er * er / (ee * rr);
  return static_cast<double>(10.0L * std::log10(rho2 / (1.0L - rho2)));
}

template <typename F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "no-error";
}

TEST(Power, Examples) {
  EXPECT_EQ(power(clip({0, 0, 0})), 0.0);
  EXPECT_EQ(power(clip({1, -1, 1, -1})), 1.0);
  EXPECT_DOUBLE_EQ(power(clip({3, 0, 0, 0})), 2.25);
  EXPECT_EQ(error_code([] { power(clip({})); }), "empty-signal");
}

TEST(ConvolveRir, ImpulseIsIdentity) {
  Rng rng(1);
  const AudioClip s = clip(gaussian(rng, 100));
  EXPECT_EQ(convolve_rir(s, clip({1.0})).samples, s.samples);
}

TEST(ConvolveRir, DelayIsTruncated) {
  const AudioClip out = convolve_rir(clip({1, 2, 3}), clip({0, 1}));
  EXPECT_EQ(out.samples, (std::vector<double>{0, 1, 2}));
}

TEST(ConvolveRir, MatchesBruteForceDirectPath) {
  Rng rng(7);
  const auto s = gaussian(rng, 64);
  const auto h = gaussian(rng, 8);
  const auto expected = brute_force_convolution(s, h);
  const auto got = convolve_rir(clip(s), clip(h)).samples;
  ASSERT_EQ(got.size(), 64u);
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-10);
}

TEST(ConvolveRir, MatchesBruteForceFftPath) {
  Rng rng(8);
  const auto s = gaussian(rng, 1500);
  const auto h = gaussian(rng, 700, 0.1);
  const auto expected = brute_force_convolution(s, h);
  const auto got = convolve_rir(clip(s), clip(h)).samples;
  ASSERT_EQ(got.size(), s.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], expected[i], 1e-10);
}

TEST(ConvolveRir, IsLinear) {
  Rng rng(9);
  for (std::size_t taps : {5u, 300u}) {
    const auto a = gaussian(rng, 400);
    const auto b = gaussian(rng, 400);
    const AudioClip h = clip(gaussian(rng, taps));
    std::vector<double> sum(400);
    for (std::size_t i = 0; i < 400; ++i) sum[i] = a[i] + b[i];
    const auto lhs = convolve_rir(clip(sum), h).samples;
    const auto ca = convolve_rir(clip(a), h).samples;
    const auto cb = convolve_rir(clip(b), h).samples;
    for (std::size_t i = 0; i < 400; ++i) EXPECT_NEAR(lhs[i], ca[i] + cb[i], 1e-10);
  }
}

TEST(ConvolveRir, RejectsRateMismatch) {
  EXPECT_EQ(error_code([] { convolve_rir(clip({1, 2}, 16000), clip({1}, 8000)); }),
            "rate-mismatch");
}

TEST(GainForRatio, ClosedForms) {
  // power(ref) = 4, power(adj) = 1, ratio = 10 log10(4) -> g = 1.
  EXPECT_NEAR(gain_for_ratio(clip({2, -2}), clip({1, -1}), 10 * std::log10(4.0)), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(gain_for_ratio(clip({1, -1}), clip({2, -2}), 0.0), 0.5);
  EXPECT_DOUBLE_EQ(gain_for_ratio(clip({1, 1, 1}), clip({-1, 1, -1}), 0.0), 1.0);
}

TEST(GainForRatio, RemeasuredRatioIsExact) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = gaussian(rng, 257, rng.uniform(0.01, 3.0));
    auto adj = gaussian(rng, 257, rng.uniform(0.01, 3.0));
    const double target = rng.uniform(-30.0, 30.0);
    const double g = gain_for_ratio(ref, adj, target);
    for (double& v : adj) v *= g;
    EXPECT_NEAR(ratio_db(ref, adj), target, 1e-9);
  }
}

TEST(GainForRatio, SilentInput) {
  EXPECT_EQ(error_code([] { gain_for_ratio(clip({0, 0}), clip({1, 1}), 0.0); }), "silent-source");
  EXPECT_EQ(error_code([] { gain_for_ratio(clip({1, 1}), clip({0, 0}), 0.0); }), "silent-source");
}

TEST(SiSdr, PerfectAndScaledEstimatesAreInfinite) {
  Rng rng(4);
  const auto ref = gaussian(rng, 128);
  EXPECT_EQ(si_sdr(ref, ref), kInfiniteDb);
  std::vector<double> scaled(ref);
  for (double& v : scaled) v *= -0.5;
  EXPECT_EQ(si_sdr(scaled, ref), kInfiniteDb);
}

TEST(SiSdr, HandComputedZeroDb) {
  EXPECT_DOUBLE_EQ(si_sdr(clip({1, 1}), clip({1, 0})), 0.0);
}

TEST(SiSdr, ErrorPaths) {
  EXPECT_EQ(error_code([] { si_sdr(clip({0, 1}), clip({1, 0})); }), "orthogonal-estimate");
  EXPECT_EQ(error_code([] { si_sdr(clip({0, 1}), clip({0, 0})); }), "silent-source");
  EXPECT_EQ(error_code([] { si_sdr(clip({0, 1, 2}), clip({1, 0})); }), "length-mismatch");
}

TEST(SiSdr, MatchesCorrelationRoute) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ref = gaussian(rng, 300);
    auto est = gaussian(rng, 300, rng.uniform(0.01, 2.0));
    for (std::size_t i = 0; i < est.size(); ++i) est[i] += ref[i];
    EXPECT_NEAR(si_sdr(est, ref), si_sdr_by_correlation(est, ref), 1e-6);
  }
}

TEST(SiSdr, ScaleInvariantInBothArguments) {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ref = gaussian(rng, 200);
    auto est = gaussian(rng, 200, 0.7);
    for (std::size_t i = 0; i < est.size(); ++i) est[i] += ref[i];
    const double base = si_sdr(est, ref);
    for (double c : {-3.0, 0.1, 10.0, 1e3}) {
      std::vector<double> est_c(est), ref_c(ref);
      for (double& v : est_c) v *= c;
      for (double& v : ref_c) v *= c;
      EXPECT_NEAR(si_sdr(est_c, ref), base, 1e-6);
      EXPECT_NEAR(si_sdr(est, ref_c), base, 1e-6);
    }
  }
}

TEST(SiSdrImprovement, IdentitySystemIsZero) {
  Rng rng(10);
  const auto ref = gaussian(rng, 200);
  auto mix = gaussian(rng, 200);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += ref[i];
  EXPECT_EQ(si_sdr_improvement(mix, mix, ref), 0.0);
}

TEST(SiSdrImprovement, EqualsDifferenceOfOracleCalls) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ref = gaussian(rng, 256);
    auto mix = gaussian(rng, 256);
    auto est = gaussian(rng, 256, 0.3);
    for (std::size_t i = 0; i < 256; ++i) {
      mix[i] += ref[i];
      est[i] += ref[i];
    }
    const double oracle = si_sdr_by_correlation(est, ref) - si_sdr_by_correlation(mix, ref);
    EXPECT_NEAR(si_sdr_improvement(est, mix, ref), oracle, 1e-9);
  }
}

TEST(InputSdr, Examples) {
  const AudioClip s = clip({2, 0, 0, 0});
  EXPECT_EQ(input_sdr(s, s), kInfiniteDb);
  // |s|^2 = 4, |x - s|^2 = 1.
  EXPECT_NEAR(input_sdr(clip({2, 1, 0, 0}), s), 10 * std::log10(4.0), 1e-12);
  // Equal-power distortion.
  EXPECT_DOUBLE_EQ(input_sdr(clip({1, 1}), clip({1, 0})), 0.0);
  EXPECT_EQ(error_code([] { input_sdr(clip({1, 1}), clip({0, 0})); }), "silent-source");
}

TEST(InputSdr, IsNotScaleInvariant) {
  const AudioClip s = clip({1, 0});
  const AudioClip x = clip({1, 1});
  const AudioClip x2 = clip({2, 2});
  EXPECT_DOUBLE_EQ(input_sdr(x, s), 0.0);
  // |s|^2 = 1, |2x - s|^2 = 1 + 4 -> -6.99 dB.
  EXPECT_NEAR(input_sdr(x2, s), 10 * std::log10(1.0 / 5.0), 1e-12);
  EXPECT_NE(input_sdr(x2, s), input_sdr(x, s));
}

TEST(ClampDb, MapsInfinityToCeiling) {
  EXPECT_EQ(clamp_db(kInfiniteDb), kMetricClampDb);
  EXPECT_EQ(clamp_db(-kInfiniteDb), -kMetricClampDb);
  EXPECT_EQ(clamp_db(3.5), 3.5);
}

}  // namespace
}  // namespace tgif
