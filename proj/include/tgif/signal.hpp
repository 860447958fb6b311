// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tgif {

inline constexpr int kDefaultSampleRate = 16000;

// Returned by the ratio metrics when the residual is exactly zero.
inline constexpr double kInfiniteDb = std::numeric_limits<double>::infinity();

// Reports clamp metric values into [-kMetricClampDb, kMetricClampDb].
inline constexpr double kMetricClampDb = 60.0;

/// Mono waveform. Samples are dimensionless amplitudes.
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::span<const double> view() const { return samples; }
};

/// Mean-square amplitude. Throws "empty-signal" on empty input.
double power(std::span<const double> x);
inline double power(const AudioClip& clip) { return power(clip.view()); }

/// Throws "non-finite" if any sample is NaN or Inf.
void check_finite(const AudioClip& clip);

/// Linear convolution h*s truncated to the length of `signal`.
/// Long kernels go through an FFT; short ones are convolved directly.
AudioClip convolve_rir(const AudioClip& signal, const AudioClip& rir);

/// Gain g such that 10 log10(P(reference) / P(g * adjustable)) == ratio_db.
double gain_for_ratio(std::span<const double> reference,
                      std::span<const double> adjustable, double ratio_db);
inline double gain_for_ratio(const AudioClip& reference,
                             const AudioClip& adjustable, double ratio_db) {
  return gain_for_ratio(reference.view(), adjustable.view(), ratio_db);
}

/// 10 log10(P(a) / P(b)) in dB.
double ratio_db(std::span<const double> a, std::span<const double> b);
inline double ratio_db(const AudioClip& a, const AudioClip& b) {
  return ratio_db(a.view(), b.view());
}

/// Scale-invariant SDR in dB; kInfiniteDb when the residual vanishes.
double si_sdr(std::span<const double> estimate,
              std::span<const double> reference);
inline double si_sdr(const AudioClip& estimate, const AudioClip& reference) {
  return si_sdr(estimate.view(), reference.view());
}

double si_sdr_improvement(std::span<const double> estimate,
                          std::span<const double> mixture,
                          std::span<const double> reference);
inline double si_sdr_improvement(const AudioClip& estimate,
                                 const AudioClip& mixture,
                                 const AudioClip& reference) {
  return si_sdr_improvement(estimate.view(), mixture.view(),
                            reference.view());
}

/// Plain (not scale-invariant) SDR of a mixture against the dry target:
/// 10 log10(|s|^2 / |x - s|^2).
double input_sdr(std::span<const double> mixture,
                 std::span<const double> dry_target);
inline double input_sdr(const AudioClip& mixture,
                        const AudioClip& dry_target) {
  return input_sdr(mixture.view(), dry_target.view());
}

/// Clamp into [-60, 60] dB; +inf maps to +60.
double clamp_db(double db);

}  // namespace tgif
