// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "tgif/error.hpp"

namespace tgif {
namespace {

// FFTW planner calls are not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error("length-mismatch", std::to_string(a.size()) + " vs " +
                                       std::to_string(b.size()) + " samples");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double energy(std::span<const double> a) { return dot(a, a); }

std::vector<double> convolve_direct(std::span<const double> s,
                                    std::span<const double> h) {
  std::vector<double> out(s.size(), 0.0);
  for (std::size_t t = 0; t < s.size(); ++t) {
    const std::size_t taps = std::min(h.size(), t + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k < taps; ++k) acc += h[k] * s[t - k];
    out[t] = acc;
  }
  return out;
}

std::vector<double> convolve_fft(std::span<const double> s,
                                 std::span<const double> h) {
  std::size_t n = 1;
  while (n < s.size() + h.size() - 1) n <<= 1;
  const std::size_t bins = n / 2 + 1;

  double* a = fftw_alloc_real(n);
  double* b = fftw_alloc_real(n);
  fftw_complex* fa = fftw_alloc_complex(bins);
  fftw_complex* fb = fftw_alloc_complex(bins);
  fftw_plan pa, pb, inv;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    pa = fftw_plan_dft_r2c_1d(static_cast<int>(n), a, fa, FFTW_ESTIMATE);
    pb = fftw_plan_dft_r2c_1d(static_cast<int>(n), b, fb, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, a, FFTW_ESTIMATE);
  }
  std::fill(a, a + n, 0.0);
  std::fill(b, b + n, 0.0);
  std::copy(s.begin(), s.end(), a);
  std::copy(h.begin(), h.end(), b);
  fftw_execute(pa);
  fftw_execute(pb);
  for (std::size_t k = 0; k < bins; ++k) {
    const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
    const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
    fa[k][0] = re;
    fa[k][1] = im;
  }
  fftw_execute(inv);
  std::vector<double> out(s.size());
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t t = 0; t < s.size(); ++t) out[t] = a[t] * scale;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(inv);
  }
  fftw_free(a);
  fftw_free(b);
  fftw_free(fa);
  fftw_free(fb);
  return out;
}

}  // namespace

double power(std::span<const double> x) {
  if (x.empty()) throw Error("empty-signal", "power of an empty signal");
  return energy(x) / static_cast<double>(x.size());
}

void check_finite(const AudioClip& clip) {
  for (double v : clip.samples) {
    if (!std::isfinite(v)) {
      throw Error("non-finite", "clip '" + clip.source_id + "' has NaN/Inf");
    }
  }
}

AudioClip convolve_rir(const AudioClip& signal, const AudioClip& rir) {
  if (signal.sample_rate != rir.sample_rate) {
    throw Error("rate-mismatch", std::to_string(signal.sample_rate) + " Hz vs " +
                                     std::to_string(rir.sample_rate) + " Hz");
  }
  if (rir.empty()) throw Error("empty-signal", "empty RIR");
  AudioClip out;
  out.sample_rate = signal.sample_rate;
  out.source_id = signal.source_id;
  if (signal.empty()) return out;
  // Direct form wins below roughly 64 taps.
  out.samples = rir.size() <= 64 ? convolve_direct(signal.view(), rir.view())
                                 : convolve_fft(signal.view(), rir.view());
  return out;
}

double gain_for_ratio(std::span<const double> reference,
                      std::span<const double> adjustable, double ratio_db) {
  const double p_ref = power(reference);
  const double p_adj = power(adjustable);
  if (p_ref <= 0.0 || p_adj <= 0.0) {
    throw Error("silent-source", "zero-power input to gain solver");
  }
  return std::sqrt(p_ref / (p_adj * std::pow(10.0, ratio_db / 10.0)));
}

double ratio_db(std::span<const double> a, std::span<const double> b) {
  return 10.0 * std::log10(power(a) / power(b));
}

double si_sdr(std::span<const double> estimate,
              std::span<const double> reference) {
  check_same_length(estimate, reference);
  const double ref_energy = energy(reference);
  if (ref_energy <= 0.0) throw Error("silent-source", "silent reference");
  const double cross = dot(estimate, reference);
  if (cross == 0.0) {
    throw Error("orthogonal-estimate", "projected target has zero energy");
  }
  const double alpha = cross / ref_energy;
  double target = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double t = alpha * reference[i];
    const double e = t - estimate[i];
    target += t * t;
    residual += e * e;
  }
  if (residual == 0.0) return kInfiniteDb;
  return 10.0 * std::log10(target / residual);
}

double si_sdr_improvement(std::span<const double> estimate,
                          std::span<const double> mixture,
                          std::span<const double> reference) {
  return si_sdr(estimate, reference) - si_sdr(mixture, reference);
}

double input_sdr(std::span<const double> mixture,
                 std::span<const double> dry_target) {
  check_same_length(mixture, dry_target);
  const double signal = energy(dry_target);
  if (signal <= 0.0) throw Error("silent-source", "silent dry target");
  double distortion = 0.0;
  for (std::size_t i = 0; i < mixture.size(); ++i) {
    const double d = mixture[i] - dry_target[i];
    distortion += d * d;
  }
  if (distortion == 0.0) return kInfiniteDb;
  return 10.0 * std::log10(signal / distortion);
}

double clamp_db(double db) {
  if (std::isnan(db)) return db;
  return std::clamp(db, -kMetricClampDb, kMetricClampDb);
}

}  // namespace tgif
