#pragma once

#include <cmath>
#include <numbers>

#include "sqtts/audio.hpp"
#include "sqtts/rng.hpp"

namespace sqtts::testutil {

// Deterministic speech-like clip: drifting fundamental, a few harmonics with
// band emphasis, syllable-rate amplitude bumps, a little noise.
inline Waveform speech_like_clip(std::uint64_t seed, Eigen::Index num_samples,
                                 int sample_rate = 16000) {
  Rng rng(seed * 7919 + 13);
  const double f0 = 100.0 + 140.0 * rng.uniform();
  const double drift_rate = 2.0 + 3.0 * rng.uniform();
  const double drift_depth = 0.04 + 0.08 * rng.uniform();
  const double syllable_rate = 2.0 + 3.0 * rng.uniform();
  const double syllable_phase = 2.0 * std::numbers::pi * rng.uniform();
  const double band1 = 2.0 + 4.0 * rng.uniform();   // emphasized harmonic index
  const double band2 = 6.0 + 5.0 * rng.uniform();
  const double noise_level = 0.004;

  Waveform x(num_samples);
  double phase = 0.0;
  for (Eigen::Index i = 0; i < num_samples; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * (1.0 + drift_depth * std::sin(2.0 * std::numbers::pi * drift_rate * t));
    phase += 2.0 * std::numbers::pi * f / sample_rate;
    double v = 0.0;
    for (int k = 1; k <= 10; ++k) {
      const double w = std::exp(-0.5 * (k - band1) * (k - band1)) +
                       0.6 * std::exp(-0.35 * (k - band2) * (k - band2)) + 0.08 / k;
      v += w * std::sin(k * phase);
    }
    const double env =
        0.18 + 0.82 * std::pow(std::abs(std::sin(std::numbers::pi * syllable_rate * t + syllable_phase)), 1.5);
    x(i) = static_cast<float>(env * v + noise_level * rng.normal());
  }
  x *= 0.5f / x.abs().maxCoeff();
  return x;
}

}  // namespace sqtts::testutil
