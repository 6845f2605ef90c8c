#pragma once

#include <vector>

#include "sqtts/audio.hpp"
#include "sqtts/dsp.hpp"
#include "sqtts/quantizer.hpp"

namespace sqtts {

inline constexpr double kSnrCapDb = 100.0;

struct MetricReport {
  double mcd = 0.0;
  double mel_ssim = 0.0;
  double snr = 0.0;
  double stft_dist = 0.0;
  double bitrate_bps = 0.0;
};

// Mel-cepstral distortion in dB over DCT coefficients 1..13 of the log-mel
// spectrogram (the 0th, pure energy, is excluded). Inputs are trimmed to
// the shorter length; all-silence input is rejected.
double mcd(const Waveform& x, const Waveform& y, const MelConfig& mel = {});

// Mean SSIM between log-mel images, 7x7 uniform windows, dynamic range
// taken jointly from both images.
double mel_ssim(const Waveform& x, const Waveform& y, const MelConfig& mel = {});

// 10 log10(sum x^2 / sum (x-y)^2), capped at kSnrCapDb for exact matches
double snr_db(const Waveform& x, const Waveform& y);

// mean over window sizes of the squared magnitude-spectrogram difference
double stft_distance(const Waveform& x, const Waveform& y,
                     const std::vector<int>& windows = {512, 1024, 2048});

MetricReport evaluate_pair(const Waveform& reference, const Waveform& degraded,
                           const QuantizerConfig& quantizer, double frame_rate);

}  // namespace sqtts
