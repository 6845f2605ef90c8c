#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "sqtts/audio.hpp"

namespace sqtts {

// In-place radix-2 FFT, unnormalized in both directions (inverse applies no
// 1/N). Size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

Eigen::ArrayXf hann_window(int size);

// Magnitude spectrogram, (win/2 + 1) bins x num_frames, Hann window, no
// centering. A signal shorter than the window yields one zero-padded frame.
Eigen::MatrixXf stft_magnitude(const Waveform& x, int win, int hop);

// Triangular mel filterbank (HTK mel scale), rows are mel bands over
// fft_size/2 + 1 linear bins.
Eigen::MatrixXf mel_filterbank(int num_mels, int fft_size, int sample_rate, double fmin,
                               double fmax);

struct MelConfig {
  int sample_rate = 16000;
  int num_mels = 80;
  int win = 400;   // 25 ms
  int hop = 160;   // 10 ms
  int fft_size = 512;
  double fmin = 0.0;
  double fmax = 8000.0;
  float floor_energy = 1e-10f;
};

// Natural-log mel power spectrogram, (num_mels x num_frames).
Eigen::MatrixXf log_mel_spectrogram(const Waveform& x, const MelConfig& cfg);

// Orthonormal DCT-II along the rows of each column.
Eigen::MatrixXf dct2_columns(const Eigen::MatrixXf& x);

}  // namespace sqtts
