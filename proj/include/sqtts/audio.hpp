#pragma once

#include <Eigen/Dense>
#include <string>

namespace sqtts {

// Mono waveform, float samples nominally in [-1, 1].
using Waveform = Eigen::ArrayXf;

struct WavFile {
  Waveform samples;
  int sample_rate = 16000;
};

// 16-bit PCM mono readers/writers. Multi-channel input is rejected rather
// than silently downmixed.
WavFile read_wav(const std::string& path);
void write_wav(const std::string& path, const Waveform& samples, int sample_rate);

}  // namespace sqtts
