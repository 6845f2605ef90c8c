#include "sqtts/dsp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqtts {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft_inplace: size must be a power of two");
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

Eigen::ArrayXf hann_window(int size) {
  Eigen::ArrayXf w(size);
  for (int i = 0; i < size; ++i)
    w(i) = 0.5f - 0.5f * static_cast<float>(std::cos(2.0 * std::numbers::pi * i / size));
  return w;
}

Eigen::MatrixXf stft_magnitude(const Waveform& x, int win, int hop) {
  if (win <= 0 || hop <= 0) throw std::invalid_argument("stft_magnitude: win and hop must be positive");
  if ((win & (win - 1)) != 0) throw std::invalid_argument("stft_magnitude: window size must be a power of two");
  const Eigen::ArrayXf window = hann_window(win);
  const Eigen::Index len = x.size();
  const Eigen::Index frames = len >= win ? 1 + (len - win) / hop : 1;
  const int bins = win / 2 + 1;
  // amplitude calibration: a unit sine on a bin center peaks at ~1
  const float norm = 2.0f / window.sum();

  Eigen::MatrixXf mag(bins, frames);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(win));
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * hop;
    for (int i = 0; i < win; ++i) {
      const Eigen::Index s = start + i;
      const double v = s < len ? static_cast<double>(x(s)) * window(i) : 0.0;
      buf[static_cast<std::size_t>(i)] = {v, 0.0};
    }
    fft_inplace(buf, false);
    for (int k = 0; k < bins; ++k)
      mag(k, f) = norm * static_cast<float>(std::abs(buf[static_cast<std::size_t>(k)]));
  }
  return mag;
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace

Eigen::MatrixXf mel_filterbank(int num_mels, int fft_size, int sample_rate, double fmin,
                               double fmax) {
  const int bins = fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  std::vector<double> edges(static_cast<std::size_t>(num_mels) + 2);
  for (int i = 0; i < num_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (num_mels + 1));

  Eigen::MatrixXf fb = Eigen::MatrixXf::Zero(num_mels, bins);
  for (int m = 0; m < num_mels; ++m) {
    const double lo = edges[static_cast<std::size_t>(m)];
    const double mid = edges[static_cast<std::size_t>(m) + 1];
    const double hi = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / fft_size;
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      fb(m, k) = static_cast<float>(w);
    }
  }
  return fb;
}

Eigen::MatrixXf log_mel_spectrogram(const Waveform& x, const MelConfig& cfg) {
  const Eigen::ArrayXf window = hann_window(cfg.win);
  const Eigen::Index len = x.size();
  const Eigen::Index frames = len >= cfg.win ? 1 + (len - cfg.win) / cfg.hop : 1;
  const int bins = cfg.fft_size / 2 + 1;
  const Eigen::MatrixXf fb = mel_filterbank(cfg.num_mels, cfg.fft_size, cfg.sample_rate, cfg.fmin, cfg.fmax);

  Eigen::MatrixXf power(bins, frames);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(cfg.fft_size));
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * cfg.hop;
    for (int i = 0; i < cfg.fft_size; ++i) {
      double v = 0.0;
      if (i < cfg.win) {
        const Eigen::Index s = start + i;
        if (s < len) v = static_cast<double>(x(s)) * window(i);
      }
      buf[static_cast<std::size_t>(i)] = {v, 0.0};
    }
    fft_inplace(buf, false);
    for (int k = 0; k < bins; ++k) power(k, f) = static_cast<float>(std::norm(buf[static_cast<std::size_t>(k)]));
  }

  Eigen::MatrixXf mel = fb * power;
  return mel.array().max(cfg.floor_energy).log().matrix();
}

Eigen::MatrixXf dct2_columns(const Eigen::MatrixXf& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXf basis(n, n);
  const double scale0 = std::sqrt(1.0 / static_cast<double>(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      basis(k, i) = static_cast<float>((k == 0 ? scale0 : scale) *
                                       std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n)));
  return basis * x;
}

}  // namespace sqtts
