#include "sqtts/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace sqtts {

namespace {

std::pair<Waveform, Waveform> trim_pair(const Waveform& x, const Waveform& y) {
  const Eigen::Index n = std::min(x.size(), y.size());
  if (n == 0) throw std::invalid_argument("metrics: empty waveform");
  return {x.head(n), y.head(n)};
}

}  // namespace

double mcd(const Waveform& x_in, const Waveform& y_in, const MelConfig& mel) {
  auto [x, y] = trim_pair(x_in, y_in);
  if (x.abs().maxCoeff() < 1e-6f || y.abs().maxCoeff() < 1e-6f)
    throw std::invalid_argument("mcd: silence-only input rejected");

  const Eigen::MatrixXf cx = dct2_columns(log_mel_spectrogram(x, mel));
  const Eigen::MatrixXf cy = dct2_columns(log_mel_spectrogram(y, mel));
  const Eigen::Index frames = std::min(cx.cols(), cy.cols());
  constexpr int kFirst = 1, kLast = 13;

  const double scale = 10.0 / std::log(10.0) * std::sqrt(2.0);
  double total = 0.0;
  for (Eigen::Index f = 0; f < frames; ++f) {
    const auto dc = (cx.col(f).segment(kFirst, kLast - kFirst + 1) -
                     cy.col(f).segment(kFirst, kLast - kFirst + 1));
    total += scale * std::sqrt(static_cast<double>(dc.squaredNorm()));
  }
  return total / static_cast<double>(frames);
}

double mel_ssim(const Waveform& x_in, const Waveform& y_in, const MelConfig& mel) {
  auto [x, y] = trim_pair(x_in, y_in);
  Eigen::MatrixXf a = log_mel_spectrogram(x, mel);
  Eigen::MatrixXf b = log_mel_spectrogram(y, mel);
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = std::min(a.cols(), b.cols());

  const float lo = std::min(a.minCoeff(), b.minCoeff());
  const float hi = std::max(a.maxCoeff(), b.maxCoeff());
  const double range = std::max(1e-6, static_cast<double>(hi - lo));
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  constexpr Eigen::Index kWin = 7;
  if (rows < kWin || cols < kWin) throw std::invalid_argument("mel_ssim: input too short");

  double total = 0.0;
  long count = 0;
  for (Eigen::Index i = 0; i + kWin <= rows; ++i)
    for (Eigen::Index j = 0; j + kWin <= cols; ++j) {
      const auto wa = a.block(i, j, kWin, kWin).cast<double>();
      const auto wb = b.block(i, j, kWin, kWin).cast<double>();
      const double mu_a = wa.mean(), mu_b = wb.mean();
      const double var_a = (wa.array() - mu_a).square().mean();
      const double var_b = (wb.array() - mu_b).square().mean();
      const double cov = ((wa.array() - mu_a) * (wb.array() - mu_b)).mean();
      const double ssim = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                          ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      total += ssim;
      ++count;
    }
  return total / static_cast<double>(count);
}

double snr_db(const Waveform& x_in, const Waveform& y_in) {
  auto [x, y] = trim_pair(x_in, y_in);
  const double signal = static_cast<double>(x.square().sum());
  const double noise = static_cast<double>((x - y).square().sum());
  if (noise <= 0.0) return kSnrCapDb;
  const double snr = 10.0 * std::log10(signal / noise);
  return std::min(snr, kSnrCapDb);
}

double stft_distance(const Waveform& x_in, const Waveform& y_in, const std::vector<int>& windows) {
  auto [x, y] = trim_pair(x_in, y_in);
  double total = 0.0;
  for (int win : windows) {
    const Eigen::MatrixXf a = stft_magnitude(x, win, win / 4);
    const Eigen::MatrixXf b = stft_magnitude(y, win, win / 4);
    total += static_cast<double>((a - b).array().square().mean());
  }
  return total / static_cast<double>(windows.size());
}

MetricReport evaluate_pair(const Waveform& reference, const Waveform& degraded,
                           const QuantizerConfig& quantizer, double frame_rate) {
  MetricReport r;
  r.mcd = mcd(reference, degraded);
  r.mel_ssim = mel_ssim(reference, degraded);
  r.snr = snr_db(reference, degraded);
  r.stft_dist = stft_distance(reference, degraded);
  r.bitrate_bps = bitrate_bps(quantizer, frame_rate);
  return r;
}

}  // namespace sqtts
