#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sqtts {

template <typename Scalar>
using GridT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// Frame-major latent grid: one row per frame, one column per latent dimension.
using LatentGrid = GridT<float>;
// Integer code grid, same layout; entries in [0, 2S].
using CodeGrid = Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;

// Parameter-free scalar quantizer: tanh squashes each latent into [-1, 1],
// rounding snaps it onto the lattice {k/S : |k| <= S}, 2S+1 levels per scalar.
struct QuantizerConfig {
  int scale = 9;       // S, half the number of nonzero levels
  int latent_dim = 32; // d, scalars per frame

  void validate() const {
    if (scale < 1) throw std::invalid_argument("QuantizerConfig: scale must be >= 1");
    if (latent_dim < 1) throw std::invalid_argument("QuantizerConfig: latent_dim must be >= 1");
  }
};

inline int levels_count(const QuantizerConfig& cfg) {
  cfg.validate();
  return 2 * cfg.scale + 1;
}

inline int bits_per_dim(const QuantizerConfig& cfg) {
  const int levels = levels_count(cfg);
  int bits = 0;
  while ((1 << bits) < levels) ++bits;
  return bits;
}

// Fixed-width packing rate: ceil(log2(2S+1)) bits per scalar, d scalars per
// frame, frame_rate frames per second.
inline double bitrate_bps(const QuantizerConfig& cfg, double frame_rate) {
  if (!(frame_rate > 0.0)) throw std::invalid_argument("bitrate_bps: frame_rate must be > 0");
  return static_cast<double>(bits_per_dim(cfg)) * cfg.latent_dim * frame_rate;
}

namespace detail {

template <typename Scalar>
void require_finite(const GridT<Scalar>& h, const char* op) {
  if (h.isFinite().all()) return;
  for (Eigen::Index j = 0; j < h.cols(); ++j)
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      if (!std::isfinite(h(i, j))) {
        std::ostringstream msg;
        msg << op << ": non-finite entry " << h(i, j) << " at (" << i << ", " << j << ")";
        throw std::invalid_argument(msg.str());
      }
}

}  // namespace detail

// q = round(tanh(h) * S) / S, elementwise. Rounding uses the platform default
// nearbyint, i.e. ties round to even; the tie set has measure zero.
template <typename Scalar>
GridT<Scalar> scalar_quantize(const GridT<Scalar>& h, const QuantizerConfig& cfg) {
  cfg.validate();
  detail::require_finite(h, "scalar_quantize");
  const Scalar s = static_cast<Scalar>(cfg.scale);
  return (h.tanh() * s).unaryExpr([](Scalar v) { return std::nearbyint(v); }) / s;
}

template <typename Scalar>
bool is_lattice_valued(const GridT<Scalar>& q, const QuantizerConfig& cfg,
                       Scalar tol = static_cast<Scalar>(1e-4)) {
  const Scalar s = static_cast<Scalar>(cfg.scale);
  const GridT<Scalar> scaled = q * s;
  const GridT<Scalar> snapped = scaled.unaryExpr([](Scalar v) { return std::nearbyint(v); });
  return ((scaled - snapped).abs() <= tol).all() && (snapped.abs() <= s + static_cast<Scalar>(0.5)).all();
}

// index = round(q * S) + S. Rejects entries off the lattice: those indicate a
// quantization bug upstream, not data to be coerced.
template <typename Scalar>
CodeGrid pack_codes(const GridT<Scalar>& q, const QuantizerConfig& cfg) {
  cfg.validate();
  const Scalar s = static_cast<Scalar>(cfg.scale);
  CodeGrid codes(q.rows(), q.cols());
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const Scalar scaled = q(i, j) * s;
      const Scalar snapped = std::nearbyint(scaled);
      if (!(std::abs(scaled - snapped) <= static_cast<Scalar>(1e-4)) ||
          std::abs(snapped) > s + static_cast<Scalar>(0.5)) {
        std::ostringstream msg;
        msg << "pack_codes: off-lattice value " << q(i, j) << " at (" << i << ", " << j
            << ") for S=" << cfg.scale;
        throw std::invalid_argument(msg.str());
      }
      codes(i, j) = static_cast<std::int32_t>(snapped) + cfg.scale;
    }
  return codes;
}

// s = (index - S) / S, the exact inverse of pack_codes.
template <typename Scalar = float>
GridT<Scalar> unpack_codes(const CodeGrid& codes, const QuantizerConfig& cfg) {
  cfg.validate();
  const int max_index = 2 * cfg.scale;
  GridT<Scalar> q(codes.rows(), codes.cols());
  for (Eigen::Index j = 0; j < codes.cols(); ++j)
    for (Eigen::Index i = 0; i < codes.rows(); ++i) {
      const std::int32_t idx = codes(i, j);
      if (idx < 0 || idx > max_index) {
        std::ostringstream msg;
        msg << "unpack_codes: index " << idx << " out of [0, " << max_index << "] at (" << i
            << ", " << j << ")";
        throw std::invalid_argument(msg.str());
      }
      q(i, j) = static_cast<Scalar>(idx - cfg.scale) / static_cast<Scalar>(cfg.scale);
    }
  return q;
}

}  // namespace sqtts
