#include "sqtts/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sqtts {

std::int64_t Rng::uniform_int(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  // rejection sampling to avoid modulo bias
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = eng_();
  } while (x >= limit);
  return static_cast<std::int64_t>(x % un);
}

double Rng::normal() {
  const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::ArrayXXf Rng::normal_grid(Eigen::Index rows, Eigen::Index cols) {
  Eigen::ArrayXXf out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<float>(normal());
  return out;
}

Eigen::ArrayXf Rng::normal_vector(Eigen::Index n) {
  Eigen::ArrayXf out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = static_cast<float>(normal());
  return out;
}

Eigen::MatrixXf Rng::uniform_matrix(Eigen::Index rows, Eigen::Index cols, float lo, float hi) {
  Eigen::MatrixXf out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i)
      out(i, j) = lo + (hi - lo) * static_cast<float>(uniform());
  return out;
}

Eigen::MatrixXf Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols, float stddev) {
  Eigen::MatrixXf out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = stddev * static_cast<float>(normal());
  return out;
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << eng_;
  return os.str();
}

void Rng::deserialize(const std::string& state) {
  std::istringstream is(state);
  is >> eng_;
  if (is.fail()) throw std::runtime_error("Rng::deserialize: malformed engine state");
}

}  // namespace sqtts
