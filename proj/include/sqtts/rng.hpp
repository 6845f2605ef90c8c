#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>

namespace sqtts {

// Deterministic random source used everywhere a draw happens (init, noise,
// data order). Normal draws are a stateless Box-Muller on top of the raw
// engine, so serializing the engine state captures the whole stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : eng_(seed) {}

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::int64_t uniform_int(std::int64_t n);

  // standard normal, one value per two engine draws
  double normal();

  Eigen::ArrayXXf normal_grid(Eigen::Index rows, Eigen::Index cols);
  Eigen::ArrayXf normal_vector(Eigen::Index n);
  Eigen::MatrixXf uniform_matrix(Eigen::Index rows, Eigen::Index cols, float lo, float hi);
  Eigen::MatrixXf normal_matrix(Eigen::Index rows, Eigen::Index cols, float stddev);

  std::uint64_t raw() { return eng_(); }

  std::string serialize() const;
  void deserialize(const std::string& state);

 private:
  std::mt19937_64 eng_;
};

}  // namespace sqtts
