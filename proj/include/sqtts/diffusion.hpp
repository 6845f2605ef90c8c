#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "sqtts/conditioning.hpp"
#include "sqtts/quantizer.hpp"
#include "sqtts/rng.hpp"

namespace sqtts {

// Linear-beta DDPM schedule. Timesteps are 1-based: t noising steps applied
// to the clean grid; arrays are indexed t-1.
struct NoiseSchedule {
  int num_train_steps = 1000;
  Eigen::VectorXd betas;
  Eigen::VectorXd alphas_cumprod;

  double alpha_bar(int t) const;  // t in [0, num_train_steps], alpha_bar(0) = 1
};

NoiseSchedule make_schedule(int num_train_steps = 1000, double beta_start = 1e-4,
                            double beta_end = 0.02);

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) noise, t in [1, num_train_steps]
LatentGrid q_sample(const LatentGrid& x0, int t, const LatentGrid& noise,
                    const NoiseSchedule& schedule);

// the denoiser contract for samplers: predict x0 from (x_t, t, cond tokens)
using DenoiseFn =
    std::function<LatentGrid(const LatentGrid& x_t, int t, const Eigen::MatrixXf& cond_tokens)>;

// posterior q(x_prev | x_cur, x0_hat) for an arbitrary earlier timestep;
// t_prev = 0 is the deterministic final hop onto x0_hat
LatentGrid posterior_step(const LatentGrid& x0_hat, const LatentGrid& x_cur, int t_cur, int t_prev,
                          const NoiseSchedule& schedule, Rng& rng);

LatentGrid ddpm_reverse_step(const DenoiseFn& model, const LatentGrid& x_t, int t,
                             const Eigen::MatrixXf& cond_tokens, const NoiseSchedule& schedule,
                             Rng& rng);

struct SamplerOptions {
  int num_inference_steps = 100;
  bool project_intermediate = false;  // scalar-quantize intermediate x0 estimates too
};

// Ancestral sampling over a uniformly strided subset of the training
// schedule, largest t first; the final x0 estimate is snapped onto the
// scalar lattice.
LatentGrid sample(const DenoiseFn& model, const Eigen::MatrixXf& cond_tokens,
                  Eigen::Index num_frames, const NoiseSchedule& schedule,
                  const QuantizerConfig& quantizer, Rng& rng, const SamplerOptions& opts = {});

std::vector<int> inference_timesteps(int num_train_steps, int num_inference_steps);

// x0-prediction MSE at one uniformly drawn timestep; oracle-testable form
// that takes any DenoiseFn
double training_loss_value(const DenoiseFn& model, const LatentGrid& x0,
                           const Eigen::MatrixXf& cond_tokens, const NoiseSchedule& schedule,
                           Rng& rng);

}  // namespace sqtts
