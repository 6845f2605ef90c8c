#include "sqtts/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace sqtts {

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > num_train_steps)
    throw std::invalid_argument("alpha_bar: t out of [0, " + std::to_string(num_train_steps) + "]");
  return t == 0 ? 1.0 : alphas_cumprod(t - 1);
}

NoiseSchedule make_schedule(int num_train_steps, double beta_start, double beta_end) {
  if (num_train_steps < 1) throw std::invalid_argument("make_schedule: need >= 1 step");
  if (!(beta_start > 0.0 && beta_start < beta_end && beta_end < 1.0))
    throw std::invalid_argument("make_schedule: need 0 < beta_start < beta_end < 1");
  NoiseSchedule s;
  s.num_train_steps = num_train_steps;
  s.betas.resize(num_train_steps);
  s.alphas_cumprod.resize(num_train_steps);
  double prod = 1.0;
  for (int i = 0; i < num_train_steps; ++i) {
    const double beta =
        num_train_steps == 1
            ? beta_start
            : beta_start + (beta_end - beta_start) * i / static_cast<double>(num_train_steps - 1);
    s.betas(i) = beta;
    prod *= 1.0 - beta;
    s.alphas_cumprod(i) = prod;
  }
  return s;
}

LatentGrid q_sample(const LatentGrid& x0, int t, const LatentGrid& noise,
                    const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.num_train_steps)
    throw std::invalid_argument("q_sample: t out of [1, " +
                                std::to_string(schedule.num_train_steps) + "]");
  if (x0.rows() != noise.rows() || x0.cols() != noise.cols())
    throw std::invalid_argument("q_sample: shape mismatch between x0 and noise");
  const double abar = schedule.alpha_bar(t);
  return x0 * static_cast<float>(std::sqrt(abar)) +
         noise * static_cast<float>(std::sqrt(1.0 - abar));
}

LatentGrid posterior_step(const LatentGrid& x0_hat, const LatentGrid& x_cur, int t_cur, int t_prev,
                          const NoiseSchedule& schedule, Rng& rng) {
  if (t_cur < 1 || t_cur > schedule.num_train_steps)
    throw std::invalid_argument("posterior_step: t_cur out of range");
  if (t_prev < 0 || t_prev >= t_cur)
    throw std::invalid_argument("posterior_step: need 0 <= t_prev < t_cur");
  const double abar_cur = schedule.alpha_bar(t_cur);
  const double abar_prev = schedule.alpha_bar(t_prev);
  const double beta_eff = 1.0 - abar_cur / abar_prev;
  const double denom = 1.0 - abar_cur;
  const double coef_x0 = std::sqrt(abar_prev) * beta_eff / denom;
  const double coef_xt = std::sqrt(abar_cur / abar_prev) * (1.0 - abar_prev) / denom;
  const double var = beta_eff * (1.0 - abar_prev) / denom;

  LatentGrid mean = x0_hat * static_cast<float>(coef_x0) + x_cur * static_cast<float>(coef_xt);
  if (t_prev == 0 || var <= 0.0) return mean;
  return mean + rng.normal_grid(mean.rows(), mean.cols()) * static_cast<float>(std::sqrt(var));
}

LatentGrid ddpm_reverse_step(const DenoiseFn& model, const LatentGrid& x_t, int t,
                             const Eigen::MatrixXf& cond_tokens, const NoiseSchedule& schedule,
                             Rng& rng) {
  if (t < 1) throw std::invalid_argument("ddpm_reverse_step: t must be >= 1");
  const LatentGrid x0_hat = model(x_t, t, cond_tokens);
  return posterior_step(x0_hat, x_t, t, t - 1, schedule, rng);
}

std::vector<int> inference_timesteps(int num_train_steps, int num_inference_steps) {
  if (num_inference_steps < 1)
    throw std::invalid_argument("inference_timesteps: need >= 1 step");
  if (num_inference_steps > num_train_steps)
    throw std::invalid_argument("inference_timesteps: " + std::to_string(num_inference_steps) +
                                " steps exceed the " + std::to_string(num_train_steps) +
                                "-step training schedule");
  std::vector<int> ts(static_cast<std::size_t>(num_inference_steps));
  for (int i = 1; i <= num_inference_steps; ++i)
    ts[static_cast<std::size_t>(i - 1)] = static_cast<int>(std::lround(
        static_cast<double>(i) * num_train_steps / num_inference_steps));
  return ts;  // ascending, ends at num_train_steps
}

LatentGrid sample(const DenoiseFn& model, const Eigen::MatrixXf& cond_tokens,
                  Eigen::Index num_frames, const NoiseSchedule& schedule,
                  const QuantizerConfig& quantizer, Rng& rng, const SamplerOptions& opts) {
  if (num_frames < 1) throw std::invalid_argument("sample: num_frames must be >= 1");
  quantizer.validate();
  const std::vector<int> ts = inference_timesteps(schedule.num_train_steps, opts.num_inference_steps);

  LatentGrid x = rng.normal_grid(num_frames, quantizer.latent_dim);
  for (std::size_t i = ts.size(); i-- > 0;) {
    const int t_cur = ts[i];
    const int t_prev = i > 0 ? ts[i - 1] : 0;
    LatentGrid x0_hat = model(x, t_cur, cond_tokens);
    if (t_prev == 0) return scalar_quantize(x0_hat, quantizer);
    if (opts.project_intermediate) x0_hat = scalar_quantize(x0_hat, quantizer);
    x = posterior_step(x0_hat, x, t_cur, t_prev, schedule, rng);
  }
  throw std::logic_error("sample: unreachable");
}

double training_loss_value(const DenoiseFn& model, const LatentGrid& x0,
                           const Eigen::MatrixXf& cond_tokens, const NoiseSchedule& schedule,
                           Rng& rng) {
  if (!x0.isFinite().all()) throw std::invalid_argument("training_loss: non-finite x0");
  const int t = 1 + static_cast<int>(rng.uniform_int(schedule.num_train_steps));
  const LatentGrid noise = rng.normal_grid(x0.rows(), x0.cols());
  const LatentGrid x_t = q_sample(x0, t, noise, schedule);
  const LatentGrid pred = model(x_t, t, cond_tokens);
  const double loss = static_cast<double>((pred - x0).square().mean());
  if (!std::isfinite(loss)) throw std::runtime_error("training_loss: non-finite loss value");
  return loss;
}

}  // namespace sqtts
