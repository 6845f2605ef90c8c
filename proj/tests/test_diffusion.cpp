#include <doctest.h>

#include <cmath>

#include "sqtts/diffusion.hpp"

using namespace sqtts;

TEST_CASE("schedule construction") {
  const NoiseSchedule s = make_schedule(1000, 1e-4, 0.02);
  CHECK(s.betas.size() == 1000);
  CHECK(s.alphas_cumprod(0) == doctest::Approx(1.0 - 1e-4).epsilon(1e-12));
  for (int i = 1; i < 1000; ++i) {
    CHECK(s.betas(i) > s.betas(i - 1));
    CHECK(s.alphas_cumprod(i) < s.alphas_cumprod(i - 1));
    CHECK(s.alphas_cumprod(i) > 0.0);
  }
  // independent product oracle in log space
  double log_prod = 0.0;
  for (int i = 0; i < 1000; ++i)
    log_prod += std::log1p(-(1e-4 + (0.02 - 1e-4) * i / 999.0));
  CHECK(s.alphas_cumprod(999) == doctest::Approx(std::exp(log_prod)).epsilon(1e-9));
  CHECK(s.alphas_cumprod(999) < 0.01);

  CHECK_THROWS_AS(make_schedule(1000, 0.0, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(1000, 0.02, 0.01), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(1000, 1e-4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(0, 1e-4, 0.02), std::invalid_argument);
}

TEST_CASE("q_sample closed form and range checks") {
  const NoiseSchedule s = make_schedule();
  Rng rng(3);
  const LatentGrid x0 = rng.normal_grid(4, 8);
  const LatentGrid noise = rng.normal_grid(4, 8);

  // exact formula reproduction
  const LatentGrid out = q_sample(x0, 500, noise, s);
  const float c0 = static_cast<float>(std::sqrt(s.alphas_cumprod(499)));
  const float c1 = static_cast<float>(std::sqrt(1.0 - s.alphas_cumprod(499)));
  CHECK(((x0 * c0 + noise * c1) == out).all());

  // no-noise limit at t=1
  const LatentGrid near = q_sample(x0, 1, noise, s);
  CHECK((near - x0).abs().maxCoeff() < 0.05f);

  // x0 = 0 leaves pure scaled noise
  const LatentGrid pure = q_sample(LatentGrid::Zero(4, 8), 900, noise, s);
  const float cn = static_cast<float>(std::sqrt(1.0 - s.alphas_cumprod(899)));
  CHECK((pure == noise * cn).all());

  CHECK_THROWS_AS(q_sample(x0, 0, noise, s), std::invalid_argument);
  CHECK_THROWS_AS(q_sample(x0, 1001, noise, s), std::invalid_argument);
  CHECK_THROWS_AS(q_sample(x0, 5, rng.normal_grid(3, 8), s), std::invalid_argument);
}

TEST_CASE("q_sample Monte Carlo marginals match closed form") {
  const NoiseSchedule s = make_schedule();
  Rng rng(11);
  LatentGrid x0(1, 4);
  x0 << -1.0f, -1.0f / 3.0f, 1.0f / 3.0f, 1.0f;

  const int draws = 10000;
  for (int t : {10, 500, 999}) {
    const double abar = s.alpha_bar(t);
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(4), sum_sq = Eigen::ArrayXd::Zero(4);
    for (int i = 0; i < draws; ++i) {
      const LatentGrid xt = q_sample(x0, t, rng.normal_grid(1, 4), s);
      sum += xt.row(0).cast<double>();
      sum_sq += xt.row(0).cast<double>().square();
    }
    const Eigen::ArrayXd mean = sum / draws;
    const Eigen::ArrayXd var = sum_sq / draws - mean.square();
    const double expected_var = 1.0 - abar;
    const double se_mean = std::sqrt(expected_var / draws);
    const double se_var = expected_var * std::sqrt(2.0 / (draws - 1));
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(mean(j) - std::sqrt(abar) * x0(0, j)) <= 3.0 * se_mean);
      CHECK(std::abs(var(j) - expected_var) <= 3.0 * se_var);
    }
  }
}

TEST_CASE("posterior step identities") {
  const NoiseSchedule s = make_schedule();
  Rng rng(5);
  const LatentGrid x0 = rng.normal_grid(3, 4);
  const LatentGrid x1 = q_sample(x0, 1, rng.normal_grid(3, 4), s);

  // final hop is deterministic and lands exactly on x0_hat
  Rng rng_a(1), rng_b(2);
  const LatentGrid out_a = posterior_step(x0, x1, 1, 0, s, rng_a);
  const LatentGrid out_b = posterior_step(x0, x1, 1, 0, s, rng_b);
  CHECK((out_a == out_b).all());
  CHECK((out_a == x0).all());

  CHECK_THROWS_AS(posterior_step(x0, x1, 0, 0, s, rng_a), std::invalid_argument);
  CHECK_THROWS_AS(posterior_step(x0, x1, 5, 5, s, rng_a), std::invalid_argument);
}

TEST_CASE("reverse step with an oracle model recovers x0 in expectation") {
  const NoiseSchedule s = make_schedule();
  Rng rng(7);
  const LatentGrid x0 = rng.normal_grid(2, 3);
  const DenoiseFn oracle = [&x0](const LatentGrid&, int, const Eigen::MatrixXf&) { return x0; };
  const Eigen::MatrixXf cond = Eigen::MatrixXf::Zero(4, 1);

  const int t = 400;
  // Monte Carlo over both forward noise and the reverse-step noise: the
  // tower rule gives E[x_{t-1}] = sqrt(abar_{t-1}) x0
  const int draws = 4000;
  LatentGrid acc = LatentGrid::Zero(2, 3);
  for (int i = 0; i < draws; ++i) {
    const LatentGrid x_t = q_sample(x0, t, rng.normal_grid(2, 3), s);
    const LatentGrid x_prev = ddpm_reverse_step(oracle, x_t, t, cond, s, rng);
    CHECK(x_prev.rows() == 2);
    CHECK(x_prev.cols() == 3);
    acc += x_prev;
  }
  acc /= static_cast<float>(draws);
  const double abar_prev = s.alpha_bar(t - 1);
  const double se = std::sqrt((1.0 - abar_prev) / draws);
  for (Eigen::Index j = 0; j < 3; ++j)
    for (Eigen::Index i = 0; i < 2; ++i)
      CHECK(std::abs(acc(i, j) - std::sqrt(abar_prev) * x0(i, j)) <= 4.0 * se);

  CHECK_THROWS_AS(ddpm_reverse_step(oracle, x0, 0, cond, s, rng), std::invalid_argument);
}

TEST_CASE("inference timestep subsets") {
  const auto hundred = inference_timesteps(1000, 100);
  REQUIRE(hundred.size() == 100);
  CHECK(hundred.front() == 10);
  CHECK(hundred.back() == 1000);
  for (std::size_t i = 1; i < hundred.size(); ++i) CHECK(hundred[i] - hundred[i - 1] == 10);

  const auto full = inference_timesteps(1000, 1000);
  CHECK(full.front() == 1);
  CHECK(full.back() == 1000);

  CHECK_THROWS_WITH_AS(inference_timesteps(1000, 1001), doctest::Contains("exceed"),
                       std::invalid_argument);
}

TEST_CASE("sample output is lattice-valued, shaped, and seed-deterministic") {
  const NoiseSchedule s = make_schedule();
  const QuantizerConfig qcfg{9, 16};
  // fake denoiser: mild contraction, so the seed stays visible in the output
  const DenoiseFn model = [](const LatentGrid& x_t, int t, const Eigen::MatrixXf&) {
    return LatentGrid(x_t * 0.9f + 0.05f * std::sin(static_cast<float>(t)));
  };
  const Eigen::MatrixXf cond = Eigen::MatrixXf::Zero(4, 2);

  Rng rng_a(42), rng_b(42);
  const LatentGrid out_a = sample(model, cond, 25, s, qcfg, rng_a, {100, false});
  const LatentGrid out_b = sample(model, cond, 25, s, qcfg, rng_b, {100, false});
  CHECK(out_a.rows() == 25);
  CHECK(out_a.cols() == 16);
  CHECK((out_a == out_b).all());
  CHECK(is_lattice_valued<float>(out_a, qcfg));

  Rng rng_c(43);
  const LatentGrid out_c = sample(model, cond, 25, s, qcfg, rng_c, {100, false});
  CHECK((out_a != out_c).any());

  CHECK_THROWS_AS(sample(model, cond, 0, s, qcfg, rng_a, {100, false}), std::invalid_argument);
  CHECK_THROWS_AS(sample(model, cond, 25, s, qcfg, rng_a, {2000, false}), std::invalid_argument);
}

TEST_CASE("training loss oracle values") {
  const NoiseSchedule s = make_schedule();
  Rng rng(13);
  const QuantizerConfig qcfg{9, 8};
  const LatentGrid x0 = scalar_quantize(LatentGrid(rng.normal_grid(5, 8)), qcfg);
  const Eigen::MatrixXf cond = Eigen::MatrixXf::Zero(4, 1);

  const DenoiseFn perfect = [&x0](const LatentGrid&, int, const Eigen::MatrixXf&) { return x0; };
  CHECK(training_loss_value(perfect, x0, cond, s, rng) == 0.0);

  const DenoiseFn zero = [](const LatentGrid& x_t, int, const Eigen::MatrixXf&) {
    return LatentGrid(LatentGrid::Zero(x_t.rows(), x_t.cols()));
  };
  const double expect = static_cast<double>(x0.square().mean());
  CHECK(training_loss_value(zero, x0, cond, s, rng) == doctest::Approx(expect).epsilon(1e-6));
}
