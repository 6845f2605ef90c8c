#include <doctest.h>

#include <set>
#include <string>

#include "sqtts/backbone.hpp"

using namespace sqtts;

namespace {

BackboneConfig tiny_config() {
  BackboneConfig cfg = BackboneConfig::toy();
  cfg.num_layers = 2;
  cfg.model_dim = 64;
  cfg.num_heads = 4;
  cfg.cond_dim = 48;
  cfg.latent_dim = 16;
  cfg.max_seq_len = 128;
  return cfg;
}

}  // namespace

TEST_CASE("output shape equals latent shape for prefix lengths 1, 5, 40") {
  Rng rng(1);
  DenoiserBackbone model(tiny_config(), rng);
  Rng data(2);
  const LatentGrid x_t = data.normal_grid(20, 16);
  for (int cond_len : {1, 5, 40}) {
    const Eigen::MatrixXf cond = data.normal_grid(48, cond_len).matrix();
    const LatentGrid out = model.denoise_forward(x_t, 500, cond);
    CHECK(out.rows() == 20);
    CHECK(out.cols() == 16);
  }
}

TEST_CASE("conditioning path is live") {
  Rng rng(3);
  DenoiserBackbone model(tiny_config(), rng);
  Rng data(4);
  const LatentGrid x_t = data.normal_grid(8, 16);
  Eigen::MatrixXf cond = data.normal_grid(48, 5).matrix();

  const LatentGrid base = model.denoise_forward(x_t, 100, cond);
  cond(7, 2) += 0.5f;
  const LatentGrid poked = model.denoise_forward(x_t, 100, cond);
  CHECK((base != poked).any());

  // gradients flow into the condition tokens
  auto cond_node = ad::input(cond);
  auto x_node = ad::constant(x_t.matrix().transpose());
  auto out = model.forward_node(x_node, 100, cond_node);
  ad::backward(ad::mse(out, ad::constant(ad::Mat::Zero(16, 8))));
  REQUIRE(cond_node->grad.size() > 0);
  CHECK(cond_node->grad.norm() > 0.0f);
}

TEST_CASE("width mismatches are rejected at the projection boundary") {
  Rng rng(5);
  DenoiserBackbone model(tiny_config(), rng);
  Rng data(6);
  CHECK_THROWS_WITH_AS(
      model.denoise_forward(data.normal_grid(8, 16), 10, data.normal_grid(32, 5).matrix()),
      doctest::Contains("cond"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      model.denoise_forward(data.normal_grid(8, 8), 10, data.normal_grid(48, 5).matrix()),
      doctest::Contains("latent"), std::invalid_argument);
  CHECK_THROWS_AS(model.denoise_forward(data.normal_grid(8, 16), -1, data.normal_grid(48, 2).matrix()),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      model.denoise_forward(data.normal_grid(200, 16), 10, data.normal_grid(48, 5).matrix()),
      doctest::Contains("max_seq_len"), std::invalid_argument);
}

TEST_CASE("timestep embeddings are deterministic, finite, pairwise distinct") {
  Rng rng(7);
  BackboneConfig cfg = tiny_config();
  cfg.max_timestep = 1000;
  DenoiserBackbone model(cfg, rng);

  std::set<std::string> seen;
  for (int t = 0; t <= 1000; ++t) {
    const Eigen::VectorXf e = model.embed_timestep(t);
    CHECK(e.allFinite());
    if (t == 77) CHECK(e == model.embed_timestep(77));
    seen.insert(std::string(reinterpret_cast<const char*>(e.data()), sizeof(float) * e.size()));
  }
  CHECK(seen.size() == 1001);
  CHECK_THROWS_AS(model.embed_timestep(1001), std::invalid_argument);
}

TEST_CASE("full attention is permutation-equivariant once positions are zeroed") {
  Rng rng(8);
  BackboneConfig cfg = tiny_config();
  cfg.use_causal_mask = false;
  DenoiserBackbone model(cfg, rng);
  for (auto* p : model.parameters())
    if (p->name == "bb.pos") p->value.setZero();

  Rng data(9);
  const LatentGrid x_t = data.normal_grid(10, 16);
  const Eigen::MatrixXf cond = data.normal_grid(48, 3).matrix();

  LatentGrid swapped = x_t;
  swapped.row(2).swap(swapped.row(7));

  const LatentGrid out = model.denoise_forward(x_t, 50, cond);
  LatentGrid out_swapped = model.denoise_forward(swapped, 50, cond);
  out_swapped.row(2).swap(out_swapped.row(7));
  CHECK((out - out_swapped).abs().maxCoeff() < 1e-4f);
}

TEST_CASE("causal flag changes the attention pattern") {
  Rng rng_a(10), rng_b(10);
  BackboneConfig cfg = tiny_config();
  cfg.use_causal_mask = false;
  DenoiserBackbone full(cfg, rng_a);
  cfg.use_causal_mask = true;
  DenoiserBackbone causal(cfg, rng_b);

  Rng data(11);
  const LatentGrid x_t = data.normal_grid(6, 16);
  const Eigen::MatrixXf cond = data.normal_grid(48, 2).matrix();
  CHECK((full.denoise_forward(x_t, 10, cond) != causal.denoise_forward(x_t, 10, cond)).any());
}

TEST_CASE("parameter count at the full-scale layout is stable across seeds") {
  BackboneConfig cfg;  // 12 layers, 8 heads, 768 dim
  cfg.latent_dim = 32;
  cfg.cond_dim = 768;
  Rng rng_a(1), rng_b(2);
  DenoiserBackbone a(cfg, rng_a);
  const long count_a = a.param_count();
  DenoiserBackbone b(cfg, rng_b);
  CHECK(count_a == b.param_count());
  // 12 pre-norm blocks of width 768 plus projections: order 10^8
  CHECK(count_a > 50'000'000);
  CHECK(count_a < 120'000'000);
  MESSAGE("backbone parameters at 12/8/768: ", count_a);
}

TEST_CASE("config validation") {
  BackboneConfig bad = tiny_config();
  bad.model_dim = 65;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = tiny_config();
  bad.num_layers = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
