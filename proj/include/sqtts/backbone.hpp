#pragma once

#include <string>
#include <vector>

#include "sqtts/conditioning.hpp"
#include "sqtts/layers.hpp"
#include "sqtts/quantizer.hpp"
#include "sqtts/rng.hpp"

namespace sqtts {

struct BackboneConfig {
  int num_layers = 12;
  int num_heads = 8;
  int model_dim = 768;
  int latent_dim = 32;   // d of the latent grids
  int cond_dim = 768;    // width of incoming condition tokens
  int max_seq_len = 1024;
  int mlp_ratio = 4;
  int max_timestep = 1000;
  bool use_causal_mask = false;  // full attention by default; flag kept for ablation

  static BackboneConfig toy() {
    BackboneConfig c;
    c.num_layers = 4;
    c.num_heads = 4;
    c.model_dim = 128;
    c.cond_dim = 128;
    c.max_seq_len = 256;
    return c;
  }
  void validate() const;
};

// input sequence = [timestep token | condition tokens | latent tokens];
// the prefix is stripped after the final block
struct PrefixLayout {
  Eigen::Index timestep_len = 1;
  Eigen::Index cond_len = 0;
  Eigen::Index target_len = 0;
  Eigen::Index total() const { return timestep_len + cond_len + target_len; }
};

// GPT-2 style pre-norm transformer denoiser predicting x0 from (x_t, t, c)
// with in-context prefix conditioning and learned absolute positions.
class DenoiserBackbone {
 public:
  DenoiserBackbone(BackboneConfig cfg, Rng& rng);

  // latents as (d x T) node, cond as (cond_dim x C) node; returns (d x T)
  ad::NodePtr forward_node(ad::NodePtr latent_tokens, int t, ad::NodePtr cond_tokens);

  // plain inference on a (frames x d) grid with (cond_dim x C) condition
  LatentGrid denoise_forward(const LatentGrid& x_t, int t, const Eigen::MatrixXf& cond_tokens);

  Eigen::VectorXf embed_timestep(int t);

  const BackboneConfig& config() const { return cfg_; }
  long param_count();
  std::vector<ad::Parameter*> parameters();

 private:
  struct Block {
    nn::LayerNorm ln1, ln2;
    nn::Linear qkv, proj, fc1, fc2;
  };
  BackboneConfig cfg_;
  nn::Linear in_proj_;    // d -> model_dim
  nn::Linear cond_proj_;  // cond_dim -> model_dim
  nn::Linear time_proj_;  // model_dim -> model_dim on the sinusoid
  ad::Parameter pos_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_ln_;
  nn::Linear out_proj_;   // model_dim -> d, fresh weights
};

}  // namespace sqtts
