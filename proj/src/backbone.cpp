#include "sqtts/backbone.hpp"

#include <stdexcept>

namespace sqtts {

void BackboneConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || model_dim < 1 || latent_dim < 1 || cond_dim < 1)
    throw std::invalid_argument("BackboneConfig: fields must be positive");
  if (model_dim % num_heads != 0)
    throw std::invalid_argument("BackboneConfig: model_dim must be divisible by num_heads");
  if (max_seq_len < 4) throw std::invalid_argument("BackboneConfig: max_seq_len too small");
}

DenoiserBackbone::DenoiserBackbone(BackboneConfig cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  in_proj_ = nn::Linear("bb.in_proj", cfg_.latent_dim, cfg_.model_dim, rng);
  cond_proj_ = nn::Linear("bb.cond_proj", cfg_.cond_dim, cfg_.model_dim, rng);
  time_proj_ = nn::Linear("bb.time_proj", cfg_.model_dim, cfg_.model_dim, rng);
  pos_ = ad::Parameter("bb.pos", rng.normal_matrix(cfg_.model_dim, cfg_.max_seq_len, 0.02f));
  for (int l = 0; l < cfg_.num_layers; ++l) {
    const std::string base = "bb.block" + std::to_string(l);
    Block blk;
    blk.ln1 = nn::LayerNorm(base + ".ln1", cfg_.model_dim);
    blk.ln2 = nn::LayerNorm(base + ".ln2", cfg_.model_dim);
    blk.qkv = nn::Linear(base + ".qkv", cfg_.model_dim, 3 * cfg_.model_dim, rng);
    blk.proj = nn::Linear(base + ".proj", cfg_.model_dim, cfg_.model_dim, rng);
    blk.fc1 = nn::Linear(base + ".fc1", cfg_.model_dim, cfg_.mlp_ratio * cfg_.model_dim, rng);
    blk.fc2 = nn::Linear(base + ".fc2", cfg_.mlp_ratio * cfg_.model_dim, cfg_.model_dim, rng);
    blocks_.push_back(std::move(blk));
  }
  final_ln_ = nn::LayerNorm("bb.final_ln", cfg_.model_dim);
  out_proj_ = nn::Linear("bb.out_proj", cfg_.model_dim, cfg_.latent_dim, rng);
}

Eigen::VectorXf DenoiserBackbone::embed_timestep(int t) {
  if (t < 0 || t > cfg_.max_timestep)
    throw std::invalid_argument("embed_timestep: t out of [0, " +
                                std::to_string(cfg_.max_timestep) + "]");
  auto enc = ad::constant(TimingEncoder::sinusoid(static_cast<double>(t), cfg_.model_dim));
  return time_proj_.forward(std::move(enc))->value.col(0);
}

ad::NodePtr DenoiserBackbone::forward_node(ad::NodePtr latent_tokens, int t,
                                           ad::NodePtr cond_tokens) {
  if (latent_tokens->value.rows() != cfg_.latent_dim)
    throw std::invalid_argument("denoise_forward: latent width " +
                                std::to_string(latent_tokens->value.rows()) +
                                " does not match configured d=" + std::to_string(cfg_.latent_dim));
  if (cond_tokens->value.rows() != cfg_.cond_dim)
    throw std::invalid_argument("denoise_forward: cond token width " +
                                std::to_string(cond_tokens->value.rows()) +
                                " does not match cond_dim=" + std::to_string(cfg_.cond_dim));
  if (t < 0 || t > cfg_.max_timestep)
    throw std::invalid_argument("denoise_forward: t out of range");

  const PrefixLayout layout{1, cond_tokens->value.cols(), latent_tokens->value.cols()};
  if (layout.total() > cfg_.max_seq_len)
    throw std::invalid_argument("denoise_forward: sequence length " +
                                std::to_string(layout.total()) + " exceeds max_seq_len=" +
                                std::to_string(cfg_.max_seq_len));

  auto time_tok = time_proj_.forward(
      ad::constant(TimingEncoder::sinusoid(static_cast<double>(t), cfg_.model_dim)));
  auto cond = cond_proj_.forward(std::move(cond_tokens));
  auto lat = in_proj_.forward(std::move(latent_tokens));
  auto x = ad::concat_cols({std::move(time_tok), std::move(cond), std::move(lat)});
  x = ad::add(std::move(x), ad::slice_cols(ad::param(pos_), 0, layout.total()));

  for (auto& blk : blocks_) {
    x = ad::add(x, nn::multihead_attention(blk.ln1.forward(x), blk.qkv, blk.proj, cfg_.num_heads,
                                           cfg_.use_causal_mask));
    x = ad::add(x, blk.fc2.forward(ad::gelu(blk.fc1.forward(blk.ln2.forward(x)))));
  }
  x = final_ln_.forward(std::move(x));
  // strip the prefix, project the remaining positions back to width d
  auto target = ad::slice_cols(std::move(x), layout.timestep_len + layout.cond_len,
                               layout.target_len);
  return out_proj_.forward(std::move(target));
}

LatentGrid DenoiserBackbone::denoise_forward(const LatentGrid& x_t, int t,
                                             const Eigen::MatrixXf& cond_tokens) {
  auto out = forward_node(ad::constant(x_t.matrix().transpose()), t, ad::constant(cond_tokens));
  return out->value.transpose().array();
}

long DenoiserBackbone::param_count() {
  return nn::total_param_count(parameters());
}

std::vector<ad::Parameter*> DenoiserBackbone::parameters() {
  std::vector<ad::Parameter*> ps;
  in_proj_.collect(ps);
  cond_proj_.collect(ps);
  time_proj_.collect(ps);
  ps.push_back(&pos_);
  for (auto& blk : blocks_) {
    blk.ln1.collect(ps);
    blk.ln2.collect(ps);
    blk.qkv.collect(ps);
    blk.proj.collect(ps);
    blk.fc1.collect(ps);
    blk.fc2.collect(ps);
  }
  final_ln_.collect(ps);
  out_proj_.collect(ps);
  return ps;
}

}  // namespace sqtts
