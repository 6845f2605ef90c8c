#pragma once

#include <string>
#include <vector>

#include "sqtts/audio.hpp"
#include "sqtts/layers.hpp"
#include "sqtts/quantizer.hpp"
#include "sqtts/rng.hpp"

namespace sqtts {

struct CodecConfig {
  int sample_rate = 16000;
  std::vector<int> strides = {2, 2, 4, 4, 5};
  int latent_dim = 32;   // d
  int sq_scale = 9;      // S
  int base_channels = 24;
  int max_channels = 192;
  int kernel = 7;        // residual conv kernel

  int downsample_factor() const {
    int f = 1;
    for (int s : strides) f *= s;
    return f;
  }
  double frame_rate() const { return static_cast<double>(sample_rate) / downsample_factor(); }
  QuantizerConfig quantizer() const { return {sq_scale, latent_dim}; }
  void validate() const;
};

// Convolutional autoencoder with a parameter-free scalar-quantized
// bottleneck. Encoder blocks: two causal stride-1 convs in a residual pair,
// then a strided downsample conv; channels double per block up to
// max_channels. The decoder mirrors with transposed convs.
class CodecModel {
 public:
  CodecModel(CodecConfig cfg, Rng& rng);

  const CodecConfig& config() const { return cfg_; }

  // graph building (waveform node is (1 x samples), latents are (d x frames))
  ad::NodePtr encode_node(ad::NodePtr wave);            // pre-quantizer latents
  ad::NodePtr encode_quantized_node(ad::NodePtr wave);  // with STE quantizer
  ad::NodePtr decode_node(ad::NodePtr latents);

  // inference; encode output is lattice-valued, (frames x d)
  LatentGrid encode(const Waveform& w);
  Waveform decode(const LatentGrid& q);

  long param_count() const;
  std::vector<ad::Parameter*> parameters();

 private:
  struct ResidualPair {
    nn::Conv1d a, b;
  };
  static ad::NodePtr res_forward(ResidualPair& pair, ad::NodePtr x);

  CodecConfig cfg_;
  std::vector<int> channels_;  // per block, after the pre conv

  nn::Conv1d enc_pre_;
  std::vector<ResidualPair> enc_res_;
  std::vector<nn::Conv1d> enc_down_;
  nn::Conv1d enc_proj_;

  nn::Conv1d dec_proj_;
  std::vector<nn::ConvTranspose1d> dec_up_;
  std::vector<ResidualPair> dec_res_;
  nn::Conv1d dec_post_;
};

}  // namespace sqtts
