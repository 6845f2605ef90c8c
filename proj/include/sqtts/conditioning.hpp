#pragma once

#include <string>
#include <vector>

#include "sqtts/audio.hpp"
#include "sqtts/layers.hpp"
#include "sqtts/rng.hpp"

namespace sqtts {

// Conditioning inputs for the denoiser. Tokens are stored one per column,
// all with cond_dim rows.
struct ConditionBundle {
  Eigen::MatrixXf text_tokens;         // (cond_dim x len_text)
  Eigen::VectorXf speaker_embedding;   // (cond_dim)
  Eigen::VectorXf timing_embedding;    // (cond_dim)
  double duration_seconds = 0.0;

  void validate() const;
  // prefix order: [timing, speaker, text...]; the timestep token is added
  // by the backbone in front of this block
  Eigen::MatrixXf cond_tokens() const;
};

// graph-side twin of ConditionBundle, used while training
struct ConditionNodes {
  ad::NodePtr text_tokens;
  ad::NodePtr speaker_embedding;
  ad::NodePtr timing_embedding;
  ad::NodePtr cond_tokens() const;
};

struct TextEncoderConfig {
  int dim = 128;
  int num_layers = 4;
  int num_heads = 4;
  int mlp_ratio = 4;
  int max_len = 512;
  int vocab = 256;  // raw UTF-8 bytes
  void validate() const;
};

// Character-level (byte-level) learned encoder: token + position embeddings
// into a small non-causal transformer.
class TextEncoder {
 public:
  TextEncoder(TextEncoderConfig cfg, Rng& rng);

  ad::NodePtr forward_node(const std::string& text);
  Eigen::MatrixXf encode(const std::string& text);  // (dim x len)

  const TextEncoderConfig& config() const { return cfg_; }
  std::vector<ad::Parameter*> parameters();

 private:
  struct Block {
    nn::LayerNorm ln1, ln2;
    nn::Linear qkv, proj, fc1, fc2;
  };
  TextEncoderConfig cfg_;
  nn::Embedding tok_;
  ad::Parameter pos_;
  std::vector<Block> blocks_;
  nn::LayerNorm final_ln_;
};

struct SpeakerEncoderConfig {
  int dim = 128;
  int base_channels = 16;
  int min_samples = 8000;  // 0.5 s at 16 kHz
  void validate() const;
};

// Strided conv stack mean-pooled over time into a fixed-width timbre
// embedding; trained jointly with the rest of the model.
class SpeakerEncoder {
 public:
  SpeakerEncoder(SpeakerEncoderConfig cfg, Rng& rng);

  ad::NodePtr feature_node(ad::NodePtr wave);  // (dim x frames)
  ad::NodePtr forward_node(ad::NodePtr wave);  // (dim x 1) mean pool

  Eigen::MatrixXf feature_map(const Waveform& reference);
  Eigen::VectorXf embed(const Waveform& reference);  // rejects references < min_samples

  int total_stride() const;
  const SpeakerEncoderConfig& config() const { return cfg_; }
  std::vector<ad::Parameter*> parameters();

 private:
  SpeakerEncoderConfig cfg_;
  std::vector<nn::Conv1d> convs_;
};

// Sinusoidal encoding of total duration in seconds followed by a learned
// projection.
class TimingEncoder {
 public:
  TimingEncoder(int dim, Rng& rng);

  ad::NodePtr forward_node(double duration_seconds);
  Eigen::VectorXf embed(double duration_seconds);

  int dim() const { return dim_; }
  std::vector<ad::Parameter*> parameters();

  static Eigen::VectorXf sinusoid(double position, int dim);

 private:
  int dim_ = 0;
  nn::Linear proj_;
};

}  // namespace sqtts
