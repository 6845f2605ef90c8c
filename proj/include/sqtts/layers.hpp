#pragma once

#include <string>
#include <vector>

#include "sqtts/autodiff.hpp"
#include "sqtts/rng.hpp"

namespace sqtts::nn {

using ad::Mat;
using ad::NodePtr;
using ad::Parameter;

struct Linear {
  Parameter w, b;
  int in = 0, out = 0;

  Linear() = default;
  Linear(const std::string& name, int in_dim, int out_dim, Rng& rng);
  NodePtr forward(NodePtr x);
  void collect(std::vector<Parameter*>& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
  }
};

// Causal 1-D convolution over (channels x time); pad_left defaults to the
// full kernel overhang so stride-1 convs preserve length.
struct Conv1d {
  Parameter w, b;
  int cin = 0, cout = 0, kernel = 1, stride = 1, pad_left = 0, dilation = 1;

  Conv1d() = default;
  Conv1d(const std::string& name, int cin, int cout, int kernel, int stride, int pad_left,
         Rng& rng, int dilation = 1);
  NodePtr forward(NodePtr x);
  void collect(std::vector<Parameter*>& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
  }
};

struct ConvTranspose1d {
  Parameter w, b;
  int cin = 0, cout = 0, kernel = 1, stride = 1, trim_left = 0;

  ConvTranspose1d() = default;
  ConvTranspose1d(const std::string& name, int cin, int cout, int kernel, int stride,
                  int trim_left, Rng& rng);
  NodePtr forward(NodePtr x, Eigen::Index out_len);
  void collect(std::vector<Parameter*>& ps) {
    ps.push_back(&w);
    ps.push_back(&b);
  }
};

// Per-column (per-token) layer norm with learned gain and bias.
struct LayerNorm {
  Parameter gain, bias;
  float eps = 1e-5f;

  LayerNorm() = default;
  LayerNorm(const std::string& name, int dim);
  NodePtr forward(NodePtr x);
  void collect(std::vector<Parameter*>& ps) {
    ps.push_back(&gain);
    ps.push_back(&bias);
  }
};

struct Embedding {
  Parameter table;  // (dim x vocab)
  int dim = 0, vocab = 0;

  Embedding() = default;
  Embedding(const std::string& name, int dim, int vocab, Rng& rng);
  NodePtr forward(const std::vector<int>& ids);
  void collect(std::vector<Parameter*>& ps) { ps.push_back(&table); }
};

// Multi-head self-attention over tokens-as-columns, fused QKV projection.
NodePtr multihead_attention(NodePtr x, Linear& qkv, Linear& proj, int num_heads, bool causal);

struct AdamConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.0f;  // decoupled (AdamW) when nonzero
};

class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Parameter*> params, AdamConfig cfg);

  void zero_grad();
  void step();
  float global_grad_norm() const;
  void clip_grad_norm(float max_norm);

  long step_count() const { return t_; }
  void set_step_count(long t) { t_ = t; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig cfg_;
  long t_ = 0;
};

long total_param_count(const std::vector<Parameter*>& ps);

}  // namespace sqtts::nn
