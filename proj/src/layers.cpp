#include "sqtts/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace sqtts::nn {

Linear::Linear(const std::string& name, int in_dim, int out_dim, Rng& rng)
    : in(in_dim), out(out_dim) {
  if (in_dim < 1 || out_dim < 1) throw std::invalid_argument("Linear: dims must be positive");
  const float bound = 1.0f / std::sqrt(static_cast<float>(in_dim));
  w = Parameter(name + ".w", rng.uniform_matrix(out_dim, in_dim, -bound, bound));
  b = Parameter(name + ".b", rng.uniform_matrix(out_dim, 1, -bound, bound));
}

NodePtr Linear::forward(NodePtr x) {
  return ad::add_colvec(ad::matmul(ad::param(w), std::move(x)), ad::param(b));
}

Conv1d::Conv1d(const std::string& name, int cin_, int cout_, int kernel_, int stride_,
               int pad_left_, Rng& rng, int dilation_)
    : cin(cin_), cout(cout_), kernel(kernel_), stride(stride_), pad_left(pad_left_),
      dilation(dilation_) {
  // Kaiming-style scaling keeps the signal path alive through deep ELU
  // stacks; biases start at zero so codes are input-driven from step one
  const float stddev = std::sqrt(2.0f / (static_cast<float>(cin_) * kernel_));
  w = Parameter(name + ".w", rng.normal_matrix(cout_, cin_ * kernel_, stddev));
  b = Parameter(name + ".b", Mat::Zero(cout_, 1));
}

NodePtr Conv1d::forward(NodePtr x) {
  return ad::conv1d(std::move(x), ad::param(w), ad::param(b), cin, cout, kernel, stride, pad_left,
                    dilation);
}

ConvTranspose1d::ConvTranspose1d(const std::string& name, int cin_, int cout_, int kernel_,
                                 int stride_, int trim_left_, Rng& rng)
    : cin(cin_), cout(cout_), kernel(kernel_), stride(stride_), trim_left(trim_left_) {
  // each output sample receives ~kernel/stride contributions, not kernel
  const float fan = static_cast<float>(cin_) * kernel_ / static_cast<float>(stride_);
  const float stddev = std::sqrt(2.0f / fan);
  w = Parameter(name + ".w", rng.normal_matrix(cout_ * kernel_, cin_, stddev));
  b = Parameter(name + ".b", Mat::Zero(cout_, 1));
}

NodePtr ConvTranspose1d::forward(NodePtr x, Eigen::Index out_len) {
  return ad::conv1d_transpose(std::move(x), ad::param(w), ad::param(b), cin, cout, kernel, stride,
                              trim_left, out_len);
}

LayerNorm::LayerNorm(const std::string& name, int dim) {
  gain = Parameter(name + ".gain", Mat::Ones(dim, 1));
  bias = Parameter(name + ".bias", Mat::Zero(dim, 1));
}

NodePtr LayerNorm::forward(NodePtr x) {
  auto normed = ad::normalize_columns(std::move(x), eps);
  return ad::add_colvec(ad::mul_colvec(std::move(normed), ad::param(gain)), ad::param(bias));
}

Embedding::Embedding(const std::string& name, int dim_, int vocab_, Rng& rng)
    : dim(dim_), vocab(vocab_) {
  table = Parameter(name + ".table", rng.normal_matrix(dim_, vocab_, 0.02f));
}

NodePtr Embedding::forward(const std::vector<int>& ids) {
  return ad::gather_cols(ad::param(table), ids);
}

NodePtr multihead_attention(NodePtr x, Linear& qkv, Linear& proj, int num_heads, bool causal) {
  const Eigen::Index dim = x->value.rows();
  if (dim % num_heads != 0)
    throw std::invalid_argument("multihead_attention: dim not divisible by num_heads");
  const Eigen::Index head_dim = dim / num_heads;
  auto fused = qkv.forward(std::move(x));
  auto q = ad::slice_rows(fused, 0, dim);
  auto k = ad::slice_rows(fused, dim, dim);
  auto v = ad::slice_rows(fused, 2 * dim, dim);
  const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(head_dim));
  std::vector<NodePtr> heads;
  heads.reserve(static_cast<std::size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    auto qh = ad::slice_rows(q, h * head_dim, head_dim);
    auto kh = ad::slice_rows(k, h * head_dim, head_dim);
    auto vh = ad::slice_rows(v, h * head_dim, head_dim);
    auto scores = ad::scale(ad::matmul(ad::transpose(std::move(kh)), std::move(qh)), inv_sqrt);
    auto attn = ad::softmax_columns(std::move(scores), causal);
    heads.push_back(ad::matmul(std::move(vh), std::move(attn)));
  }
  return proj.forward(ad::concat_rows(heads));
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (Parameter* p : params_) {
    if (p->m.size() == 0) p->m = Mat::Zero(p->value.rows(), p->value.cols());
    if (p->v.size() == 0) p->v = Mat::Zero(p->value.rows(), p->value.cols());
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

float Adam::global_grad_norm() const {
  double total = 0.0;
  for (const Parameter* p : params_) total += static_cast<double>(p->grad.squaredNorm());
  return static_cast<float>(std::sqrt(total));
}

void Adam::clip_grad_norm(float max_norm) {
  const float norm = global_grad_norm();
  if (norm <= max_norm || norm == 0.0f) return;
  const float s = max_norm / norm;
  for (Parameter* p : params_) p->grad *= s;
}

void Adam::step() {
  ++t_;
  const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
  const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
  for (Parameter* p : params_) {
    if (p->grad.size() == 0) p->zero_grad();  // untouched by this graph
    p->m = cfg_.beta1 * p->m + (1.0f - cfg_.beta1) * p->grad;
    p->v = (cfg_.beta2 * p->v.array() + (1.0f - cfg_.beta2) * p->grad.array().square()).matrix();
    Mat update = ((p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + cfg_.eps)).matrix();
    if (cfg_.weight_decay > 0.0f) update += cfg_.weight_decay * p->value;
    p->value -= cfg_.lr * update;
  }
}

long total_param_count(const std::vector<Parameter*>& ps) {
  long n = 0;
  for (const Parameter* p : ps) n += static_cast<long>(p->size());
  return n;
}

}  // namespace sqtts::nn
