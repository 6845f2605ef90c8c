#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace sqtts::ad {

using Mat = Eigen::MatrixXf;

// Named weight matrix with gradient and Adam moment buffers. Moments live
// here so a checkpoint of the parameter set captures optimizer state too.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m, v;

  Parameter() = default;
  Parameter(std::string n, Mat init) : name(std::move(n)), value(std::move(init)) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  Eigen::Index size() const { return value.size(); }
};

// One vertex of the reverse-mode tape. Graphs are built by the free
// functions below and torn down when the root goes out of scope.
struct Node {
  Mat value;
  Mat grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
  Parameter* param = nullptr;
};

using NodePtr = std::shared_ptr<Node>;

NodePtr constant(Mat v);
NodePtr input(Mat v);           // grad-tracked leaf (for gradient inspection)
NodePtr param(Parameter& p);    // leaf that accumulates into p.grad

void backward(const NodePtr& root);  // seeds root with ones, reverse sweep

// elementwise and broadcast arithmetic
NodePtr add(NodePtr a, NodePtr b);
NodePtr sub(NodePtr a, NodePtr b);
NodePtr mul(NodePtr a, NodePtr b);
NodePtr scale(NodePtr a, float s);
NodePtr add_scalar(NodePtr a, float c);
NodePtr add_colvec(NodePtr a, NodePtr v);  // v is (rows x 1), broadcast over columns
NodePtr mul_colvec(NodePtr a, NodePtr v);

// matrix ops
NodePtr matmul(NodePtr a, NodePtr b);
NodePtr transpose(NodePtr a);
NodePtr slice_cols(NodePtr a, Eigen::Index start, Eigen::Index len);
NodePtr slice_rows(NodePtr a, Eigen::Index start, Eigen::Index len);
NodePtr concat_cols(const std::vector<NodePtr>& parts);
NodePtr concat_rows(const std::vector<NodePtr>& parts);
NodePtr gather_cols(NodePtr table, const std::vector<int>& ids);
NodePtr mean_cols(NodePtr a);  // (rows x 1) mean over columns

// nonlinearities
NodePtr tanh_op(NodePtr a);
NodePtr sigmoid(NodePtr a);
NodePtr relu(NodePtr a);
NodePtr leaky_relu(NodePtr a, float slope);
NodePtr elu(NodePtr a);
NodePtr gelu(NodePtr a);

// scalar quantizer with straight-through backward: forward emits
// round(tanh(x) * S) / S, backward passes the tanh gradient unchanged.
NodePtr quantize_ste(NodePtr a, int scale);

NodePtr softmax_columns(NodePtr a, bool causal_mask = false);
NodePtr normalize_columns(NodePtr a, float eps);  // per-column standardization

// reductions and losses (all 1x1 outputs)
NodePtr sum_all(NodePtr a);
NodePtr mean_all(NodePtr a);
NodePtr mse(NodePtr a, NodePtr b);
NodePtr l1(NodePtr a, NodePtr b);

// sequence ops over (channels x time) layouts
NodePtr conv1d(NodePtr x, NodePtr w, NodePtr b, int cin, int cout, int kernel, int stride,
               int pad_left, int dilation = 1);
NodePtr conv1d_transpose(NodePtr x, NodePtr w, NodePtr b, int cin, int cout, int kernel,
                         int stride, int trim_left, Eigen::Index out_len);
NodePtr avg_pool1d(NodePtr x, int factor);

// magnitude spectrogram of a (1 x L) waveform node, differentiable
NodePtr stft_mag(NodePtr x, int win, int hop);

inline float scalar_value(const NodePtr& n) { return n->value(0, 0); }

}  // namespace sqtts::ad
