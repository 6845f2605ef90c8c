#include "sqtts/autodiff.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "sqtts/dsp.hpp"

namespace sqtts::ad {

namespace {

void ensure_grad(Node& n) {
  if (n.grad.size() == 0) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
}

template <typename Expr>
void accum(const NodePtr& p, const Expr& g) {
  if (!p->requires_grad) return;
  ensure_grad(*p);
  p->grad += g;
}

NodePtr make_node(Mat value, std::vector<NodePtr> parents, std::function<void(Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad;
  n->requires_grad = needs;
  if (needs) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(fn);
  }
  return n;
}

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->value.rows() != b->value.rows() || a->value.cols() != b->value.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a->value.rows()) + "x" + std::to_string(a->value.cols()) +
                                " vs " + std::to_string(b->value.rows()) + "x" +
                                std::to_string(b->value.cols()));
}

}  // namespace

NodePtr constant(Mat v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  return n;
}

NodePtr input(Mat v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = true;
  return n;
}

NodePtr param(Parameter& p) {
  auto n = std::make_shared<Node>();
  n->value = p.value;
  n->requires_grad = true;
  n->param = &p;
  n->backward_fn = [](Node& self) {
    if (self.param->grad.size() == 0)
      self.param->grad = Mat::Zero(self.param->value.rows(), self.param->value.cols());
    self.param->grad += self.grad;
  };
  return n;
}

void backward(const NodePtr& root) {
  // iterative post-order over the parent DAG
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.get(), 0);
  seen.insert(root.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* parent = node->parents[idx].get();
      ++idx;
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad = Mat::Ones(root->value.rows(), root->value.cols());
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
}

NodePtr add(NodePtr a, NodePtr b) {
  check_same_shape(a, b, "add");
  return make_node(a->value + b->value, {a, b}, [a, b](Node& n) {
    accum(a, n.grad);
    accum(b, n.grad);
  });
}

NodePtr sub(NodePtr a, NodePtr b) {
  check_same_shape(a, b, "sub");
  return make_node(a->value - b->value, {a, b}, [a, b](Node& n) {
    accum(a, n.grad);
    accum(b, -n.grad);
  });
}

NodePtr mul(NodePtr a, NodePtr b) {
  check_same_shape(a, b, "mul");
  return make_node(a->value.cwiseProduct(b->value), {a, b}, [a, b](Node& n) {
    accum(a, n.grad.cwiseProduct(b->value));
    accum(b, n.grad.cwiseProduct(a->value));
  });
}

NodePtr scale(NodePtr a, float s) {
  return make_node(a->value * s, {a}, [a, s](Node& n) { accum(a, n.grad * s); });
}

NodePtr add_scalar(NodePtr a, float c) {
  return make_node((a->value.array() + c).matrix(), {a}, [a](Node& n) { accum(a, n.grad); });
}

NodePtr add_colvec(NodePtr a, NodePtr v) {
  if (v->value.cols() != 1 || v->value.rows() != a->value.rows())
    throw std::invalid_argument("add_colvec: expected column vector matching rows");
  return make_node(a->value.colwise() + Eigen::VectorXf(v->value.col(0)), {a, v}, [a, v](Node& n) {
    accum(a, n.grad);
    accum(v, n.grad.rowwise().sum());
  });
}

NodePtr mul_colvec(NodePtr a, NodePtr v) {
  if (v->value.cols() != 1 || v->value.rows() != a->value.rows())
    throw std::invalid_argument("mul_colvec: expected column vector matching rows");
  Mat out = a->value.array().colwise() * v->value.col(0).array();
  return make_node(std::move(out), {a, v}, [a, v](Node& n) {
    accum(a, (n.grad.array().colwise() * v->value.col(0).array()).matrix());
    accum(v, n.grad.cwiseProduct(a->value).rowwise().sum());
  });
}

NodePtr matmul(NodePtr a, NodePtr b) {
  if (a->value.cols() != b->value.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree");
  return make_node(a->value * b->value, {a, b}, [a, b](Node& n) {
    accum(a, n.grad * b->value.transpose());
    accum(b, a->value.transpose() * n.grad);
  });
}

NodePtr transpose(NodePtr a) {
  return make_node(a->value.transpose(), {a}, [a](Node& n) { accum(a, n.grad.transpose()); });
}

NodePtr slice_cols(NodePtr a, Eigen::Index start, Eigen::Index len) {
  if (start < 0 || len < 0 || start + len > a->value.cols())
    throw std::invalid_argument("slice_cols: range out of bounds");
  return make_node(a->value.middleCols(start, len), {a}, [a, start, len](Node& n) {
    if (!a->requires_grad) return;
    ensure_grad(*a);
    a->grad.middleCols(start, len) += n.grad;
  });
}

NodePtr slice_rows(NodePtr a, Eigen::Index start, Eigen::Index len) {
  if (start < 0 || len < 0 || start + len > a->value.rows())
    throw std::invalid_argument("slice_rows: range out of bounds");
  return make_node(a->value.middleRows(start, len), {a}, [a, start, len](Node& n) {
    if (!a->requires_grad) return;
    ensure_grad(*a);
    a->grad.middleRows(start, len) += n.grad;
  });
}

NodePtr concat_cols(const std::vector<NodePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  Eigen::Index rows = parts[0]->value.rows(), cols = 0;
  for (const auto& p : parts) {
    if (p->value.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p->value.cols();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p->value.cols()) = p->value;
    at += p->value.cols();
  }
  auto parts_copy = parts;
  return make_node(std::move(out), parts, [parts_copy](Node& n) {
    Eigen::Index at = 0;
    for (const auto& p : parts_copy) {
      const Eigen::Index w = p->value.cols();
      accum(p, n.grad.middleCols(at, w));
      at += w;
    }
  });
}

NodePtr concat_rows(const std::vector<NodePtr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  Eigen::Index cols = parts[0]->value.cols(), rows = 0;
  for (const auto& p : parts) {
    if (p->value.cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
    rows += p->value.rows();
  }
  Mat out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p->value.rows()) = p->value;
    at += p->value.rows();
  }
  auto parts_copy = parts;
  return make_node(std::move(out), parts, [parts_copy](Node& n) {
    Eigen::Index at = 0;
    for (const auto& p : parts_copy) {
      const Eigen::Index h = p->value.rows();
      accum(p, n.grad.middleRows(at, h));
      at += h;
    }
  });
}

NodePtr gather_cols(NodePtr table, const std::vector<int>& ids) {
  const Eigen::Index cols = table->value.cols();
  Mat out(table->value.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= cols) throw std::invalid_argument("gather_cols: id out of range");
    out.col(static_cast<Eigen::Index>(i)) = table->value.col(ids[i]);
  }
  return make_node(std::move(out), {table}, [table, ids](Node& n) {
    if (!table->requires_grad) return;
    ensure_grad(*table);
    for (std::size_t i = 0; i < ids.size(); ++i)
      table->grad.col(ids[i]) += n.grad.col(static_cast<Eigen::Index>(i));
  });
}

NodePtr mean_cols(NodePtr a) {
  const float inv = 1.0f / static_cast<float>(a->value.cols());
  Mat out = a->value.rowwise().mean();
  return make_node(std::move(out), {a}, [a, inv](Node& n) {
    accum(a, (n.grad * inv).replicate(1, a->value.cols()));
  });
}

NodePtr tanh_op(NodePtr a) {
  Mat t = a->value.array().tanh().matrix();
  return make_node(t, {a}, [a](Node& n) {
    accum(a, ((1.0f - n.value.array().square()) * n.grad.array()).matrix());
  });
}

NodePtr sigmoid(NodePtr a) {
  Mat s = (1.0f / (1.0f + (-a->value.array()).exp())).matrix();
  return make_node(std::move(s), {a}, [a](Node& n) {
    accum(a, (n.value.array() * (1.0f - n.value.array()) * n.grad.array()).matrix());
  });
}

NodePtr relu(NodePtr a) {
  Mat out = a->value.array().max(0.0f).matrix();
  return make_node(std::move(out), {a}, [a](Node& n) {
    accum(a, ((a->value.array() > 0.0f).cast<float>() * n.grad.array()).matrix());
  });
}

NodePtr leaky_relu(NodePtr a, float slope) {
  Mat out = a->value.array().max(a->value.array() * slope).matrix();
  return make_node(std::move(out), {a, }, [a, slope](Node& n) {
    Eigen::ArrayXXf d = (a->value.array() > 0.0f).cast<float>();
    accum(a, ((d + (1.0f - d) * slope) * n.grad.array()).matrix());
  });
}

NodePtr elu(NodePtr a) {
  Eigen::ArrayXXf x = a->value.array();
  Mat out = (x > 0.0f).select(x, x.exp() - 1.0f).matrix();
  return make_node(std::move(out), {a}, [a](Node& n) {
    Eigen::ArrayXXf x = a->value.array();
    Eigen::ArrayXXf d = (x > 0.0f).select(Eigen::ArrayXXf::Ones(x.rows(), x.cols()),
                                          n.value.array() + 1.0f);
    accum(a, (d * n.grad.array()).matrix());
  });
}

NodePtr gelu(NodePtr a) {
  static constexpr float kC = 0.7978845608028654f;  // sqrt(2/pi)
  static constexpr float kA = 0.044715f;
  Eigen::ArrayXXf x = a->value.array();
  auto t = std::make_shared<Eigen::ArrayXXf>((kC * (x + kA * x.cube())).tanh());
  Mat out = (0.5f * x * (1.0f + *t)).matrix();
  return make_node(std::move(out), {a}, [a, t](Node& n) {
    Eigen::ArrayXXf x = a->value.array();
    Eigen::ArrayXXf d = 0.5f * (1.0f + *t) + 0.5f * x * (1.0f - t->square()) * kC * (1.0f + 3.0f * kA * x.square());
    accum(a, (d * n.grad.array()).matrix());
  });
}

NodePtr quantize_ste(NodePtr a, int scale) {
  if (scale < 1) throw std::invalid_argument("quantize_ste: scale must be >= 1");
  const float s = static_cast<float>(scale);
  auto t = std::make_shared<Eigen::ArrayXXf>(a->value.array().tanh());
  Mat out = ((*t * s).unaryExpr([](float v) { return std::nearbyintf(v); }) / s).matrix();
  return make_node(std::move(out), {a}, [a, t](Node& n) {
    // straight-through: rounding is identity in the backward pass, so the
    // incoming gradient is scaled by the tanh derivative only
    accum(a, ((1.0f - t->square()) * n.grad.array()).matrix());
  });
}

NodePtr softmax_columns(NodePtr a, bool causal_mask) {
  Mat z = a->value;
  if (causal_mask) {
    if (z.rows() != z.cols())
      throw std::invalid_argument("softmax_columns: causal mask needs a square score matrix");
    for (Eigen::Index j = 0; j < z.cols(); ++j)
      for (Eigen::Index i = j + 1; i < z.rows(); ++i) z(i, j) = -std::numeric_limits<float>::infinity();
  }
  Mat out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const float mx = z.col(j).maxCoeff();
    Eigen::ArrayXf e = (z.col(j).array() - mx).exp();
    out.col(j) = (e / e.sum()).matrix();
  }
  return make_node(std::move(out), {a}, [a, causal_mask](Node& n) {
    Mat g(n.value.rows(), n.value.cols());
    for (Eigen::Index j = 0; j < n.value.cols(); ++j) {
      const Eigen::ArrayXf y = n.value.col(j).array();
      const Eigen::ArrayXf dy = n.grad.col(j).array();
      const float dot = (y * dy).sum();
      g.col(j) = (y * (dy - dot)).matrix();
    }
    if (causal_mask)
      for (Eigen::Index j = 0; j < g.cols(); ++j)
        for (Eigen::Index i = j + 1; i < g.rows(); ++i) g(i, j) = 0.0f;
    accum(a, g);
  });
}

NodePtr normalize_columns(NodePtr a, float eps) {
  const Eigen::Index rows = a->value.rows(), cols = a->value.cols();
  Mat out(rows, cols);
  auto inv_std = std::make_shared<Eigen::ArrayXf>(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const float mu = a->value.col(j).mean();
    const Eigen::ArrayXf centered = a->value.col(j).array() - mu;
    const float var = centered.square().mean();
    const float is = 1.0f / std::sqrt(var + eps);
    (*inv_std)(j) = is;
    out.col(j) = (centered * is).matrix();
  }
  return make_node(std::move(out), {a}, [a, inv_std](Node& n) {
    Mat g(n.value.rows(), n.value.cols());
    for (Eigen::Index j = 0; j < n.value.cols(); ++j) {
      const Eigen::ArrayXf y = n.value.col(j).array();
      const Eigen::ArrayXf dy = n.grad.col(j).array();
      const float m_dy = dy.mean();
      const float m_ydy = (y * dy).mean();
      g.col(j) = ((dy - m_dy - y * m_ydy) * (*inv_std)(j)).matrix();
    }
    accum(a, g);
  });
}

NodePtr sum_all(NodePtr a) {
  Mat out(1, 1);
  out(0, 0) = a->value.sum();
  return make_node(std::move(out), {a}, [a](Node& n) {
    accum(a, Mat::Constant(a->value.rows(), a->value.cols(), n.grad(0, 0)));
  });
}

NodePtr mean_all(NodePtr a) {
  Mat out(1, 1);
  out(0, 0) = a->value.mean();
  const float inv = 1.0f / static_cast<float>(a->value.size());
  return make_node(std::move(out), {a}, [a, inv](Node& n) {
    accum(a, Mat::Constant(a->value.rows(), a->value.cols(), n.grad(0, 0) * inv));
  });
}

NodePtr mse(NodePtr a, NodePtr b) {
  check_same_shape(a, b, "mse");
  Mat diff = a->value - b->value;
  Mat out(1, 1);
  out(0, 0) = diff.array().square().mean();
  const float inv = 2.0f / static_cast<float>(diff.size());
  auto d = std::make_shared<Mat>(std::move(diff));
  return make_node(std::move(out), {a, b}, [a, b, d, inv](Node& n) {
    const float g = n.grad(0, 0) * inv;
    accum(a, (*d) * g);
    accum(b, (*d) * (-g));
  });
}

NodePtr l1(NodePtr a, NodePtr b) {
  check_same_shape(a, b, "l1");
  Mat diff = a->value - b->value;
  Mat out(1, 1);
  out(0, 0) = diff.array().abs().mean();
  const float inv = 1.0f / static_cast<float>(diff.size());
  auto d = std::make_shared<Mat>(std::move(diff));
  return make_node(std::move(out), {a, b}, [a, b, d, inv](Node& n) {
    const float g = n.grad(0, 0) * inv;
    Mat s = d->array().sign().matrix() * g;
    accum(a, s);
    accum(b, -s);
  });
}

NodePtr conv1d(NodePtr x, NodePtr w, NodePtr b, int cin, int cout, int kernel, int stride,
               int pad_left, int dilation) {
  if (x->value.rows() != cin) throw std::invalid_argument("conv1d: input channel mismatch");
  if (w->value.rows() != cout || w->value.cols() != static_cast<Eigen::Index>(cin) * kernel)
    throw std::invalid_argument("conv1d: weight shape mismatch");
  if (dilation < 1) throw std::invalid_argument("conv1d: dilation must be >= 1");
  const Eigen::Index len = x->value.cols();
  const Eigen::Index span = static_cast<Eigen::Index>(dilation) * (kernel - 1) + 1;
  const Eigen::Index out_len = (len + pad_left - span) / stride + 1;
  if (out_len < 1) throw std::invalid_argument("conv1d: input too short for kernel");

  auto col = std::make_shared<Mat>(Mat::Zero(static_cast<Eigen::Index>(cin) * kernel, out_len));
  for (Eigen::Index t = 0; t < out_len; ++t) {
    const Eigen::Index base = t * stride - pad_left;
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index src = base + static_cast<Eigen::Index>(j) * dilation;
      if (src < 0 || src >= len) continue;
      for (int ci = 0; ci < cin; ++ci)
        (*col)(static_cast<Eigen::Index>(ci) * kernel + j, t) = x->value(ci, src);
    }
  }
  Mat out = w->value * (*col);
  out.colwise() += Eigen::VectorXf(b->value.col(0));
  return make_node(std::move(out), {x, w, b},
                   [x, w, b, col, cin, kernel, stride, pad_left, dilation](Node& n) {
                     accum(w, n.grad * col->transpose());
                     accum(b, n.grad.rowwise().sum());
                     if (!x->requires_grad) return;
                     Mat dcol = w->value.transpose() * n.grad;
                     ensure_grad(*x);
                     const Eigen::Index len = x->value.cols();
                     for (Eigen::Index t = 0; t < n.value.cols(); ++t) {
                       const Eigen::Index base = t * stride - pad_left;
                       for (int j = 0; j < kernel; ++j) {
                         const Eigen::Index src = base + static_cast<Eigen::Index>(j) * dilation;
                         if (src < 0 || src >= len) continue;
                         for (int ci = 0; ci < cin; ++ci)
                           x->grad(ci, src) += dcol(static_cast<Eigen::Index>(ci) * kernel + j, t);
                       }
                     }
                   });
}

NodePtr conv1d_transpose(NodePtr x, NodePtr w, NodePtr b, int cin, int cout, int kernel,
                         int stride, int trim_left, Eigen::Index out_len) {
  if (x->value.rows() != cin) throw std::invalid_argument("conv1d_transpose: input channel mismatch");
  if (w->value.rows() != static_cast<Eigen::Index>(cout) * kernel || w->value.cols() != cin)
    throw std::invalid_argument("conv1d_transpose: weight shape mismatch");
  const Eigen::Index len = x->value.cols();

  Mat spread = w->value * x->value;  // (cout*kernel) x len
  Mat out = Mat::Zero(cout, out_len);
  for (Eigen::Index t = 0; t < len; ++t)
    for (int j = 0; j < kernel; ++j) {
      const Eigen::Index dst = t * stride + j - trim_left;
      if (dst < 0 || dst >= out_len) continue;
      out.col(dst) += spread.block(static_cast<Eigen::Index>(j) * cout, t, cout, 1);
    }
  out.colwise() += Eigen::VectorXf(b->value.col(0));
  return make_node(std::move(out), {x, w, b},
                   [x, w, b, cin, cout, kernel, stride, trim_left](Node& n) {
                     const Eigen::Index len = x->value.cols();
                     const Eigen::Index out_len = n.value.cols();
                     Mat dspread = Mat::Zero(static_cast<Eigen::Index>(cout) * kernel, len);
                     for (Eigen::Index t = 0; t < len; ++t)
                       for (int j = 0; j < kernel; ++j) {
                         const Eigen::Index dst = t * stride + j - trim_left;
                         if (dst < 0 || dst >= out_len) continue;
                         dspread.block(static_cast<Eigen::Index>(j) * cout, t, cout, 1) += n.grad.col(dst);
                       }
                     accum(w, dspread * x->value.transpose());
                     accum(b, n.grad.rowwise().sum());
                     accum(x, w->value.transpose() * dspread);
                   });
}

NodePtr avg_pool1d(NodePtr x, int factor) {
  if (factor < 1) throw std::invalid_argument("avg_pool1d: factor must be >= 1");
  const Eigen::Index out_len = x->value.cols() / factor;
  if (out_len < 1) throw std::invalid_argument("avg_pool1d: input shorter than pooling factor");
  Mat out(x->value.rows(), out_len);
  for (Eigen::Index t = 0; t < out_len; ++t)
    out.col(t) = x->value.middleCols(t * factor, factor).rowwise().mean();
  const float inv = 1.0f / static_cast<float>(factor);
  return make_node(std::move(out), {x}, [x, factor, inv](Node& n) {
    if (!x->requires_grad) return;
    ensure_grad(*x);
    for (Eigen::Index t = 0; t < n.value.cols(); ++t)
      x->grad.middleCols(t * factor, factor).colwise() += Eigen::VectorXf(n.grad.col(t) * inv);
  });
}

NodePtr stft_mag(NodePtr x, int win, int hop) {
  if (x->value.rows() != 1) throw std::invalid_argument("stft_mag: expected a (1 x L) waveform node");
  if ((win & (win - 1)) != 0) throw std::invalid_argument("stft_mag: window must be a power of two");
  const Eigen::Index len = x->value.cols();
  const Eigen::Index frames = len >= win ? 1 + (len - win) / hop : 1;
  const int bins = win / 2 + 1;
  const Eigen::ArrayXf window = hann_window(win);
  const double norm = 2.0 / static_cast<double>(window.sum());

  auto spectra = std::make_shared<std::vector<std::vector<std::complex<double>>>>();
  spectra->reserve(static_cast<std::size_t>(frames));
  Mat out(bins, frames);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(win));
  for (Eigen::Index f = 0; f < frames; ++f) {
    const Eigen::Index start = f * hop;
    for (int i = 0; i < win; ++i) {
      const Eigen::Index s = start + i;
      const double v = s < len ? static_cast<double>(x->value(0, s)) * window(i) : 0.0;
      buf[static_cast<std::size_t>(i)] = {v, 0.0};
    }
    fft_inplace(buf, false);
    spectra->push_back(buf);
    for (int k = 0; k < bins; ++k)
      out(k, f) = static_cast<float>(norm * std::abs(buf[static_cast<std::size_t>(k)]));
  }

  return make_node(std::move(out), {x}, [x, spectra, win, hop, bins, norm](Node& n) {
    if (!x->requires_grad) return;
    ensure_grad(*x);
    const Eigen::ArrayXf window = hann_window(win);
    const Eigen::Index len = x->value.cols();
    std::vector<std::complex<double>> ghat(static_cast<std::size_t>(win));
    for (Eigen::Index f = 0; f < n.value.cols(); ++f) {
      const auto& spec = (*spectra)[static_cast<std::size_t>(f)];
      std::fill(ghat.begin(), ghat.end(), std::complex<double>(0.0, 0.0));
      for (int k = 0; k < bins; ++k) {
        const std::complex<double> X = spec[static_cast<std::size_t>(k)];
        const double mag = std::abs(X);
        if (mag < 1e-20) continue;
        const double g = norm * static_cast<double>(n.grad(k, f)) / mag;
        // interior bins are mirrored, halve them so the hermitian sum counts once
        const double w = (k == 0 || k == win / 2) ? 1.0 : 0.5;
        ghat[static_cast<std::size_t>(k)] = g * w * X;
      }
      for (int k = 1; k < win / 2; ++k)
        ghat[static_cast<std::size_t>(win - k)] = std::conj(ghat[static_cast<std::size_t>(k)]);
      fft_inplace(ghat, true);
      const Eigen::Index start = f * hop;
      for (int i = 0; i < win; ++i) {
        const Eigen::Index s = start + i;
        if (s >= len) break;
        x->grad(0, s) += static_cast<float>(ghat[static_cast<std::size_t>(i)].real()) * window(i);
      }
    }
  });
}

}  // namespace sqtts::ad
