#include "sqtts/codec_training.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sqtts/dsp.hpp"

namespace sqtts {

MultiScaleDiscriminator::MultiScaleDiscriminator(int num_scales, int base_channels, Rng& rng) {
  if (num_scales < 1) throw std::invalid_argument("MultiScaleDiscriminator: need >= 1 scale");
  for (int s = 0; s < num_scales; ++s) {
    const std::string base = "disc.scale" + std::to_string(s);
    const int c = base_channels;
    std::vector<nn::Conv1d> stack;
    stack.emplace_back(base + ".c0", 1, c, 15, 1, 14, rng);
    stack.emplace_back(base + ".c1", c, 2 * c, 17, 4, 16, rng);
    stack.emplace_back(base + ".c2", 2 * c, 4 * c, 17, 4, 16, rng);
    stack.emplace_back(base + ".c3", 4 * c, 4 * c, 5, 1, 4, rng);
    stack.emplace_back(base + ".out", 4 * c, 1, 3, 1, 2, rng);
    stacks_.push_back(std::move(stack));
  }
}

std::vector<ad::NodePtr> MultiScaleDiscriminator::score_nodes(ad::NodePtr wave) {
  std::vector<ad::NodePtr> out;
  ad::NodePtr x = std::move(wave);
  for (std::size_t s = 0; s < stacks_.size(); ++s) {
    if (s > 0) x = ad::avg_pool1d(x, 2);
    ad::NodePtr h = x;
    auto& stack = stacks_[s];
    for (std::size_t i = 0; i + 1 < stack.size(); ++i)
      h = ad::leaky_relu(stack[i].forward(std::move(h)), 0.2f);
    out.push_back(stack.back().forward(std::move(h)));
  }
  return out;
}

std::vector<Eigen::MatrixXf> MultiScaleDiscriminator::scores(const Waveform& x) {
  ad::Mat in(1, x.size());
  in.row(0) = x.matrix().transpose();
  auto nodes = score_nodes(ad::constant(std::move(in)));
  std::vector<Eigen::MatrixXf> maps;
  maps.reserve(nodes.size());
  for (auto& n : nodes) maps.push_back(n->value);
  return maps;
}

std::vector<ad::Parameter*> MultiScaleDiscriminator::parameters() {
  std::vector<ad::Parameter*> ps;
  for (auto& stack : stacks_)
    for (auto& c : stack) c.collect(ps);
  return ps;
}

std::pair<double, double> reconstruction_loss(const Waveform& x, const Waveform& x_hat,
                                              const std::vector<int>& stft_windows) {
  if (x.size() != x_hat.size())
    throw std::invalid_argument("reconstruction_loss: length mismatch " + std::to_string(x.size()) +
                                " vs " + std::to_string(x_hat.size()));
  const double l1 = static_cast<double>((x - x_hat).abs().mean());
  double stft = 0.0;
  for (int win : stft_windows) {
    const Eigen::MatrixXf a = stft_magnitude(x, win, win / 4);
    const Eigen::MatrixXf b = stft_magnitude(x_hat, win, win / 4);
    stft += static_cast<double>((a - b).array().square().mean());
  }
  stft /= static_cast<double>(stft_windows.size());
  return {l1, stft};
}

std::pair<ad::NodePtr, ad::NodePtr> reconstruction_loss_nodes(
    ad::NodePtr x_hat, const Waveform& x, const std::vector<int>& stft_windows) {
  if (x_hat->value.rows() != 1 || x_hat->value.cols() != x.size())
    throw std::invalid_argument("reconstruction_loss_nodes: length mismatch");
  ad::Mat target(1, x.size());
  target.row(0) = x.matrix().transpose();
  auto target_node = ad::constant(std::move(target));
  auto l1 = ad::l1(x_hat, target_node);
  ad::NodePtr stft;
  for (int win : stft_windows) {
    auto term = ad::mse(ad::stft_mag(x_hat, win, win / 4), ad::stft_mag(target_node, win, win / 4));
    stft = stft ? ad::add(std::move(stft), std::move(term)) : std::move(term);
  }
  stft = ad::scale(std::move(stft), 1.0f / static_cast<float>(stft_windows.size()));
  return {std::move(l1), std::move(stft)};
}

std::pair<double, double> adversarial_losses(const std::vector<Eigen::MatrixXf>& real_scores,
                                             const std::vector<Eigen::MatrixXf>& fake_scores) {
  if (real_scores.size() != fake_scores.size())
    throw std::invalid_argument("adversarial_losses: scale count mismatch");
  double adv_d = 0.0, adv_g = 0.0;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    adv_d += static_cast<double>((1.0f - real_scores[i].array()).max(0.0f).mean());
    adv_d += static_cast<double>((1.0f + fake_scores[i].array()).max(0.0f).mean());
    adv_g -= static_cast<double>(fake_scores[i].mean());
  }
  const double n = static_cast<double>(real_scores.size());
  return {adv_g / n, adv_d / n};
}

ad::NodePtr adv_g_node(const std::vector<ad::NodePtr>& fake_scores) {
  ad::NodePtr total;
  for (const auto& f : fake_scores) {
    auto term = ad::scale(ad::mean_all(f), -1.0f);
    total = total ? ad::add(std::move(total), std::move(term)) : std::move(term);
  }
  return ad::scale(std::move(total), 1.0f / static_cast<float>(fake_scores.size()));
}

ad::NodePtr adv_d_node(const std::vector<ad::NodePtr>& real_scores,
                       const std::vector<ad::NodePtr>& fake_scores) {
  ad::NodePtr total;
  for (std::size_t i = 0; i < real_scores.size(); ++i) {
    auto r = ad::mean_all(ad::relu(ad::add_scalar(ad::scale(real_scores[i], -1.0f), 1.0f)));
    auto f = ad::mean_all(ad::relu(ad::add_scalar(fake_scores[i], 1.0f)));
    auto term = ad::add(std::move(r), std::move(f));
    total = total ? ad::add(std::move(total), std::move(term)) : std::move(term);
  }
  return ad::scale(std::move(total), 1.0f / static_cast<float>(real_scores.size()));
}

CodecLossReport train_codec_step(const std::vector<Waveform>& batch, CodecTrainState& state,
                                 const CodecLossWeights& weights) {
  if (batch.empty()) throw std::invalid_argument("train_codec_step: empty batch");
  const Eigen::Index len = batch[0].size();
  for (const auto& w : batch)
    if (w.size() != len) throw std::invalid_argument("train_codec_step: crops must have equal length");

  const bool adversarial = state.step >= weights.adv_warmup_steps;
  const float inv_batch = 1.0f / static_cast<float>(batch.size());
  CodecLossReport report;

  // generator graph
  state.opt_g->zero_grad();
  state.opt_d->zero_grad();
  ad::NodePtr g_loss;
  std::vector<Eigen::MatrixXf> recons(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ad::Mat in(1, len);
    in.row(0) = batch[i].matrix().transpose();
    auto recon = state.model->decode_node(
        state.model->encode_quantized_node(ad::constant(std::move(in))));
    recons[i] = recon->value;
    auto [l1, stft] = reconstruction_loss_nodes(recon, batch[i], state.stft_windows);
    report.l1_time += ad::scalar_value(l1) * inv_batch;
    report.stft_mse += ad::scalar_value(stft) * inv_batch;
    auto item_loss = ad::add(ad::scale(std::move(l1), weights.l1_time),
                             ad::scale(std::move(stft), weights.stft_mse));
    if (adversarial && weights.adv_g != 0.0f) {
      auto adv = adv_g_node(state.disc->score_nodes(recon));
      report.adv_g += ad::scalar_value(adv) * inv_batch;
      item_loss = ad::add(std::move(item_loss), ad::scale(std::move(adv), weights.adv_g));
    }
    g_loss = g_loss ? ad::add(std::move(g_loss), std::move(item_loss)) : std::move(item_loss);
  }
  g_loss = ad::scale(std::move(g_loss), inv_batch);
  report.total_g = ad::scalar_value(g_loss);
  if (!std::isfinite(report.total_g)) {
    report.aborted_non_finite = true;
    std::cerr << "train_codec_step: non-finite generator loss at step " << state.step
              << ", update skipped\n";
    return report;
  }
  ad::backward(g_loss);
  g_loss.reset();

  // discriminator graph on detached reconstructions; its loss is checked
  // before either optimizer runs so an abort leaves all state untouched
  ad::NodePtr d_loss;
  if (adversarial) {
    state.opt_d->zero_grad();  // drop gradients leaked through the adv_g path
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ad::Mat real(1, len);
      real.row(0) = batch[i].matrix().transpose();
      auto real_scores = state.disc->score_nodes(ad::constant(std::move(real)));
      auto fake_scores = state.disc->score_nodes(ad::constant(recons[i]));
      auto term = adv_d_node(real_scores, fake_scores);
      d_loss = d_loss ? ad::add(std::move(d_loss), std::move(term)) : std::move(term);
    }
    d_loss = ad::scale(std::move(d_loss), inv_batch);
    report.adv_d = ad::scalar_value(d_loss);
    if (!std::isfinite(report.adv_d)) {
      report.aborted_non_finite = true;
      std::cerr << "train_codec_step: non-finite discriminator loss at step " << state.step
                << ", update skipped\n";
      return report;
    }
    ad::backward(d_loss);
    d_loss.reset();
  }

  if (state.grad_clip > 0.0f) state.opt_g->clip_grad_norm(state.grad_clip);
  state.opt_g->step();
  if (adversarial) {
    if (state.grad_clip > 0.0f) state.opt_d->clip_grad_norm(state.grad_clip);
    state.opt_d->step();
  }

  ++state.step;
  return report;
}

}  // namespace sqtts
