#pragma once

#include <utility>
#include <vector>

#include "sqtts/audio.hpp"
#include "sqtts/codec.hpp"
#include "sqtts/layers.hpp"

namespace sqtts {

// Waveform discriminator applied at 1x, 2x, 4x, ... average-pooled rates,
// one conv stack per scale.
class MultiScaleDiscriminator {
 public:
  MultiScaleDiscriminator(int num_scales, int base_channels, Rng& rng);

  // one score map node per scale, input is a (1 x samples) node
  std::vector<ad::NodePtr> score_nodes(ad::NodePtr wave);
  std::vector<Eigen::MatrixXf> scores(const Waveform& x);

  int num_scales() const { return static_cast<int>(stacks_.size()); }
  std::vector<ad::Parameter*> parameters();

 private:
  std::vector<std::vector<nn::Conv1d>> stacks_;
};

inline const std::vector<int> kDefaultStftWindows = {512, 1024, 2048};

// L1 in time plus MSE between magnitude spectrograms at several window
// sizes (75% overlap).
std::pair<double, double> reconstruction_loss(const Waveform& x, const Waveform& x_hat,
                                              const std::vector<int>& stft_windows = kDefaultStftWindows);

// node form used inside training graphs; target enters as a constant
std::pair<ad::NodePtr, ad::NodePtr> reconstruction_loss_nodes(
    ad::NodePtr x_hat, const Waveform& x, const std::vector<int>& stft_windows);

// hinge GAN losses: adv_d = mean(relu(1 - real)) + mean(relu(1 + fake)),
// adv_g = -mean(fake), each averaged per score map then across maps
std::pair<double, double> adversarial_losses(const std::vector<Eigen::MatrixXf>& real_scores,
                                             const std::vector<Eigen::MatrixXf>& fake_scores);
ad::NodePtr adv_g_node(const std::vector<ad::NodePtr>& fake_scores);
ad::NodePtr adv_d_node(const std::vector<ad::NodePtr>& real_scores,
                       const std::vector<ad::NodePtr>& fake_scores);

struct CodecLossWeights {
  float l1_time = 1.0f;
  float stft_mse = 1.0f;
  float adv_g = 1.0f;
  int adv_warmup_steps = 1000;  // adversarial terms (G and D) start after this many steps
};

struct CodecLossReport {
  double l1_time = 0.0;
  double stft_mse = 0.0;
  double adv_g = 0.0;
  double adv_d = 0.0;
  double total_g = 0.0;
  bool aborted_non_finite = false;
};

struct CodecTrainState {
  CodecModel* model = nullptr;
  MultiScaleDiscriminator* disc = nullptr;
  nn::Adam* opt_g = nullptr;
  nn::Adam* opt_d = nullptr;
  long step = 0;
  float grad_clip = 1.0f;
  std::vector<int> stft_windows = kDefaultStftWindows;
};

// One generator update and one discriminator update on a batch of
// equal-length crops. A non-finite loss aborts before any state is touched.
CodecLossReport train_codec_step(const std::vector<Waveform>& batch, CodecTrainState& state,
                                 const CodecLossWeights& weights);

}  // namespace sqtts
