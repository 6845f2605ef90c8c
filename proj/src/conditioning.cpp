#include "sqtts/conditioning.hpp"

#include <cmath>
#include <stdexcept>

namespace sqtts {

void ConditionBundle::validate() const {
  if (text_tokens.cols() < 1) throw std::invalid_argument("ConditionBundle: need len_text >= 1");
  const Eigen::Index d = text_tokens.rows();
  if (speaker_embedding.size() != d || timing_embedding.size() != d)
    throw std::invalid_argument("ConditionBundle: embedding widths disagree with cond_dim");
  if (!text_tokens.allFinite() || !speaker_embedding.allFinite() || !timing_embedding.allFinite())
    throw std::invalid_argument("ConditionBundle: non-finite entries");
}

Eigen::MatrixXf ConditionBundle::cond_tokens() const {
  validate();
  Eigen::MatrixXf out(text_tokens.rows(), 2 + text_tokens.cols());
  out.col(0) = timing_embedding;
  out.col(1) = speaker_embedding;
  out.rightCols(text_tokens.cols()) = text_tokens;
  return out;
}

ad::NodePtr ConditionNodes::cond_tokens() const {
  return ad::concat_cols({timing_embedding, speaker_embedding, text_tokens});
}

void TextEncoderConfig::validate() const {
  if (dim < 1 || num_layers < 1 || num_heads < 1 || max_len < 1)
    throw std::invalid_argument("TextEncoderConfig: fields must be positive");
  if (dim % num_heads != 0) throw std::invalid_argument("TextEncoderConfig: dim % num_heads != 0");
}

TextEncoder::TextEncoder(TextEncoderConfig cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  tok_ = nn::Embedding("text.tok", cfg_.dim, cfg_.vocab, rng);
  pos_ = ad::Parameter("text.pos", rng.normal_matrix(cfg_.dim, cfg_.max_len, 0.02f));
  for (int l = 0; l < cfg_.num_layers; ++l) {
    const std::string base = "text.block" + std::to_string(l);
    Block blk;
    blk.ln1 = nn::LayerNorm(base + ".ln1", cfg_.dim);
    blk.ln2 = nn::LayerNorm(base + ".ln2", cfg_.dim);
    blk.qkv = nn::Linear(base + ".qkv", cfg_.dim, 3 * cfg_.dim, rng);
    blk.proj = nn::Linear(base + ".proj", cfg_.dim, cfg_.dim, rng);
    blk.fc1 = nn::Linear(base + ".fc1", cfg_.dim, cfg_.mlp_ratio * cfg_.dim, rng);
    blk.fc2 = nn::Linear(base + ".fc2", cfg_.mlp_ratio * cfg_.dim, cfg_.dim, rng);
    blocks_.push_back(std::move(blk));
  }
  final_ln_ = nn::LayerNorm("text.final_ln", cfg_.dim);
}

ad::NodePtr TextEncoder::forward_node(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("encode_text: empty text rejected");
  if (static_cast<int>(text.size()) > cfg_.max_len)
    throw std::invalid_argument("encode_text: text longer than max_len=" + std::to_string(cfg_.max_len));
  std::vector<int> ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(static_cast<int>(c));

  auto x = tok_.forward(ids);
  auto pos = ad::slice_cols(ad::param(pos_), 0, static_cast<Eigen::Index>(ids.size()));
  x = ad::add(std::move(x), std::move(pos));
  for (auto& blk : blocks_) {
    x = ad::add(x, nn::multihead_attention(blk.ln1.forward(x), blk.qkv, blk.proj, cfg_.num_heads, false));
    x = ad::add(x, blk.fc2.forward(ad::gelu(blk.fc1.forward(blk.ln2.forward(x)))));
  }
  return final_ln_.forward(std::move(x));
}

Eigen::MatrixXf TextEncoder::encode(const std::string& text) {
  return forward_node(text)->value;
}

std::vector<ad::Parameter*> TextEncoder::parameters() {
  std::vector<ad::Parameter*> ps;
  tok_.collect(ps);
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
  return ps;
}

void SpeakerEncoderConfig::validate() const {
  if (dim < 1 || base_channels < 1 || min_samples < 1)
    throw std::invalid_argument("SpeakerEncoderConfig: fields must be positive");
}

SpeakerEncoder::SpeakerEncoder(SpeakerEncoderConfig cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  const int c = cfg_.base_channels;
  convs_.emplace_back("spk.c0", 1, c, 11, 5, 10, rng);
  convs_.emplace_back("spk.c1", c, 2 * c, 7, 4, 6, rng);
  convs_.emplace_back("spk.c2", 2 * c, 4 * c, 7, 4, 6, rng);
  convs_.emplace_back("spk.c3", 4 * c, cfg_.dim, 3, 2, 2, rng);
}

int SpeakerEncoder::total_stride() const { return 5 * 4 * 4 * 2; }

ad::NodePtr SpeakerEncoder::feature_node(ad::NodePtr wave) {
  ad::NodePtr x = std::move(wave);
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    x = convs_[i].forward(std::move(x));
    if (i + 1 < convs_.size()) x = ad::elu(std::move(x));
  }
  return x;
}

ad::NodePtr SpeakerEncoder::forward_node(ad::NodePtr wave) {
  return ad::mean_cols(feature_node(std::move(wave)));
}

Eigen::MatrixXf SpeakerEncoder::feature_map(const Waveform& reference) {
  if (reference.size() < cfg_.min_samples)
    throw std::invalid_argument("embed_speaker: reference shorter than " +
                                std::to_string(cfg_.min_samples) + " samples");
  ad::Mat in(1, reference.size());
  in.row(0) = reference.matrix().transpose();
  return feature_node(ad::constant(std::move(in)))->value;
}

Eigen::VectorXf SpeakerEncoder::embed(const Waveform& reference) {
  return feature_map(reference).rowwise().mean();
}

std::vector<ad::Parameter*> SpeakerEncoder::parameters() {
  std::vector<ad::Parameter*> ps;
  for (auto& c : convs_) c.collect(ps);
  return ps;
}

TimingEncoder::TimingEncoder(int dim, Rng& rng) : dim_(dim) {
  if (dim < 2) throw std::invalid_argument("TimingEncoder: dim must be >= 2");
  proj_ = nn::Linear("timing.proj", dim, dim, rng);
}

Eigen::VectorXf TimingEncoder::sinusoid(double position, int dim) {
  Eigen::VectorXf out(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / dim);
    out(2 * i) = static_cast<float>(std::sin(position * freq));
    out(2 * i + 1) = static_cast<float>(std::cos(position * freq));
  }
  if (dim % 2 == 1) out(dim - 1) = 0.0f;
  return out;
}

ad::NodePtr TimingEncoder::forward_node(double duration_seconds) {
  if (!(duration_seconds > 0.0))
    throw std::invalid_argument("embed_timing: duration must be positive");
  // scale to centiseconds so the usual sinusoid frequency bank spreads
  // durations of fractions of a second apart
  auto enc = ad::constant(sinusoid(100.0 * duration_seconds, dim_));
  return proj_.forward(std::move(enc));
}

Eigen::VectorXf TimingEncoder::embed(double duration_seconds) {
  return forward_node(duration_seconds)->value.col(0);
}

std::vector<ad::Parameter*> TimingEncoder::parameters() {
  std::vector<ad::Parameter*> ps;
  proj_.collect(ps);
  return ps;
}

}  // namespace sqtts
