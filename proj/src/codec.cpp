#include "sqtts/codec.hpp"

#include <algorithm>
#include <stdexcept>

namespace sqtts {

void CodecConfig::validate() const {
  if (sample_rate <= 0) throw std::invalid_argument("CodecConfig: sample_rate must be positive");
  if (strides.empty()) throw std::invalid_argument("CodecConfig: strides must be non-empty");
  for (int s : strides)
    if (s < 1) throw std::invalid_argument("CodecConfig: strides must be >= 1");
  if (base_channels < 1 || max_channels < base_channels)
    throw std::invalid_argument("CodecConfig: bad channel schedule");
  if (kernel < 1) throw std::invalid_argument("CodecConfig: kernel must be >= 1");
  quantizer().validate();
}

CodecModel::CodecModel(CodecConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int n = static_cast<int>(cfg_.strides.size());
  channels_.resize(n);
  int ch = cfg_.base_channels;
  for (int i = 0; i < n; ++i) {
    channels_[i] = ch;
    ch = std::min(2 * ch, cfg_.max_channels);
  }
  const int k = cfg_.kernel;

  // residual pairs: first conv dilated by 3 for pitch-scale context, second
  // conv scaled toward identity so deep stacks start stable
  const auto make_pair = [&](const std::string& base, int c) {
    ResidualPair pair{nn::Conv1d(base + ".res.a", c, c, k, 1, 3 * (k - 1), rng, 3),
                      nn::Conv1d(base + ".res.b", c, c, k, 1, k - 1, rng, 1)};
    pair.b.w.value *= 0.25f;
    return pair;
  };

  enc_pre_ = nn::Conv1d("enc.pre", 1, channels_[0], k, 1, k - 1, rng);
  for (int i = 0; i < n; ++i) {
    const int c = channels_[i];
    const int c_next = i + 1 < n ? channels_[i + 1] : channels_[n - 1];
    const std::string base = "enc.block" + std::to_string(i);
    enc_res_.push_back(make_pair(base, c));
    const int s = cfg_.strides[i];
    enc_down_.push_back(nn::Conv1d(base + ".down", c, c_next, 2 * s, s, s, rng));
  }
  const int c_last = channels_[n - 1];
  enc_proj_ = nn::Conv1d("enc.proj", c_last, cfg_.latent_dim, 1, 1, 0, rng);
  // the quantizer tanh wants O(1) inputs at init: much smaller and every
  // dimension rounds to a constant, much larger and tanh saturates and the
  // straight-through gradient dies
  enc_proj_.w.value *= 0.35f;

  dec_proj_ = nn::Conv1d("dec.proj", cfg_.latent_dim, c_last, 1, 1, 0, rng);
  for (int i = n - 1; i >= 0; --i) {
    const int c_in = i + 1 < n ? channels_[i + 1] : channels_[n - 1];
    const int c_out = channels_[i];
    const int s = cfg_.strides[i];
    const std::string base = "dec.block" + std::to_string(i);
    dec_up_.push_back(nn::ConvTranspose1d(base + ".up", c_in, c_out, 2 * s, s, s, rng));
    dec_res_.push_back(make_pair(base, c_out));
  }
  dec_post_ = nn::Conv1d("dec.post", channels_[0], 1, k, 1, k - 1, rng);
  dec_post_.w.value *= 0.5f;
}

ad::NodePtr CodecModel::res_forward(ResidualPair& pair, ad::NodePtr x) {
  auto h = pair.b.forward(ad::elu(pair.a.forward(ad::elu(x))));
  return ad::add(std::move(x), std::move(h));
}

ad::NodePtr CodecModel::encode_node(ad::NodePtr wave) {
  if (wave->value.rows() != 1) throw std::invalid_argument("encode: expected (1 x samples) input");
  auto x = enc_pre_.forward(std::move(wave));
  for (std::size_t i = 0; i < enc_res_.size(); ++i) {
    x = res_forward(enc_res_[i], std::move(x));
    x = enc_down_[i].forward(ad::elu(std::move(x)));
  }
  return enc_proj_.forward(ad::elu(std::move(x)));
}

ad::NodePtr CodecModel::encode_quantized_node(ad::NodePtr wave) {
  return ad::quantize_ste(encode_node(std::move(wave)), cfg_.sq_scale);
}

ad::NodePtr CodecModel::decode_node(ad::NodePtr latents) {
  if (latents->value.rows() != cfg_.latent_dim)
    throw std::invalid_argument("decode: latent width " + std::to_string(latents->value.rows()) +
                                " does not match configured d=" + std::to_string(cfg_.latent_dim));
  auto x = dec_proj_.forward(std::move(latents));
  const int n = static_cast<int>(cfg_.strides.size());
  for (int j = 0; j < n; ++j) {
    const int s = cfg_.strides[n - 1 - j];  // decoder runs blocks in reverse
    const Eigen::Index out_len = x->value.cols() * s;
    x = dec_up_[static_cast<std::size_t>(j)].forward(ad::elu(std::move(x)), out_len);
    x = res_forward(dec_res_[static_cast<std::size_t>(j)], std::move(x));
  }
  return ad::tanh_op(dec_post_.forward(ad::elu(std::move(x))));
}

LatentGrid CodecModel::encode(const Waveform& w) {
  const int factor = cfg_.downsample_factor();
  if (w.size() < factor)
    throw std::invalid_argument("encode: waveform shorter than one frame (" +
                                std::to_string(w.size()) + " < " + std::to_string(factor) + ")");
  const Eigen::Index frames = w.size() / factor;
  ad::Mat in(1, frames * factor);
  in.row(0) = w.head(frames * factor).matrix().transpose();
  auto out = encode_quantized_node(ad::constant(std::move(in)));
  return out->value.transpose().array();  // (frames x d)
}

Waveform CodecModel::decode(const LatentGrid& q) {
  if (q.cols() != cfg_.latent_dim)
    throw std::invalid_argument("decode: latent width " + std::to_string(q.cols()) +
                                " does not match configured d=" + std::to_string(cfg_.latent_dim));
  if (!is_lattice_valued<float>(q, cfg_.quantizer()))
    throw std::invalid_argument("decode: latents are not on the scalar lattice");
  auto out = decode_node(ad::constant(q.matrix().transpose()));
  return out->value.row(0).transpose().array();
}

long CodecModel::param_count() const {
  long n = 0;
  auto add = [&n](const nn::Parameter& p) { n += static_cast<long>(p.value.size()); };
  auto add_conv = [&](const nn::Conv1d& c) {
    add(c.w);
    add(c.b);
  };
  add_conv(enc_pre_);
  for (const auto& r : enc_res_) {
    add_conv(r.a);
    add_conv(r.b);
  }
  for (const auto& c : enc_down_) add_conv(c);
  add_conv(enc_proj_);
  add_conv(dec_proj_);
  for (const auto& u : dec_up_) {
    add(u.w);
    add(u.b);
  }
  for (const auto& r : dec_res_) {
    add_conv(r.a);
    add_conv(r.b);
  }
  add_conv(dec_post_);
  return n;
}

std::vector<ad::Parameter*> CodecModel::parameters() {
  std::vector<ad::Parameter*> ps;
  enc_pre_.collect(ps);
  for (auto& r : enc_res_) {
    r.a.collect(ps);
    r.b.collect(ps);
  }
  for (auto& c : enc_down_) c.collect(ps);
  enc_proj_.collect(ps);
  dec_proj_.collect(ps);
  for (auto& u : dec_up_) u.collect(ps);
  for (auto& r : dec_res_) {
    r.a.collect(ps);
    r.b.collect(ps);
  }
  dec_post_.collect(ps);
  return ps;
}

}  // namespace sqtts
