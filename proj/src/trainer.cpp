#include "sqtts/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace sqtts {

namespace fs = std::filesystem;

void store_parameters(Checkpoint& ckpt, const std::vector<ad::Parameter*>& params,
                      const std::string& prefix, bool with_optimizer_state) {
  for (const ad::Parameter* p : params) {
    ckpt.arrays[prefix + "p." + p->name] = p->value;
    if (with_optimizer_state) {
      ckpt.arrays[prefix + "m." + p->name] = p->m;
      ckpt.arrays[prefix + "v." + p->name] = p->v;
    }
  }
}

namespace {

const Eigen::MatrixXf& lookup_array(const Checkpoint& ckpt, const std::string& key,
                                    const ad::Parameter& p) {
  auto it = ckpt.arrays.find(key);
  if (it == ckpt.arrays.end())
    throw std::runtime_error("checkpoint: missing array " + key);
  if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols())
    throw std::runtime_error("checkpoint: shape mismatch for " + key + ": stored " +
                             std::to_string(it->second.rows()) + "x" +
                             std::to_string(it->second.cols()) + ", model expects " +
                             std::to_string(p.value.rows()) + "x" +
                             std::to_string(p.value.cols()));
  return it->second;
}

}  // namespace

void restore_parameters(const Checkpoint& ckpt, const std::vector<ad::Parameter*>& params,
                        const std::string& prefix, bool with_optimizer_state) {
  for (ad::Parameter* p : params) {
    p->value = lookup_array(ckpt, prefix + "p." + p->name, *p);
    if (with_optimizer_state) {
      p->m = lookup_array(ckpt, prefix + "m." + p->name, *p);
      p->v = lookup_array(ckpt, prefix + "v." + p->name, *p);
    }
  }
}

CodecTrainer::CodecTrainer(const RunConfig& cfg, std::vector<Waveform> clips)
    : cfg_(cfg), clips_(std::move(clips)), data_rng_(cfg.seed) {
  cfg_.validate();
  if (clips_.empty()) throw std::invalid_argument("CodecTrainer: no training clips");
  // crops must cover whole frames or the decoder length cannot match
  const int factor = cfg_.codec.downsample_factor();
  cfg_.codec_training.crop_samples =
      std::max(factor, cfg_.codec_training.crop_samples / factor * factor);
  for (const auto& c : clips_)
    if (c.size() < cfg_.codec.downsample_factor())
      throw std::invalid_argument("CodecTrainer: clip shorter than one frame");

  Rng init_rng(cfg_.seed);
  model_ = std::make_unique<CodecModel>(cfg_.codec, init_rng);
  disc_ = std::make_unique<MultiScaleDiscriminator>(cfg_.codec_training.disc_scales,
                                                    cfg_.codec_training.disc_base_channels,
                                                    init_rng);
  // Adam per the training recipe: codec and discriminator share the lr.
  // The wide eps keeps updates bounded late in training when second moments
  // shrink; with the stock 1e-8 the toy runs blow up around step ~1300.
  nn::AdamConfig adam;
  adam.lr = cfg_.codec_training.lr;
  adam.eps = 1e-5f;
  opt_g_ = std::make_unique<nn::Adam>(model_->parameters(), adam);
  opt_d_ = std::make_unique<nn::Adam>(disc_->parameters(), adam);

  state_.model = model_.get();
  state_.disc = disc_.get();
  state_.opt_g = opt_g_.get();
  state_.opt_d = opt_d_.get();
  state_.grad_clip = cfg_.codec_training.grad_clip;
}

std::vector<Waveform> CodecTrainer::make_batch() {
  const int crop = cfg_.codec_training.crop_samples;
  std::vector<Waveform> batch;
  batch.reserve(static_cast<std::size_t>(cfg_.codec_training.batch_size));
  for (int i = 0; i < cfg_.codec_training.batch_size; ++i) {
    const auto& clip = clips_[static_cast<std::size_t>(data_rng_.uniform_int(
        static_cast<std::int64_t>(clips_.size())))];
    Waveform w = Waveform::Zero(crop);
    if (clip.size() <= crop) {
      w.head(clip.size()) = clip;
    } else {
      const auto offset = data_rng_.uniform_int(clip.size() - crop + 1);
      w = clip.segment(offset, crop);
    }
    batch.push_back(std::move(w));
  }
  return batch;
}

CodecLossReport CodecTrainer::run_step() {
  const long step = state_.step;
  auto batch = make_batch();
  auto report = train_codec_step(batch, state_, cfg_.codec_training.weights);
  history_.push_back(report);
  if (!csv_path_.empty()) {
    std::ofstream csv(csv_path_, std::ios::app);
    if (csv)
      csv << step << "," << report.l1_time << "," << report.stft_mse << ","
          << report.adv_g << "," << report.adv_d << "\n";
  }
  return report;
}

void CodecTrainer::set_csv_path(const std::string& path) {
  csv_path_ = path;
  if (csv_path_.empty()) return;
  if (!fs::exists(csv_path_)) {
    std::ofstream csv(csv_path_);
    if (csv) csv << "step,l1_time,stft_mse,adv_g,adv_d\n";
  }
}

void CodecTrainer::run() {
  while (state_.step < cfg_.codec_training.steps) {
    const long step_before = state_.step;
    auto report = run_step();
    if (report.aborted_non_finite) {
      std::cerr << "codec training: aborting run at step " << step_before << "\n";
      break;
    }
    if (cfg_.codec_training.log_every > 0 && state_.step % cfg_.codec_training.log_every == 0)
      std::cout << "step " << state_.step << " l1=" << report.l1_time
                << " stft=" << report.stft_mse << " adv_g=" << report.adv_g
                << " adv_d=" << report.adv_d << "\n";
  }
}

void CodecTrainer::save(const std::string& ckpt_path) {
  Checkpoint ckpt;
  ckpt.config = to_json(cfg_);
  ckpt.config["kind"] = "codec";
  ckpt.config["state"] = {{"step", state_.step},
                          {"adam_g_t", opt_g_->step_count()},
                          {"adam_d_t", opt_d_->step_count()}};
  store_parameters(ckpt, model_->parameters(), "g.", true);
  store_parameters(ckpt, disc_->parameters(), "d.", true);
  ckpt.strings["data_rng"] = data_rng_.serialize();
  save_checkpoint(ckpt_path, ckpt);
}

namespace {

// model-defining sections must match to reuse weights; trainer schedules
// (steps, logging) may legitimately differ when extending a run
void require_sections_match(const nlohmann::json& stored, const nlohmann::json& current,
                            std::initializer_list<const char*> sections,
                            const std::string& context) {
  std::string diff;
  for (const char* key : sections)
    diff += config_diff(stored.contains(key) ? stored[key] : nlohmann::json(),
                        current.contains(key) ? current[key] : nlohmann::json());
  if (!diff.empty())
    throw std::runtime_error(context + ": checkpoint/config mismatch:\n" + diff);
}

}  // namespace

void CodecTrainer::resume_from(const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!ckpt.config.contains("kind") || ckpt.config["kind"] != "codec")
    throw std::runtime_error("resume: " + ckpt_path + " is not a codec checkpoint");
  require_sections_match(ckpt.config, to_json(cfg_), {"codec"}, "resume");

  restore_parameters(ckpt, model_->parameters(), "g.", true);
  restore_parameters(ckpt, disc_->parameters(), "d.", true);
  state_.step = ckpt.config["state"]["step"].get<long>();
  opt_g_->set_step_count(ckpt.config["state"]["adam_g_t"].get<long>());
  opt_d_->set_step_count(ckpt.config["state"]["adam_d_t"].get<long>());
  data_rng_.deserialize(ckpt.strings.at("data_rng"));
}

Waveform CodecTrainer::reconstruct(const Waveform& clip) {
  return model_->decode(model_->encode(clip));
}

LoadedCodec load_codec_model(const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!ckpt.config.contains("kind") || ckpt.config["kind"] != "codec")
    throw std::runtime_error(ckpt_path + " is not a codec checkpoint");
  nlohmann::json stored = ckpt.config;
  stored.erase("kind");
  stored.erase("state");
  LoadedCodec out;
  out.cfg = run_config_from_json(stored);
  Rng rng(out.cfg.seed);
  out.model = std::make_unique<CodecModel>(out.cfg.codec, rng);
  restore_parameters(ckpt, out.model->parameters(), "g.", false);
  return out;
}

LoadedTts load_tts_model(const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!ckpt.config.contains("kind") || ckpt.config["kind"] != "tts")
    throw std::runtime_error(ckpt_path + " is not a tts checkpoint");
  nlohmann::json stored = ckpt.config;
  stored.erase("kind");
  stored.erase("state");
  LoadedTts out;
  out.cfg = run_config_from_json(stored);
  out.schedule = make_schedule(out.cfg.diffusion.num_train_steps, out.cfg.diffusion.beta_start,
                               out.cfg.diffusion.beta_end);
  Rng rng(out.cfg.seed);
  out.model = std::make_unique<TtsModel>(out.cfg, rng);
  restore_parameters(ckpt, out.model->parameters(), "t.", false);
  return out;
}

TtsTrainer::TtsTrainer(const RunConfig& cfg, CodecModel& codec, std::vector<TtsExample> examples)
    : cfg_(cfg), codec_(codec), examples_(std::move(examples)), rng_(cfg.seed + 1) {
  cfg_.validate();
  if (examples_.empty()) throw std::invalid_argument("TtsTrainer: no training examples");
  schedule_ = make_schedule(cfg_.diffusion.num_train_steps, cfg_.diffusion.beta_start,
                            cfg_.diffusion.beta_end);

  Rng init_rng(cfg_.seed);
  model_ = std::make_unique<TtsModel>(cfg_, init_rng);

  for (const auto& ex : examples_) {
    latents_.push_back(codec_.encode(ex.audio));
    durations_.push_back(duration_from_waveform(ex.audio, cfg_.codec.sample_rate).seconds);
  }

  nn::AdamConfig adam;  // AdamW for the diffusion side
  adam.lr = cfg_.tts_training.lr;
  adam.weight_decay = cfg_.tts_training.weight_decay;
  opt_ = std::make_unique<nn::Adam>(model_->parameters(), adam);
}

double TtsTrainer::run_step() {
  opt_->zero_grad();
  ad::NodePtr loss;
  for (int i = 0; i < cfg_.tts_training.batch_size; ++i) {
    const auto idx = static_cast<std::size_t>(
        rng_.uniform_int(static_cast<std::int64_t>(examples_.size())));
    auto term = model_->training_loss_node(latents_[idx], examples_[idx].text,
                                           examples_[idx].audio, durations_[idx], schedule_, rng_);
    loss = loss ? ad::add(std::move(loss), std::move(term)) : std::move(term);
  }
  loss = ad::scale(std::move(loss), 1.0f / static_cast<float>(cfg_.tts_training.batch_size));
  const double value = ad::scalar_value(loss);
  if (!std::isfinite(value)) {
    std::cerr << "tts training: non-finite loss at step " << step_ << ", update skipped\n";
    return value;
  }
  ad::backward(loss);
  loss.reset();
  if (cfg_.tts_training.grad_clip > 0.0f) opt_->clip_grad_norm(cfg_.tts_training.grad_clip);
  opt_->step();
  ++step_;
  history_.push_back(value);
  return value;
}

void TtsTrainer::run() {
  while (step_ < cfg_.tts_training.steps) {
    const double value = run_step();
    if (!std::isfinite(value)) {
      std::cerr << "tts training: aborting run at step " << step_ << "\n";
      break;
    }
    if (cfg_.tts_training.log_every > 0 && step_ % cfg_.tts_training.log_every == 0)
      std::cout << "step " << step_ << " loss=" << value << "\n";
  }
}

void TtsTrainer::save(const std::string& ckpt_path) {
  Checkpoint ckpt;
  ckpt.config = to_json(cfg_);
  ckpt.config["kind"] = "tts";
  ckpt.config["state"] = {{"step", step_}, {"adam_t", opt_->step_count()}};
  store_parameters(ckpt, model_->parameters(), "t.", true);
  ckpt.strings["rng"] = rng_.serialize();
  save_checkpoint(ckpt_path, ckpt);
}

void TtsTrainer::resume_from(const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (!ckpt.config.contains("kind") || ckpt.config["kind"] != "tts")
    throw std::runtime_error("resume: " + ckpt_path + " is not a tts checkpoint");
  require_sections_match(ckpt.config, to_json(cfg_),
                         {"codec", "backbone", "text_encoder", "speaker_encoder", "diffusion"},
                         "resume");

  restore_parameters(ckpt, model_->parameters(), "t.", true);
  step_ = ckpt.config["state"]["step"].get<long>();
  opt_->set_step_count(ckpt.config["state"]["adam_t"].get<long>());
  rng_.deserialize(ckpt.strings.at("rng"));
}

}  // namespace sqtts
