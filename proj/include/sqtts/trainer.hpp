#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqtts/checkpoint.hpp"
#include "sqtts/codec_training.hpp"
#include "sqtts/diffusion.hpp"
#include "sqtts/run_config.hpp"
#include "sqtts/synthesis.hpp"

namespace sqtts {

// checkpoint <-> parameter plumbing; names are taken from the parameters
void store_parameters(Checkpoint& ckpt, const std::vector<ad::Parameter*>& params,
                      const std::string& prefix, bool with_optimizer_state);
void restore_parameters(const Checkpoint& ckpt, const std::vector<ad::Parameter*>& params,
                        const std::string& prefix, bool with_optimizer_state);

// Single-writer training loop for the codec: seeded crop sampling, one
// generator plus one discriminator update per step, CSV loss log, resumable
// checkpoints carrying optimizer and RNG state.
class CodecTrainer {
 public:
  CodecTrainer(const RunConfig& cfg, std::vector<Waveform> clips);

  CodecLossReport run_step();
  void run();  // up to cfg.codec_training.steps
  void resume_from(const std::string& ckpt_path);
  void save(const std::string& ckpt_path);
  void set_csv_path(const std::string& path);  // per-step loss log

  long current_step() const { return state_.step; }
  CodecModel& model() { return *model_; }
  MultiScaleDiscriminator& discriminator() { return *disc_; }
  const std::vector<CodecLossReport>& history() const { return history_; }

  // reconstruction of a full clip with the current weights (eval mode)
  Waveform reconstruct(const Waveform& clip);

 private:
  std::vector<Waveform> make_batch();

  RunConfig cfg_;
  std::vector<Waveform> clips_;
  std::unique_ptr<CodecModel> model_;
  std::unique_ptr<MultiScaleDiscriminator> disc_;
  std::unique_ptr<nn::Adam> opt_g_, opt_d_;
  CodecTrainState state_;
  Rng data_rng_;
  std::vector<CodecLossReport> history_;
  std::string csv_path_;
};

// weights-only loading for inference commands
struct LoadedCodec {
  RunConfig cfg;
  std::unique_ptr<CodecModel> model;
};
LoadedCodec load_codec_model(const std::string& ckpt_path);

struct LoadedTts {
  RunConfig cfg;
  std::unique_ptr<TtsModel> model;
  NoiseSchedule schedule;
};
LoadedTts load_tts_model(const std::string& ckpt_path);

struct TtsExample {
  std::string text;
  Waveform audio;
};

// Diffusion training over codec latents with jointly trained condition
// encoders; ground-truth duration comes from the waveform length.
class TtsTrainer {
 public:
  TtsTrainer(const RunConfig& cfg, CodecModel& codec, std::vector<TtsExample> examples);

  double run_step();
  void run();
  void resume_from(const std::string& ckpt_path);
  void save(const std::string& ckpt_path);

  long current_step() const { return step_; }
  TtsModel& model() { return *model_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const std::vector<double>& loss_history() const { return history_; }

 private:
  RunConfig cfg_;
  CodecModel& codec_;
  std::vector<TtsExample> examples_;
  std::vector<LatentGrid> latents_;  // precomputed codec encodings
  std::vector<double> durations_;
  NoiseSchedule schedule_;
  std::unique_ptr<TtsModel> model_;
  std::unique_ptr<nn::Adam> opt_;
  Rng rng_;
  long step_ = 0;
  std::vector<double> history_;
};

}  // namespace sqtts
