#pragma once

#include <string>

#include <json.hpp>

#include "sqtts/backbone.hpp"
#include "sqtts/codec.hpp"
#include "sqtts/codec_training.hpp"
#include "sqtts/conditioning.hpp"
#include "sqtts/duration.hpp"

namespace sqtts {

struct CodecTrainerConfig {
  int steps = 2000;
  int batch_size = 4;
  int crop_samples = 1600;
  float lr = 2e-3f;
  float grad_clip = 1.0f;
  CodecLossWeights weights;
  int disc_scales = 3;
  int disc_base_channels = 16;
  int log_every = 25;
  int checkpoint_every = 0;  // 0 = final checkpoint only
};

struct TtsTrainerConfig {
  int steps = 4000;
  int batch_size = 8;
  float lr = 1e-4f;
  float weight_decay = 0.01f;
  float grad_clip = 1.0f;
  int log_every = 50;
  int checkpoint_every = 0;
};

struct DiffusionConfig {
  int num_train_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  int inference_steps = 100;
  bool project_intermediate = false;
};

struct DurationConfig {
  // <= 0 means "derive from the training manifest median at train-tts time"
  double words_per_second = 0.0;
  double max_seconds = kDefaultMaxDurationSeconds;
  std::string llm_endpoint;
  std::string llm_prompt;  // empty = client default
  std::string llm_cache;
};

// Whole-run configuration: serialized alongside every checkpoint, parsed
// strictly (unknown keys are rejected, version must match).
struct RunConfig {
  int version = 1;
  std::uint64_t seed = 0;
  CodecConfig codec;
  CodecTrainerConfig codec_training;
  BackboneConfig backbone = BackboneConfig::toy();
  TextEncoderConfig text_encoder;
  SpeakerEncoderConfig speaker_encoder;
  DiffusionConfig diffusion;
  TtsTrainerConfig tts_training;
  DurationConfig duration;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// dotted-path listing of keys whose values differ; empty when identical
std::string config_diff(const nlohmann::json& a, const nlohmann::json& b);

}  // namespace sqtts
