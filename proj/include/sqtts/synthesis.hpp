#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqtts/backbone.hpp"
#include "sqtts/codec.hpp"
#include "sqtts/conditioning.hpp"
#include "sqtts/diffusion.hpp"
#include "sqtts/duration.hpp"
#include "sqtts/run_config.hpp"

namespace sqtts {

// Denoiser plus its three condition encoders, trained together.
class TtsModel {
 public:
  TtsModel(const RunConfig& cfg, Rng& rng);

  ConditionBundle make_condition(const std::string& text, const Waveform& reference,
                                 const DurationEstimate& duration);

  DenoiseFn denoise_fn();

  // diffusion training graph for one example; gradients reach the backbone
  // and all three condition encoders
  ad::NodePtr training_loss_node(const LatentGrid& x0, const std::string& text,
                                 const Waveform& reference, double duration_seconds,
                                 const NoiseSchedule& schedule, Rng& rng);

  DenoiserBackbone& backbone() { return backbone_; }
  TextEncoder& text_encoder() { return text_; }
  SpeakerEncoder& speaker_encoder() { return speaker_; }
  TimingEncoder& timing_encoder() { return timing_; }

  std::vector<ad::Parameter*> parameters();

 private:
  DenoiserBackbone backbone_;
  TextEncoder text_;
  SpeakerEncoder speaker_;
  TimingEncoder timing_;
};

struct SynthesisRequest {
  std::string text;
  Waveform reference;
  DurationEstimate duration;
  std::uint64_t seed = 0;
  int num_inference_steps = 100;
  bool project_intermediate = false;
};

struct SynthesisResult {
  Waveform wave;
  LatentGrid latents;
  Eigen::Index num_frames = 0;
  DurationEstimate duration;
};

// duration -> frame count -> diffusion sample -> codec decode
SynthesisResult synthesize(TtsModel& tts, CodecModel& codec, const NoiseSchedule& schedule,
                           const SynthesisRequest& request);

}  // namespace sqtts
