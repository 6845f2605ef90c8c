#include "sqtts/synthesis.hpp"

#include <cmath>
#include <stdexcept>

namespace sqtts {

TtsModel::TtsModel(const RunConfig& cfg, Rng& rng)
    : backbone_(cfg.backbone, rng),
      text_(cfg.text_encoder, rng),
      speaker_(cfg.speaker_encoder, rng),
      timing_(cfg.backbone.cond_dim, rng) {
  if (cfg.text_encoder.dim != cfg.backbone.cond_dim ||
      cfg.speaker_encoder.dim != cfg.backbone.cond_dim)
    throw std::invalid_argument("TtsModel: condition encoder widths must equal cond_dim");
}

ConditionBundle TtsModel::make_condition(const std::string& text, const Waveform& reference,
                                         const DurationEstimate& duration) {
  ConditionBundle bundle;
  bundle.text_tokens = text_.encode(text);
  bundle.speaker_embedding = speaker_.embed(reference);
  bundle.timing_embedding = timing_.embed(duration.seconds);
  bundle.duration_seconds = duration.seconds;
  bundle.validate();
  return bundle;
}

DenoiseFn TtsModel::denoise_fn() {
  return [this](const LatentGrid& x_t, int t, const Eigen::MatrixXf& cond_tokens) {
    return backbone_.denoise_forward(x_t, t, cond_tokens);
  };
}

ad::NodePtr TtsModel::training_loss_node(const LatentGrid& x0, const std::string& text,
                                         const Waveform& reference, double duration_seconds,
                                         const NoiseSchedule& schedule, Rng& rng) {
  const int t = 1 + static_cast<int>(rng.uniform_int(schedule.num_train_steps));
  const LatentGrid noise = rng.normal_grid(x0.rows(), x0.cols());
  const LatentGrid x_t = q_sample(x0, t, noise, schedule);

  ad::Mat ref(1, reference.size());
  ref.row(0) = reference.matrix().transpose();
  ConditionNodes cond;
  cond.text_tokens = text_.forward_node(text);
  cond.speaker_embedding = speaker_.forward_node(ad::constant(std::move(ref)));
  cond.timing_embedding = timing_.forward_node(duration_seconds);

  auto pred = backbone_.forward_node(ad::constant(x_t.matrix().transpose()), t,
                                     cond.cond_tokens());
  return ad::mse(std::move(pred), ad::constant(x0.matrix().transpose()));
}

std::vector<ad::Parameter*> TtsModel::parameters() {
  std::vector<ad::Parameter*> ps = backbone_.parameters();
  for (auto* p : text_.parameters()) ps.push_back(p);
  for (auto* p : speaker_.parameters()) ps.push_back(p);
  for (auto* p : timing_.parameters()) ps.push_back(p);
  return ps;
}

SynthesisResult synthesize(TtsModel& tts, CodecModel& codec, const NoiseSchedule& schedule,
                           const SynthesisRequest& request) {
  if (!(request.duration.seconds > 0.0))
    throw std::invalid_argument("synthesize: duration must be positive");

  const double frame_rate = codec.config().frame_rate();
  const Eigen::Index num_frames =
      std::max<Eigen::Index>(1, std::lround(request.duration.seconds * frame_rate));

  const ConditionBundle cond =
      tts.make_condition(request.text, request.reference, request.duration);

  Rng rng(request.seed);
  SamplerOptions opts;
  opts.num_inference_steps = request.num_inference_steps;
  opts.project_intermediate = request.project_intermediate;

  SynthesisResult result;
  result.duration = request.duration;
  result.num_frames = num_frames;
  result.latents = sample(tts.denoise_fn(), cond.cond_tokens(), num_frames, schedule,
                          codec.config().quantizer(), rng, opts);
  result.wave = codec.decode(result.latents);
  return result;
}

}  // namespace sqtts
