#include "sqtts/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace sqtts {

namespace {

using nlohmann::json;

// strict section parser: every present key must be known and well-typed
class Section {
 public:
  Section(const json& j, const std::string& name) : name_(name) {
    if (j.is_null()) return;
    if (!j.is_object()) throw std::invalid_argument("config: " + name + " must be an object");
    obj_ = j;
  }

  template <typename T>
  void get(const char* key, T& out) {
    known_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_[key].get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad type for " + name_ + "." + key);
    }
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items())
      if (!known_.count(key))
        throw std::invalid_argument("config: unknown key " + name_ + "." + key);
  }

 private:
  json obj_ = json::object();
  std::string name_;
  std::set<std::string> known_;
};

json section_or_null(const json& j, const char* key) {
  return j.contains(key) ? j[key] : json();
}

}  // namespace

void RunConfig::validate() const {
  if (version != 1)
    throw std::invalid_argument("config: version " + std::to_string(version) +
                                " not supported (expected 1)");
  codec.validate();
  backbone.validate();
  text_encoder.validate();
  speaker_encoder.validate();
  if (backbone.latent_dim != codec.latent_dim)
    throw std::invalid_argument("config: backbone.latent_dim must equal codec.latent_dim");
  if (text_encoder.dim != backbone.cond_dim || speaker_encoder.dim != backbone.cond_dim)
    throw std::invalid_argument(
        "config: text_encoder.dim and speaker_encoder.dim must equal backbone.cond_dim");
  if (diffusion.num_train_steps < 1 || !(diffusion.beta_start > 0.0) ||
      !(diffusion.beta_start < diffusion.beta_end) || !(diffusion.beta_end < 1.0))
    throw std::invalid_argument("config: bad diffusion schedule parameters");
  if (diffusion.inference_steps < 1 || diffusion.inference_steps > diffusion.num_train_steps)
    throw std::invalid_argument("config: inference_steps must lie in [1, num_train_steps]");
  if (duration.words_per_second < 0.0 || !(duration.max_seconds > 0.0))
    throw std::invalid_argument("config: bad duration parameters");
}

json to_json(const RunConfig& cfg) {
  return json{
      {"version", cfg.version},
      {"seed", cfg.seed},
      {"codec",
       {{"sample_rate", cfg.codec.sample_rate},
        {"strides", cfg.codec.strides},
        {"latent_dim", cfg.codec.latent_dim},
        {"sq_scale", cfg.codec.sq_scale},
        {"base_channels", cfg.codec.base_channels},
        {"max_channels", cfg.codec.max_channels},
        {"kernel", cfg.codec.kernel}}},
      {"codec_training",
       {{"steps", cfg.codec_training.steps},
        {"batch_size", cfg.codec_training.batch_size},
        {"crop_samples", cfg.codec_training.crop_samples},
        {"lr", cfg.codec_training.lr},
        {"grad_clip", cfg.codec_training.grad_clip},
        {"l1_weight", cfg.codec_training.weights.l1_time},
        {"stft_weight", cfg.codec_training.weights.stft_mse},
        {"adv_weight", cfg.codec_training.weights.adv_g},
        {"adv_warmup_steps", cfg.codec_training.weights.adv_warmup_steps},
        {"disc_scales", cfg.codec_training.disc_scales},
        {"disc_base_channels", cfg.codec_training.disc_base_channels},
        {"log_every", cfg.codec_training.log_every},
        {"checkpoint_every", cfg.codec_training.checkpoint_every}}},
      {"backbone",
       {{"num_layers", cfg.backbone.num_layers},
        {"num_heads", cfg.backbone.num_heads},
        {"model_dim", cfg.backbone.model_dim},
        {"cond_dim", cfg.backbone.cond_dim},
        {"max_seq_len", cfg.backbone.max_seq_len},
        {"mlp_ratio", cfg.backbone.mlp_ratio},
        {"use_causal_mask", cfg.backbone.use_causal_mask}}},
      {"text_encoder",
       {{"dim", cfg.text_encoder.dim},
        {"num_layers", cfg.text_encoder.num_layers},
        {"num_heads", cfg.text_encoder.num_heads},
        {"mlp_ratio", cfg.text_encoder.mlp_ratio},
        {"max_len", cfg.text_encoder.max_len}}},
      {"speaker_encoder",
       {{"dim", cfg.speaker_encoder.dim},
        {"base_channels", cfg.speaker_encoder.base_channels},
        {"min_samples", cfg.speaker_encoder.min_samples}}},
      {"diffusion",
       {{"num_train_steps", cfg.diffusion.num_train_steps},
        {"beta_start", cfg.diffusion.beta_start},
        {"beta_end", cfg.diffusion.beta_end},
        {"inference_steps", cfg.diffusion.inference_steps},
        {"project_intermediate", cfg.diffusion.project_intermediate}}},
      {"tts_training",
       {{"steps", cfg.tts_training.steps},
        {"batch_size", cfg.tts_training.batch_size},
        {"lr", cfg.tts_training.lr},
        {"weight_decay", cfg.tts_training.weight_decay},
        {"grad_clip", cfg.tts_training.grad_clip},
        {"log_every", cfg.tts_training.log_every},
        {"checkpoint_every", cfg.tts_training.checkpoint_every}}},
      {"duration",
       {{"words_per_second", cfg.duration.words_per_second},
        {"max_seconds", cfg.duration.max_seconds},
        {"llm_endpoint", cfg.duration.llm_endpoint},
        {"llm_prompt", cfg.duration.llm_prompt},
        {"llm_cache", cfg.duration.llm_cache}}}};
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: root must be an object");
  static const std::set<std::string> known_sections = {
      "version",      "seed",           "codec",     "codec_training", "backbone",
      "text_encoder", "speaker_encoder", "diffusion", "tts_training",   "duration"};
  for (const auto& [key, _] : j.items())
    if (!known_sections.count(key)) throw std::invalid_argument("config: unknown key " + key);

  RunConfig cfg;
  if (j.contains("version")) cfg.version = j["version"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();

  {
    Section s(section_or_null(j, "codec"), "codec");
    s.get("sample_rate", cfg.codec.sample_rate);
    s.get("strides", cfg.codec.strides);
    s.get("latent_dim", cfg.codec.latent_dim);
    s.get("sq_scale", cfg.codec.sq_scale);
    s.get("base_channels", cfg.codec.base_channels);
    s.get("max_channels", cfg.codec.max_channels);
    s.get("kernel", cfg.codec.kernel);
    s.finish();
  }
  {
    Section s(section_or_null(j, "codec_training"), "codec_training");
    s.get("steps", cfg.codec_training.steps);
    s.get("batch_size", cfg.codec_training.batch_size);
    s.get("crop_samples", cfg.codec_training.crop_samples);
    s.get("lr", cfg.codec_training.lr);
    s.get("grad_clip", cfg.codec_training.grad_clip);
    s.get("l1_weight", cfg.codec_training.weights.l1_time);
    s.get("stft_weight", cfg.codec_training.weights.stft_mse);
    s.get("adv_weight", cfg.codec_training.weights.adv_g);
    s.get("adv_warmup_steps", cfg.codec_training.weights.adv_warmup_steps);
    s.get("disc_scales", cfg.codec_training.disc_scales);
    s.get("disc_base_channels", cfg.codec_training.disc_base_channels);
    s.get("log_every", cfg.codec_training.log_every);
    s.get("checkpoint_every", cfg.codec_training.checkpoint_every);
    s.finish();
  }
  {
    Section s(section_or_null(j, "backbone"), "backbone");
    s.get("num_layers", cfg.backbone.num_layers);
    s.get("num_heads", cfg.backbone.num_heads);
    s.get("model_dim", cfg.backbone.model_dim);
    s.get("cond_dim", cfg.backbone.cond_dim);
    s.get("max_seq_len", cfg.backbone.max_seq_len);
    s.get("mlp_ratio", cfg.backbone.mlp_ratio);
    s.get("use_causal_mask", cfg.backbone.use_causal_mask);
    s.finish();
  }
  {
    Section s(section_or_null(j, "text_encoder"), "text_encoder");
    s.get("dim", cfg.text_encoder.dim);
    s.get("num_layers", cfg.text_encoder.num_layers);
    s.get("num_heads", cfg.text_encoder.num_heads);
    s.get("mlp_ratio", cfg.text_encoder.mlp_ratio);
    s.get("max_len", cfg.text_encoder.max_len);
    s.finish();
  }
  {
    Section s(section_or_null(j, "speaker_encoder"), "speaker_encoder");
    s.get("dim", cfg.speaker_encoder.dim);
    s.get("base_channels", cfg.speaker_encoder.base_channels);
    s.get("min_samples", cfg.speaker_encoder.min_samples);
    s.finish();
  }
  {
    Section s(section_or_null(j, "diffusion"), "diffusion");
    s.get("num_train_steps", cfg.diffusion.num_train_steps);
    s.get("beta_start", cfg.diffusion.beta_start);
    s.get("beta_end", cfg.diffusion.beta_end);
    s.get("inference_steps", cfg.diffusion.inference_steps);
    s.get("project_intermediate", cfg.diffusion.project_intermediate);
    s.finish();
  }
  {
    Section s(section_or_null(j, "tts_training"), "tts_training");
    s.get("steps", cfg.tts_training.steps);
    s.get("batch_size", cfg.tts_training.batch_size);
    s.get("lr", cfg.tts_training.lr);
    s.get("weight_decay", cfg.tts_training.weight_decay);
    s.get("grad_clip", cfg.tts_training.grad_clip);
    s.get("log_every", cfg.tts_training.log_every);
    s.get("checkpoint_every", cfg.tts_training.checkpoint_every);
    s.finish();
  }
  {
    Section s(section_or_null(j, "duration"), "duration");
    s.get("words_per_second", cfg.duration.words_per_second);
    s.get("max_seconds", cfg.duration.max_seconds);
    s.get("llm_endpoint", cfg.duration.llm_endpoint);
    s.get("llm_prompt", cfg.duration.llm_prompt);
    s.get("llm_cache", cfg.duration.llm_cache);
    s.finish();
  }

  cfg.backbone.latent_dim = cfg.codec.latent_dim;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_run_config: cannot open " + path);
  json j = json::parse(is, nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("load_run_config: invalid JSON in " + path);
  return run_config_from_json(j);
}

namespace {

void diff_walk(const json& a, const json& b, const std::string& path, std::string& out) {
  if (a == b) return;
  if (a.is_object() && b.is_object()) {
    std::set<std::string> keys;
    for (const auto& [k, _] : a.items()) keys.insert(k);
    for (const auto& [k, _] : b.items()) keys.insert(k);
    for (const auto& k : keys) {
      const std::string sub = path.empty() ? k : path + "." + k;
      if (!a.contains(k))
        out += "  " + sub + ": <absent> vs " + b[k].dump() + "\n";
      else if (!b.contains(k))
        out += "  " + sub + ": " + a[k].dump() + " vs <absent>\n";
      else
        diff_walk(a[k], b[k], sub, out);
    }
    return;
  }
  out += "  " + path + ": " + a.dump() + " vs " + b.dump() + "\n";
}

}  // namespace

std::string config_diff(const json& a, const json& b) {
  std::string out;
  diff_walk(a, b, "", out);
  return out;
}

}  // namespace sqtts
