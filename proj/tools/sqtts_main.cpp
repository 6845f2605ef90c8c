#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqtts/audio.hpp"
#include "sqtts/codes_io.hpp"
#include "sqtts/duration.hpp"
#include "sqtts/manifest.hpp"
#include "sqtts/metrics.hpp"
#include "sqtts/run_config.hpp"
#include "sqtts/synthesis.hpp"
#include "sqtts/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

sqtts::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) return sqtts::RunConfig{};
  return sqtts::load_run_config(path);
}

std::vector<sqtts::Waveform> clips_from_manifest(const sqtts::Manifest& manifest) {
  std::vector<sqtts::Waveform> clips;
  clips.reserve(manifest.records.size());
  for (const auto& r : manifest.records) clips.push_back(sqtts::read_wav(r.audio_path).samples);
  return clips;
}

int cmd_ingest(const std::string& audio_dir, const std::string& out_path) {
  const auto result = sqtts::ingest(audio_dir);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  sqtts::save_manifest(out_path, result.manifest);
  const json stats = {{"records", result.manifest.records.size()},
                      {"skipped", result.skipped},
                      {"median_words_per_second", result.median_words_per_second}};
  std::ofstream os(out_path + ".stats.json");
  os << stats.dump(2) << "\n";
  std::cout << "ingested " << result.manifest.records.size() << " records ("
            << result.skipped << " skipped) -> " << out_path << "\n"
            << "median words/second: " << result.median_words_per_second << "\n";
  return 0;
}

int cmd_train_codec(const std::string& config_path, const std::string& manifest_path,
                    const std::string& out_dir, const std::string& resume_path, int steps_override,
                    long seed_override) {
  sqtts::RunConfig cfg = load_config_or_default(config_path);
  if (steps_override > 0) cfg.codec_training.steps = steps_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  const auto manifest = sqtts::load_manifest(manifest_path);
  sqtts::CodecTrainer trainer(cfg, clips_from_manifest(manifest));
  fs::create_directories(out_dir);
  trainer.set_csv_path((fs::path(out_dir) / "codec_losses.csv").string());
  if (!resume_path.empty()) trainer.resume_from(resume_path);
  trainer.run();
  const std::string ckpt = (fs::path(out_dir) / "codec.ckpt").string();
  trainer.save(ckpt);
  std::cout << "saved " << ckpt << " at step " << trainer.current_step() << "\n";
  return 0;
}

int cmd_train_tts(const std::string& config_path, const std::string& manifest_path,
                  const std::string& codec_path, const std::string& out_dir,
                  const std::string& resume_path, int steps_override, long seed_override) {
  sqtts::RunConfig cfg = load_config_or_default(config_path);
  if (steps_override > 0) cfg.tts_training.steps = steps_override;
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

  auto codec = sqtts::load_codec_model(codec_path);
  const std::string diff =
      sqtts::config_diff(sqtts::to_json(codec.cfg)["codec"], sqtts::to_json(cfg)["codec"]);
  if (!diff.empty()) {
    std::cerr << "error: codec checkpoint does not match the run config:\n" << diff;
    return 1;
  }

  const auto manifest = sqtts::load_manifest(manifest_path);
  if (cfg.duration.words_per_second <= 0.0) {
    cfg.duration.words_per_second = sqtts::median_words_per_second(manifest);
    std::cout << "duration heuristic rate from manifest median: "
              << cfg.duration.words_per_second << " words/s\n";
  }
  std::vector<sqtts::TtsExample> examples;
  for (const auto& r : manifest.records)
    examples.push_back({r.text, sqtts::read_wav(r.audio_path).samples});

  sqtts::TtsTrainer trainer(cfg, *codec.model, std::move(examples));
  fs::create_directories(out_dir);
  if (!resume_path.empty()) trainer.resume_from(resume_path);
  trainer.run();

  std::ofstream csv((fs::path(out_dir) / "tts_losses.csv").string());
  csv << "step,loss\n";
  const auto& hist = trainer.loss_history();
  for (std::size_t i = 0; i < hist.size(); ++i) csv << (i + 1) << "," << hist[i] << "\n";

  const std::string ckpt = (fs::path(out_dir) / "tts.ckpt").string();
  trainer.save(ckpt);
  std::cout << "saved " << ckpt << " at step " << trainer.current_step() << "\n";
  return 0;
}

int cmd_encode(const std::string& codec_path, const std::string& in_wav,
               const std::string& out_codes) {
  auto codec = sqtts::load_codec_model(codec_path);
  const auto wav = sqtts::read_wav(in_wav);
  if (wav.sample_rate != codec.cfg.codec.sample_rate) {
    std::cerr << "error: " << in_wav << " is " << wav.sample_rate << " Hz, codec expects "
              << codec.cfg.codec.sample_rate << " Hz\n";
    return 1;
  }
  const sqtts::LatentGrid latents = codec.model->encode(wav.samples);
  const sqtts::CodeGrid codes = sqtts::pack_codes(latents, codec.cfg.codec.quantizer());
  sqtts::save_codes(out_codes, codes, codec.cfg.codec.quantizer());
  std::cout << "encoded " << latents.rows() << " frames -> " << out_codes << "\n";
  return 0;
}

int cmd_decode(const std::string& codec_path, const std::string& in_codes,
               const std::string& out_wav) {
  auto codec = sqtts::load_codec_model(codec_path);
  sqtts::QuantizerConfig qcfg;
  const sqtts::CodeGrid codes = sqtts::load_codes(in_codes, qcfg);
  if (qcfg.scale != codec.cfg.codec.sq_scale || qcfg.latent_dim != codec.cfg.codec.latent_dim) {
    std::cerr << "error: code stream has S=" << qcfg.scale << ", d=" << qcfg.latent_dim
              << " but codec expects S=" << codec.cfg.codec.sq_scale
              << ", d=" << codec.cfg.codec.latent_dim << "\n";
    return 1;
  }
  const sqtts::Waveform wave = codec.model->decode(sqtts::unpack_codes(codes, qcfg));
  sqtts::write_wav(out_wav, wave, codec.cfg.codec.sample_rate);
  std::cout << "decoded " << codes.rows() << " frames -> " << out_wav << "\n";
  return 0;
}

int cmd_synthesize(const std::string& codec_path, const std::string& tts_path,
                   const std::string& text, const std::string& reference_path,
                   const std::string& out_wav, long seed, int steps,
                   const std::string& duration_source, bool project_intermediate) {
  auto codec = sqtts::load_codec_model(codec_path);
  auto tts = sqtts::load_tts_model(tts_path);

  const std::string diff = sqtts::config_diff(sqtts::to_json(tts.cfg)["codec"],
                                              sqtts::to_json(codec.cfg)["codec"]);
  if (!diff.empty()) {
    std::cerr << "error: tts and codec checkpoints disagree on the codec config:\n" << diff;
    return 1;
  }

  const auto ref = sqtts::read_wav(reference_path);
  sqtts::DurationEstimate duration;
  if (duration_source == "llm") {
    sqtts::LlmClientConfig lcfg;
    lcfg.endpoint = tts.cfg.duration.llm_endpoint;
    if (!tts.cfg.duration.llm_prompt.empty()) lcfg.prompt = tts.cfg.duration.llm_prompt;
    lcfg.cache_path = tts.cfg.duration.llm_cache;
    lcfg.max_seconds = tts.cfg.duration.max_seconds;
    lcfg.fallback_words_per_second =
        tts.cfg.duration.words_per_second > 0.0 ? tts.cfg.duration.words_per_second : 2.5;
    sqtts::LlmDurationClient client(lcfg);
    duration = client.estimate(text);
  } else if (duration_source == "heuristic") {
    const double rate =
        tts.cfg.duration.words_per_second > 0.0 ? tts.cfg.duration.words_per_second : 2.5;
    duration = sqtts::estimate_duration_heuristic(text, rate, tts.cfg.duration.max_seconds);
  } else {
    std::cerr << "error: unknown duration source '" << duration_source << "'\n";
    return 1;
  }

  sqtts::SynthesisRequest request;
  request.text = text;
  request.reference = ref.samples;
  request.duration = duration;
  request.seed = static_cast<std::uint64_t>(seed);
  request.num_inference_steps = steps > 0 ? steps : tts.cfg.diffusion.inference_steps;
  request.project_intermediate = project_intermediate || tts.cfg.diffusion.project_intermediate;

  const auto result = sqtts::synthesize(*tts.model, *codec.model, tts.schedule, request);
  sqtts::write_wav(out_wav, result.wave, codec.cfg.codec.sample_rate);

  const json sidecar = {{"text", text},
                        {"duration_seconds", result.duration.seconds},
                        {"duration_source", sqtts::to_string(result.duration.source)},
                        {"seed", seed},
                        {"num_inference_steps", request.num_inference_steps},
                        {"num_frames", result.num_frames},
                        {"sample_rate", codec.cfg.codec.sample_rate}};
  std::ofstream os(out_wav + ".json");
  os << sidecar.dump(2) << "\n";
  std::cout << "synthesized " << result.num_frames << " frames (" << result.duration.seconds
            << " s, " << sqtts::to_string(result.duration.source) << ") -> " << out_wav << "\n";
  return 0;
}

int cmd_eval(const std::string& ref_dir, const std::string& deg_dir, const std::string& out_csv,
             const std::string& codec_path) {
  sqtts::QuantizerConfig qcfg;
  double frame_rate = 50.0;
  if (!codec_path.empty()) {
    auto codec = sqtts::load_codec_model(codec_path);
    qcfg = codec.cfg.codec.quantizer();
    frame_rate = codec.cfg.codec.frame_rate();
  }

  std::vector<fs::path> refs;
  for (const auto& entry : fs::directory_iterator(ref_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav") refs.push_back(entry.path());
  std::sort(refs.begin(), refs.end());

  std::ofstream csv(out_csv);
  csv << "name,mcd,mel_ssim,snr,stft_dist,bitrate_bps\n";
  sqtts::MetricReport mean;
  int evaluated = 0;
  for (const auto& ref_path : refs) {
    const fs::path deg_path = fs::path(deg_dir) / ref_path.filename();
    if (!fs::exists(deg_path)) {
      std::cerr << "warning: no pair for " << ref_path.filename() << ", skipped\n";
      continue;
    }
    const auto ref = sqtts::read_wav(ref_path.string());
    const auto deg = sqtts::read_wav(deg_path.string());
    const auto report = sqtts::evaluate_pair(ref.samples, deg.samples, qcfg, frame_rate);
    csv << ref_path.filename().string() << "," << report.mcd << "," << report.mel_ssim << ","
        << report.snr << "," << report.stft_dist << "," << report.bitrate_bps << "\n";
    mean.mcd += report.mcd;
    mean.mel_ssim += report.mel_ssim;
    mean.snr += report.snr;
    mean.stft_dist += report.stft_dist;
    mean.bitrate_bps += report.bitrate_bps;
    ++evaluated;
  }
  if (evaluated == 0) {
    std::cerr << "error: no pairs evaluated\n";
    return 1;
  }
  const double n = evaluated;
  csv << "mean," << mean.mcd / n << "," << mean.mel_ssim / n << "," << mean.snr / n << ","
      << mean.stft_dist / n << "," << mean.bitrate_bps / n << "\n";
  std::cout << "evaluated " << evaluated << " pairs -> " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalar-quantized speech codec + latent diffusion TTS"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, out_dir, resume_path, audio_dir, out_path;
  std::string codec_path, tts_path, in_path, text, reference_path, duration_source = "heuristic";
  std::string ref_dir, deg_dir;
  int steps_override = 0;
  long seed = 0, seed_override = -1;
  int steps = 0;
  bool project_intermediate = false;

  auto* ingest = app.add_subcommand("ingest", "build a manifest from a directory of WAV+txt");
  ingest->add_option("--audio-dir", audio_dir, "directory of 16 kHz mono WAVs")->required();
  ingest->add_option("--out", out_path, "manifest output path")->required();

  auto* train_codec = app.add_subcommand("train-codec", "train the codec on manifest audio");
  train_codec->add_option("--config", config_path, "run config JSON");
  train_codec->add_option("--manifest", manifest_path)->required();
  train_codec->add_option("--out-dir", out_dir)->required();
  train_codec->add_option("--resume", resume_path, "checkpoint to resume from");
  train_codec->add_option("--steps", steps_override, "override training steps");
  train_codec->add_option("--seed", seed_override, "override seed");

  auto* train_tts = app.add_subcommand("train-tts", "train the diffusion TTS on manifest audio");
  train_tts->add_option("--config", config_path, "run config JSON");
  train_tts->add_option("--manifest", manifest_path)->required();
  train_tts->add_option("--codec", codec_path, "trained codec checkpoint")->required();
  train_tts->add_option("--out-dir", out_dir)->required();
  train_tts->add_option("--resume", resume_path);
  train_tts->add_option("--steps", steps_override);
  train_tts->add_option("--seed", seed_override);

  auto* encode = app.add_subcommand("encode", "waveform -> SQC1 code stream");
  encode->add_option("--codec", codec_path)->required();
  encode->add_option("--in", in_path, "input WAV")->required();
  encode->add_option("--out", out_path, "output .sqc path")->required();

  auto* decode = app.add_subcommand("decode", "SQC1 code stream -> waveform");
  decode->add_option("--codec", codec_path)->required();
  decode->add_option("--in", in_path, "input .sqc path")->required();
  decode->add_option("--out", out_path, "output WAV")->required();

  auto* synth = app.add_subcommand("synthesize", "text + reference voice -> WAV");
  synth->add_option("--codec", codec_path)->required();
  synth->add_option("--tts", tts_path)->required();
  synth->add_option("--text", text)->required();
  synth->add_option("--reference", reference_path, "reference WAV for voice timbre")->required();
  synth->add_option("--out", out_path)->required();
  synth->add_option("--seed", seed);
  synth->add_option("--steps", steps, "inference steps (default from config)");
  synth->add_option("--duration-source", duration_source, "heuristic | llm");
  synth->add_flag("--project-intermediate", project_intermediate,
                  "quantize intermediate x0 estimates too");

  auto* eval = app.add_subcommand("eval", "paired objective metrics over two directories");
  eval->add_option("--reference-dir", ref_dir)->required();
  eval->add_option("--degraded-dir", deg_dir)->required();
  eval->add_option("--out", out_path, "CSV output")->required();
  eval->add_option("--codec", codec_path, "codec checkpoint for bitrate fields");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(audio_dir, out_path);
    if (train_codec->parsed())
      return cmd_train_codec(config_path, manifest_path, out_dir, resume_path, steps_override,
                             seed_override);
    if (train_tts->parsed())
      return cmd_train_tts(config_path, manifest_path, codec_path, out_dir, resume_path,
                           steps_override, seed_override);
    if (encode->parsed()) return cmd_encode(codec_path, in_path, out_path);
    if (decode->parsed()) return cmd_decode(codec_path, in_path, out_path);
    if (synth->parsed())
      return cmd_synthesize(codec_path, tts_path, text, reference_path, out_path, seed, steps,
                            duration_source, project_intermediate);
    if (eval->parsed()) return cmd_eval(ref_dir, deg_dir, out_path, codec_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
