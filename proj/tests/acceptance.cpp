// Acceptance suite: one self-contained check per release criterion, one
// PASS/FAIL line each. Training checks are seed-fixed and run at toy scale
// on synthetic speech-like clips.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sqtts/codes_io.hpp"
#include "sqtts/metrics.hpp"
#include "sqtts/trainer.hpp"
#include "test_util.hpp"

using namespace sqtts;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
};

#define REQUIRE_TRUE(out, cond, msg)                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      (out).pass = false;                                              \
      (out).detail << "[" << msg << "] ";                              \
    }                                                                  \
  } while (0)

std::vector<Waveform> toy_clips(Eigen::Index samples = 16000) {
  std::vector<Waveform> clips;
  for (int i = 0; i < 8; ++i) clips.push_back(testutil::speech_like_clip(i, samples));
  return clips;
}

const std::vector<std::string> kToySentences = {
    "the quick brown fox jumps over a lazy dog",
    "rain falls softly on the quiet green hills",
    "seven bright lanterns drift across the bay",
    "a careful reader checks every small detail",
    "music echoes warmly through the old stone hall",
    "the train departs at noon from platform nine",
    "cold wind rattles the windows of the cabin",
    "fresh bread and coffee wait on the table"};

RunConfig toy_codec_config(int S, int d) {
  RunConfig cfg;
  cfg.seed = 2024;
  cfg.codec.sq_scale = S;
  cfg.codec.latent_dim = d;
  cfg.codec.base_channels = 16;
  cfg.codec.max_channels = 64;
  cfg.backbone.latent_dim = d;
  cfg.codec_training.batch_size = 4;
  cfg.codec_training.crop_samples = 1600;
  cfg.codec_training.lr = 2e-3f;  // codec learning rate from the training recipe
  cfg.codec_training.disc_base_channels = 16;
  cfg.codec_training.log_every = 0;
  return cfg;
}

// ---------------------------------------------------------------------------

Outcome criterion_1_quantizer_lattice() {
  Outcome out;
  Rng rng(1);
  for (int scale : {1, 2, 9}) {
    const QuantizerConfig cfg{scale, 8};
    const float s = static_cast<float>(scale);
    REQUIRE_TRUE(out, levels_count(cfg) == 2 * scale + 1, "levels_count != 2S+1");
    long checked = 0;
    for (int rep = 0; rep < 125 && out.pass; ++rep) {
      const LatentGrid h = rng.normal_grid(100, 8) * 4.0f;  // 100*8*125 = 1e5 per S
      const LatentGrid q = scalar_quantize(h, cfg);
      for (Eigen::Index j = 0; j < q.cols(); ++j)
        for (Eigen::Index i = 0; i < q.rows(); ++i) {
          const float k = q(i, j) * s;
          if (std::nearbyintf(k) != k || std::abs(k) > s || q(i, j) != std::nearbyintf(k) / s) {
            REQUIRE_TRUE(out, false, "off-lattice output");
            break;
          }
          if (std::abs(q(i, j) - std::tanh(h(i, j))) > 0.5f / s + 1e-7f) {
            REQUIRE_TRUE(out, false, "approximation bound violated");
            break;
          }
          ++checked;
        }
    }
    out.detail << "S=" << scale << " checked " << checked << " values; ";
  }
  return out;
}

Outcome criterion_2_bitrate_identity() {
  Outcome out;
  REQUIRE_TRUE(out, bitrate_bps({9, 32}, 50.0) == 8000.0, "bitrate(S=9,d=32,50Hz) != 8000");
  const CodecConfig cfg;
  REQUIRE_TRUE(out, cfg.downsample_factor() == 320, "stride product != 320");
  REQUIRE_TRUE(out, cfg.frame_rate() == 50.0, "frame rate != 50");
  REQUIRE_TRUE(out, 16000 / cfg.downsample_factor() == 50, "1 s !-> 50 frames");
  out.detail << "8000 bps, 320x downsample, 50 frames/s";
  return out;
}

Outcome criterion_3_ste_contract() {
  Outcome out;
  Rng rng(3);
  int batches = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const ad::Mat h = rng.normal_matrix(16, 24, 2.5f);
    auto a = ad::input(h);
    ad::backward(ad::sum_all(ad::quantize_ste(a, 9)));
    auto b = ad::input(h);
    ad::backward(ad::sum_all(ad::tanh_op(b)));
    if (!(a->grad.array() == b->grad.array()).all()) {
      REQUIRE_TRUE(out, false, "gradient mismatch at batch " + std::to_string(rep));
      break;
    }
    ++batches;
  }
  out.detail << batches << " random batches bitwise-equal";
  return out;
}

Outcome criterion_4_sqc1_roundtrip() {
  Outcome out;
  Rng rng(4);
  int grids = 0;
  for (int scale : {1, 2, 9}) {
    const QuantizerConfig cfg{scale, scale == 2 ? 18 : 32};
    for (int rep = 0; rep < 334 && out.pass; ++rep) {
      const int frames = 1 + static_cast<int>(rng.uniform_int(30));
      const LatentGrid q =
          scalar_quantize(LatentGrid(rng.normal_grid(frames, cfg.latent_dim) * 3.0f), cfg);
      std::stringstream ss;
      write_codes(ss, pack_codes(q, cfg), cfg);
      QuantizerConfig got;
      const CodeGrid codes = read_codes(ss, got);
      const LatentGrid back = unpack_codes(codes, got);
      if (!(back == q).all()) {
        REQUIRE_TRUE(out, false, "round trip not bit-exact");
        break;
      }
      ++grids;
    }
  }
  out.detail << grids << " grids bit-exact across S in {1,2,9}";
  return out;
}

Outcome criterion_5_forward_marginals() {
  Outcome out;
  const NoiseSchedule s = make_schedule();
  Rng rng(5);
  LatentGrid x0(1, 4);
  x0 << -1.0f, -1.0f / 3.0f, 1.0f / 3.0f, 1.0f;
  const int draws = 10000;
  for (int t : {10, 500, 999}) {
    const double abar = s.alpha_bar(t);
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(4), sum_sq = Eigen::ArrayXd::Zero(4);
    for (int i = 0; i < draws; ++i) {
      const LatentGrid xt = q_sample(x0, t, rng.normal_grid(1, 4), s);
      sum += xt.row(0).cast<double>();
      sum_sq += xt.row(0).cast<double>().square();
    }
    const Eigen::ArrayXd mean = sum / draws;
    const Eigen::ArrayXd var = sum_sq / draws - mean.square();
    const double expected_var = 1.0 - abar;
    const double se_mean = std::sqrt(expected_var / draws);
    const double se_var = expected_var * std::sqrt(2.0 / (draws - 1));
    for (int j = 0; j < 4; ++j) {
      REQUIRE_TRUE(out, std::abs(mean(j) - std::sqrt(abar) * x0(0, j)) <= 3.0 * se_mean,
                   "mean off at t=" + std::to_string(t));
      REQUIRE_TRUE(out, std::abs(var(j) - expected_var) <= 3.0 * se_var,
                   "variance off at t=" + std::to_string(t));
    }
  }
  out.detail << "t in {10,500,999}, 1e4 draws each, 3 standard errors";
  return out;
}

Outcome criterion_6_projection_and_shape() {
  Outcome out;
  RunConfig cfg = toy_codec_config(9, 32);
  cfg.backbone.num_layers = 2;
  cfg.backbone.num_heads = 4;
  cfg.backbone.model_dim = 64;
  cfg.backbone.cond_dim = 64;
  cfg.backbone.max_seq_len = 256;
  cfg.text_encoder.dim = 64;
  cfg.text_encoder.num_layers = 1;
  cfg.speaker_encoder.dim = 64;

  Rng rng(6);
  TtsModel tts(cfg, rng);
  Rng crng(6);
  CodecModel codec(cfg.codec, crng);
  const NoiseSchedule schedule = make_schedule();

  for (double duration : {1.0, 1.73, 2.5}) {
    SynthesisRequest req;
    req.text = "check the projection contract";
    req.reference = testutil::speech_like_clip(66, 16000);
    req.duration = {duration, DurationSource::heuristic};
    req.seed = 7;
    req.num_inference_steps = 100;  // 100-step sampling
    const SynthesisResult result = synthesize(tts, codec, schedule, req);
    const auto want_frames = static_cast<Eigen::Index>(std::lround(duration * 50.0));
    REQUIRE_TRUE(out, result.latents.rows() == want_frames, "frame count != round(duration*50)");
    REQUIRE_TRUE(out, result.latents.cols() == 32, "latent width != 32");
    REQUIRE_TRUE(out, is_lattice_valued<float>(result.latents, cfg.codec.quantizer()),
                 "sample output off-lattice");
  }
  out.detail << "100-step sampling, outputs on the lattice, shapes (round(dur*50), 32)";
  return out;
}

Outcome criterion_7_conditioning_contract() {
  Outcome out;
  BackboneConfig cfg = BackboneConfig::toy();
  cfg.num_layers = 2;
  cfg.latent_dim = 32;
  Rng rng(7);
  DenoiserBackbone model(cfg, rng);
  Rng data(70);

  const LatentGrid x_t = data.normal_grid(30, 32);
  for (int cond_len : {1, 5, 40}) {
    const Eigen::MatrixXf cond = data.normal_grid(cfg.cond_dim, cond_len).matrix();
    const LatentGrid pred = model.denoise_forward(x_t, 500, cond);
    REQUIRE_TRUE(out, pred.rows() == x_t.rows() && pred.cols() == x_t.cols(),
                 "shape mismatch at cond_len=" + std::to_string(cond_len));
  }

  // gradients must reach the text, speaker, and timing embeddings
  auto text = ad::input(data.normal_grid(cfg.cond_dim, 6).matrix());
  auto speaker = ad::input(data.normal_grid(cfg.cond_dim, 1).matrix());
  auto timing = ad::input(data.normal_grid(cfg.cond_dim, 1).matrix());
  auto cond = ad::concat_cols({timing, speaker, text});
  auto pred = model.forward_node(ad::constant(x_t.matrix().transpose()), 123, cond);
  ad::backward(ad::mse(pred, ad::constant(ad::Mat::Zero(32, 30))));
  REQUIRE_TRUE(out, text->grad.size() > 0 && text->grad.norm() > 0.0f, "no text gradient");
  REQUIRE_TRUE(out, speaker->grad.size() > 0 && speaker->grad.norm() > 0.0f, "no speaker gradient");
  REQUIRE_TRUE(out, timing->grad.size() > 0 && timing->grad.norm() > 0.0f, "no timing gradient");
  out.detail << "lengths {1,5,40} preserved; grad norms: text=" << text->grad.norm()
             << " speaker=" << speaker->grad.norm() << " timing=" << timing->grad.norm();
  return out;
}

Outcome criterion_8_codec_overfit() {
  Outcome out;
  const auto clips = toy_clips();
  RunConfig cfg = toy_codec_config(9, 32);
  cfg.codec_training.steps = 2000;
  cfg.codec_training.weights.adv_warmup_steps = 1200;
  CodecTrainer trainer(cfg, clips);

  auto eval_l1 = [&] {
    double total = 0.0;
    for (const auto& clip : clips) total += reconstruction_loss(clip, trainer.reconstruct(clip)).first;
    return total / static_cast<double>(clips.size());
  };
  const double l1_step0 = eval_l1();
  trainer.run();

  const double l1_final = eval_l1();
  double snr_sum = 0.0;
  for (const auto& clip : clips) snr_sum += snr_db(clip, trainer.reconstruct(clip));
  const double snr_mean = snr_sum / static_cast<double>(clips.size());

  REQUIRE_TRUE(out, trainer.current_step() == 2000, "training did not reach 2000 steps");
  REQUIRE_TRUE(out, snr_mean >= 10.0, "mean SNR below 10 dB");
  REQUIRE_TRUE(out, l1_final * 5.0 <= l1_step0, "l1 not reduced 5x");
  out.detail << "2000 steps @ lr 2e-3: mean SNR " << snr_mean << " dB, l1 " << l1_step0 << " -> "
             << l1_final << " (" << l1_step0 / l1_final << "x)";
  return out;
}

Outcome criterion_9_table2_trend() {
  Outcome out;
  const auto clips = toy_clips();
  const int budget = 1000;  // identical training budget per setting

  auto trained_stft_dist = [&](int S, int d) {
    RunConfig cfg = toy_codec_config(S, d);
    cfg.codec_training.steps = budget;
    cfg.codec_training.weights.adv_warmup_steps = budget + 1;  // reconstruction-only budget
    CodecTrainer trainer(cfg, clips);
    trainer.run();
    double total = 0.0;
    for (const auto& clip : clips) total += stft_distance(clip, trainer.reconstruct(clip));
    return total / static_cast<double>(clips.size());
  };

  const double best = trained_stft_dist(9, 32);
  const double mid = trained_stft_dist(2, 18);
  const double worst = trained_stft_dist(1, 32);
  REQUIRE_TRUE(out, best <= mid, "S=9,d=32 not <= S=2,d=18");
  REQUIRE_TRUE(out, mid <= worst, "S=2,d=18 not <= S=1,d=32");
  out.detail << "stft_dist: S9d32=" << best << " <= S2d18=" << mid << " <= S1d32=" << worst;
  return out;
}

Outcome criterion_10_tts_overfit() {
  Outcome out;
  const auto clips = toy_clips();

  // stage 1: a reconstruction-only codec good enough to carry the latents
  RunConfig cfg = toy_codec_config(9, 32);
  cfg.codec_training.steps = 1200;
  cfg.codec_training.weights.adv_warmup_steps = cfg.codec_training.steps + 1;
  CodecTrainer codec_trainer(cfg, clips);
  codec_trainer.run();

  // stage 2: diffusion overfit on the 8 (text, audio) pairs
  cfg.backbone.num_layers = 4;
  cfg.backbone.num_heads = 4;
  cfg.backbone.model_dim = 128;
  cfg.backbone.cond_dim = 128;
  cfg.backbone.max_seq_len = 256;
  cfg.text_encoder.dim = 128;
  cfg.text_encoder.num_layers = 2;
  cfg.speaker_encoder.dim = 128;
  cfg.tts_training.steps = 4000;
  cfg.tts_training.batch_size = 8;
  cfg.tts_training.lr = 1e-4f;  // AdamW diffusion learning rate
  cfg.tts_training.log_every = 0;

  std::vector<TtsExample> examples;
  for (int i = 0; i < 8; ++i) examples.push_back({kToySentences[i], clips[i]});
  TtsTrainer tts_trainer(cfg, codec_trainer.model(), examples);
  tts_trainer.run();

  const NoiseSchedule& schedule = tts_trainer.schedule();
  auto synth = [&](const std::string& text, const Waveform& reference) {
    SynthesisRequest req;
    req.text = text;
    req.reference = reference;
    req.duration = {1.0, DurationSource::heuristic};
    req.seed = 99;
    req.num_inference_steps = 100;
    return synthesize(tts_trainer.model(), codec_trainer.model(), schedule, req).wave;
  };

  double matched_sum = 0.0, mismatched_sum = 0.0;
  const std::vector<std::pair<int, int>> probes = {{0, 4}, {2, 6}, {5, 1}};
  for (const auto& [i, j] : probes) {
    const double matched = mel_ssim(clips[i], synth(kToySentences[i], clips[i]));
    const double mismatched = mel_ssim(clips[i], synth(kToySentences[j], clips[i]));
    matched_sum += matched;
    mismatched_sum += mismatched;
    out.detail << "pair(" << i << "," << j << "): matched=" << matched
               << " mismatched=" << mismatched << "; ";
  }
  const double margin = (matched_sum - mismatched_sum) / static_cast<double>(probes.size());
  REQUIRE_TRUE(out, margin >= 0.15, "mel_ssim margin below 0.15");
  out.detail << "mean margin=" << margin;
  return out;
}

Outcome criterion_11_determinism_and_resume() {
  Outcome out;

  // fixed-seed synthesis is byte-identical at the WAV level
  RunConfig cfg = toy_codec_config(9, 32);
  cfg.backbone.num_layers = 2;
  cfg.backbone.num_heads = 4;
  cfg.backbone.model_dim = 64;
  cfg.backbone.cond_dim = 64;
  cfg.backbone.max_seq_len = 256;
  cfg.text_encoder.dim = 64;
  cfg.text_encoder.num_layers = 1;
  cfg.speaker_encoder.dim = 64;

  Rng rng(11);
  TtsModel tts(cfg, rng);
  Rng crng(11);
  CodecModel codec(cfg.codec, crng);
  const NoiseSchedule schedule = make_schedule();

  SynthesisRequest req;
  req.text = "determinism check";
  req.reference = testutil::speech_like_clip(111, 16000);
  req.duration = {1.2, DurationSource::heuristic};
  req.seed = 31337;
  req.num_inference_steps = 50;

  auto wav_bytes = [&] {
    const SynthesisResult r = synthesize(tts, codec, schedule, req);
    const std::string path = "acceptance_determinism.wav";
    write_wav(path, r.wave, cfg.codec.sample_rate);
    std::ifstream is(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    std::remove(path.c_str());
    return bytes;
  };
  const std::string first = wav_bytes();
  const std::string second = wav_bytes();
  REQUIRE_TRUE(out, !first.empty() && first == second, "synthesize not byte-identical");

  // resumed codec training matches the uninterrupted loss trajectory
  RunConfig tcfg = toy_codec_config(9, 32);
  tcfg.codec.base_channels = 8;
  tcfg.codec.max_channels = 16;
  tcfg.codec_training.batch_size = 2;
  tcfg.codec_training.crop_samples = 960;
  tcfg.codec_training.weights.adv_warmup_steps = 4;
  tcfg.codec_training.disc_scales = 2;
  tcfg.codec_training.disc_base_channels = 4;
  const auto clips = toy_clips(1920);

  CodecTrainer full(tcfg, clips);
  std::vector<double> losses;
  for (int i = 0; i < 10; ++i) losses.push_back(full.run_step().total_g);

  CodecTrainer half(tcfg, clips);
  for (int i = 0; i < 5; ++i) half.run_step();
  const std::string ckpt = "acceptance_resume.ckpt";
  half.save(ckpt);
  CodecTrainer resumed(tcfg, clips);
  resumed.resume_from(ckpt);
  double max_delta = 0.0;
  for (int i = 5; i < 10; ++i)
    max_delta = std::max(max_delta,
                         std::abs(resumed.run_step().total_g - losses[static_cast<std::size_t>(i)]));
  std::remove(ckpt.c_str());
  REQUIRE_TRUE(out, max_delta <= 1e-6, "resumed losses deviate beyond 1e-6");
  out.detail << "wav bytes identical; resume max loss delta " << max_delta;
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "quantizer lattice suite (S in {1,2,9}, 1e5 inputs each)", criterion_1_quantizer_lattice},
      {2, "bitrate identity and frame arithmetic", criterion_2_bitrate_identity},
      {3, "straight-through gradient contract (100 batches)", criterion_3_ste_contract},
      {4, "SQC1 pack/serialize round trip (1e3 grids)", criterion_4_sqc1_roundtrip},
      {5, "DDPM forward marginals (Monte Carlo, 3 sigma)", criterion_5_forward_marginals},
      {6, "final-prediction projection and sample shapes", criterion_6_projection_and_shape},
      {7, "in-context conditioning contract", criterion_7_conditioning_contract},
      {8, "codec toy overfit (2000 steps, lr 2e-3)", criterion_8_codec_overfit},
      {9, "quantizer-setting quality ordering at equal budgets", criterion_9_table2_trend},
      {10, "TTS toy overfit, matched vs mismatched text", criterion_10_tts_overfit},
      {11, "determinism and training resume", criterion_11_determinism_and_resume},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    const auto start = Clock::now();
    Outcome out;
    try {
      out = entry.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    failures += out.pass ? 0 : 1;
    std::cout << (out.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << entry.id << ". "
              << entry.name << "  [" << std::fixed << std::setprecision(1) << seconds << "s]  "
              << out.detail.str() << "\n"
              << std::defaultfloat;
    std::cout.flush();
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
            << "\n";
  return failures == 0 ? 0 : 1;
}
