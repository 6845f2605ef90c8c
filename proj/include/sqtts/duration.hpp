#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sqtts/audio.hpp"

namespace sqtts {

enum class DurationSource { waveform, heuristic, llm };

struct DurationEstimate {
  double seconds = 0.0;
  DurationSource source = DurationSource::heuristic;
};

const char* to_string(DurationSource s);

DurationEstimate duration_from_waveform(const Waveform& w, int sample_rate);

inline constexpr double kMinDurationSeconds = 0.5;
inline constexpr double kDefaultMaxDurationSeconds = 30.0;

// word_count / words_per_second, clamped to [0.5, max]
DurationEstimate estimate_duration_heuristic(const std::string& text, double words_per_second,
                                             double max_seconds = kDefaultMaxDurationSeconds);

int count_words(const std::string& text);

struct LlmClientConfig {
  std::string endpoint;                          // e.g. http://localhost:8080/estimate
  std::string auth_token_env = "SQTTS_LLM_TOKEN";
  double timeout_seconds = 10.0;
  double max_seconds = kDefaultMaxDurationSeconds;
  double fallback_words_per_second = 2.5;
  std::string cache_path;                        // optional JSON key-value cache
  // the upstream reading-time prompt is not published; this default is our
  // own wording and can be overridden in config
  std::string prompt =
      "Estimate how many seconds it takes to read the following sentence aloud "
      "at a natural pace. Reply with a single number of seconds.";
};

// Duration estimates from an external text-completion endpoint. Every
// failure path (transport, parse, range) falls back to the heuristic, so
// synthesis never aborts and no test needs a live endpoint.
class LlmDurationClient {
 public:
  using Transport =
      std::function<std::optional<std::string>(const std::string& prompt, const std::string& text)>;

  explicit LlmDurationClient(LlmClientConfig cfg, Transport transport = {});

  DurationEstimate estimate(const std::string& text);

  int fallback_count() const { return fallback_count_; }

 private:
  std::optional<double> try_llm(const std::string& text);

  LlmClientConfig cfg_;
  Transport transport_;
  int fallback_count_ = 0;
};

// POSTs {"prompt":..., "text":...} as JSON and returns the raw body;
// Authorization: Bearer <token> is attached when the env var is set.
LlmDurationClient::Transport make_http_transport(const LlmClientConfig& cfg);

// first numeric token in a response, if any
std::optional<double> parse_seconds(const std::string& response);

}  // namespace sqtts
