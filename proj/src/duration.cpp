#include "sqtts/duration.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace sqtts {

const char* to_string(DurationSource s) {
  switch (s) {
    case DurationSource::waveform: return "waveform";
    case DurationSource::heuristic: return "heuristic";
    case DurationSource::llm: return "llm";
  }
  return "unknown";
}

DurationEstimate duration_from_waveform(const Waveform& w, int sample_rate) {
  if (w.size() == 0) throw std::invalid_argument("duration_from_waveform: empty waveform");
  if (sample_rate <= 0) throw std::invalid_argument("duration_from_waveform: bad sample rate");
  return {static_cast<double>(w.size()) / sample_rate, DurationSource::waveform};
}

int count_words(const std::string& text) {
  int words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

DurationEstimate estimate_duration_heuristic(const std::string& text, double words_per_second,
                                             double max_seconds) {
  if (text.empty() || count_words(text) == 0)
    throw std::invalid_argument("estimate_duration_heuristic: empty text rejected");
  if (!(words_per_second > 0.0))
    throw std::invalid_argument("estimate_duration_heuristic: rate must be positive");
  const double raw = count_words(text) / words_per_second;
  return {std::clamp(raw, kMinDurationSeconds, max_seconds), DurationSource::heuristic};
}

std::optional<double> parse_seconds(const std::string& response) {
  const char* p = response.c_str();
  const char* end = p + response.size();
  while (p < end) {
    if (std::isdigit(static_cast<unsigned char>(*p)) ||
        (*p == '-' && p + 1 < end && std::isdigit(static_cast<unsigned char>(p[1])))) {
      char* after = nullptr;
      const double v = std::strtod(p, &after);
      if (after != p) return v;
    }
    ++p;
  }
  return std::nullopt;
}

LlmDurationClient::LlmDurationClient(LlmClientConfig cfg, Transport transport)
    : cfg_(std::move(cfg)), transport_(std::move(transport)) {
  if (!transport_ && !cfg_.endpoint.empty()) transport_ = make_http_transport(cfg_);
}

std::optional<double> LlmDurationClient::try_llm(const std::string& text) {
  if (!transport_) return std::nullopt;

  nlohmann::json cache;
  const std::string key = cfg_.prompt + "\x1f" + text;
  if (!cfg_.cache_path.empty()) {
    std::ifstream is(cfg_.cache_path);
    if (is) {
      cache = nlohmann::json::parse(is, nullptr, false);
      if (cache.is_object() && cache.contains(key) && cache[key].is_number())
        return cache[key].get<double>();
      if (!cache.is_object()) cache = nlohmann::json::object();
    } else {
      cache = nlohmann::json::object();
    }
  }

  const auto body = transport_(cfg_.prompt, text);
  if (!body) return std::nullopt;
  const auto seconds = parse_seconds(*body);
  if (!seconds) return std::nullopt;
  if (!(*seconds > 0.0) || *seconds > cfg_.max_seconds) return std::nullopt;

  if (!cfg_.cache_path.empty()) {
    cache[key] = *seconds;
    std::ofstream os(cfg_.cache_path);
    if (os) os << cache.dump();
  }
  return seconds;
}

DurationEstimate LlmDurationClient::estimate(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("estimate_duration_llm: empty text rejected");
  if (auto seconds = try_llm(text)) return {*seconds, DurationSource::llm};
  ++fallback_count_;
  std::cerr << "duration: llm estimate unavailable, falling back to heuristic\n";
  return estimate_duration_heuristic(text, cfg_.fallback_words_per_second, cfg_.max_seconds);
}

LlmDurationClient::Transport make_http_transport(const LlmClientConfig& cfg) {
  return [cfg](const std::string& prompt, const std::string& text) -> std::optional<std::string> {
    const auto scheme_end = cfg.endpoint.find("://");
    if (scheme_end == std::string::npos) return std::nullopt;
    const auto path_start = cfg.endpoint.find('/', scheme_end + 3);
    const std::string base =
        path_start == std::string::npos ? cfg.endpoint : cfg.endpoint.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : cfg.endpoint.substr(path_start);

    httplib::Client client(base);
    client.set_connection_timeout(static_cast<time_t>(cfg.timeout_seconds), 0);
    client.set_read_timeout(static_cast<time_t>(cfg.timeout_seconds), 0);
    httplib::Headers headers;
    if (!cfg.auth_token_env.empty()) {
      if (const char* token = std::getenv(cfg.auth_token_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }
    const nlohmann::json payload = {{"prompt", prompt}, {"text", text}};
    auto res = client.Post(path, headers, payload.dump(), "application/json");
    if (!res || res->status != 200) return std::nullopt;
    return res->body;
  };
}

}  // namespace sqtts
