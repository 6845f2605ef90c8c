#include "sqtts/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sqtts/audio.hpp"
#include "sqtts/duration.hpp"

namespace sqtts {

namespace fs = std::filesystem;

Manifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_manifest: cannot open " + path);
  Manifest m;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object() || !j.contains("audio_path") || !j.contains("text") ||
        !j.contains("duration_seconds"))
      throw std::runtime_error("load_manifest: malformed record at line " + std::to_string(lineno));
    m.records.push_back({j["audio_path"].get<std::string>(), j["text"].get<std::string>(),
                         j["duration_seconds"].get<double>()});
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_manifest: cannot open " + path);
  for (const auto& r : manifest.records) {
    const nlohmann::json j = {
        {"audio_path", r.audio_path}, {"text", r.text}, {"duration_seconds", r.duration_seconds}};
    os << j.dump() << "\n";
  }
}

double median_words_per_second(const Manifest& manifest) {
  std::vector<double> rates;
  for (const auto& r : manifest.records)
    if (r.duration_seconds > 0.0) rates.push_back(count_words(r.text) / r.duration_seconds);
  if (rates.empty()) throw std::invalid_argument("median_words_per_second: empty manifest");
  std::sort(rates.begin(), rates.end());
  const std::size_t n = rates.size();
  return n % 2 == 1 ? rates[n / 2] : 0.5 * (rates[n / 2 - 1] + rates[n / 2]);
}

IngestResult ingest(const std::string& audio_dir, int expected_sample_rate,
                    double max_duration_seconds) {
  if (!fs::is_directory(audio_dir))
    throw std::invalid_argument("ingest: " + audio_dir + " is not a directory");

  std::vector<fs::path> wavs;
  for (const auto& entry : fs::directory_iterator(audio_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav") wavs.push_back(entry.path());
  std::sort(wavs.begin(), wavs.end());

  IngestResult result;
  for (const auto& wav_path : wavs) {
    try {
      const WavFile wav = read_wav(wav_path.string());
      if (wav.sample_rate != expected_sample_rate)
        throw std::runtime_error("sample rate " + std::to_string(wav.sample_rate) +
                                 ", expected " + std::to_string(expected_sample_rate));
      const double duration = static_cast<double>(wav.samples.size()) / wav.sample_rate;
      if (!(duration > 0.0) || duration > max_duration_seconds)
        throw std::runtime_error("duration " + std::to_string(duration) + "s out of (0, " +
                                 std::to_string(max_duration_seconds) + "]");

      fs::path txt_path = wav_path;
      txt_path.replace_extension(".txt");
      std::ifstream ts(txt_path);
      if (!ts) throw std::runtime_error("missing transcript " + txt_path.string());
      std::string text((std::istreambuf_iterator<char>(ts)), std::istreambuf_iterator<char>());
      while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
      if (text.empty()) throw std::runtime_error("empty transcript " + txt_path.string());

      result.manifest.records.push_back({wav_path.string(), text, duration});
    } catch (const std::exception& e) {
      ++result.skipped;
      result.warnings.push_back(wav_path.string() + ": " + e.what());
    }
  }
  if (!result.manifest.records.empty())
    result.median_words_per_second = median_words_per_second(result.manifest);
  return result;
}

}  // namespace sqtts
