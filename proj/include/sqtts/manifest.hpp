#pragma once

#include <string>
#include <vector>

namespace sqtts {

struct ManifestRecord {
  std::string audio_path;
  std::string text;
  double duration_seconds = 0.0;
};

struct Manifest {
  std::vector<ManifestRecord> records;
};

// line-delimited JSON records
Manifest load_manifest(const std::string& path);
void save_manifest(const std::string& path, const Manifest& manifest);

double median_words_per_second(const Manifest& manifest);

struct IngestResult {
  Manifest manifest;
  int skipped = 0;
  std::vector<std::string> warnings;
  double median_words_per_second = 0.0;
};

// Scans a directory of 16 kHz mono WAVs with sidecar .txt transcripts.
// Unreadable or invalid entries are skipped with a warning, never fatal.
IngestResult ingest(const std::string& audio_dir, int expected_sample_rate = 16000,
                    double max_duration_seconds = 30.0);

}  // namespace sqtts
