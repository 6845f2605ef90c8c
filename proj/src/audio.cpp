#include "sqtts/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sqtts {

namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t rd_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void wr_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void wr_u16(std::vector<unsigned char>& buf, std::uint16_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

WavFile read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: " + path + " is not a RIFF/WAVE file");

  int sample_rate = 0, channels = 0, bits = 0;
  const unsigned char* pcm = nullptr;
  std::size_t pcm_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const char* id = reinterpret_cast<const char*>(data.data() + pos);
    const std::uint32_t len = rd_u32(data.data() + pos + 4);
    if (pos + 8 + len > data.size()) throw std::runtime_error("read_wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw std::runtime_error("read_wav: short fmt chunk");
      const unsigned char* f = data.data() + pos + 8;
      const std::uint16_t format = rd_u16(f);
      channels = rd_u16(f + 2);
      sample_rate = static_cast<int>(rd_u32(f + 4));
      bits = rd_u16(f + 14);
      if (format != 1) throw std::runtime_error("read_wav: only PCM supported");
    } else if (std::memcmp(id, "data", 4) == 0) {
      pcm = data.data() + pos + 8;
      pcm_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }
  if (!pcm || sample_rate == 0) throw std::runtime_error("read_wav: missing fmt or data chunk");
  if (channels != 1) throw std::runtime_error("read_wav: expected mono, got " + std::to_string(channels) + " channels");
  if (bits != 16) throw std::runtime_error("read_wav: expected 16-bit PCM, got " + std::to_string(bits));

  const std::size_t n = pcm_len / 2;
  WavFile wav;
  wav.sample_rate = sample_rate;
  wav.samples.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s = static_cast<std::int16_t>(pcm[2 * i] | (pcm[2 * i + 1] << 8));
    wav.samples(static_cast<Eigen::Index>(i)) = static_cast<float>(s) / 32768.0f;
  }
  return wav;
}

void write_wav(const std::string& path, const Waveform& samples, int sample_rate) {
  if (sample_rate <= 0) throw std::invalid_argument("write_wav: sample_rate must be positive");
  const std::size_t n = static_cast<std::size_t>(samples.size());
  std::vector<unsigned char> buf;
  buf.reserve(44 + 2 * n);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  wr_u32(buf, static_cast<std::uint32_t>(36 + 2 * n));
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  wr_u32(buf, 16);
  wr_u16(buf, 1);   // PCM
  wr_u16(buf, 1);   // mono
  wr_u32(buf, static_cast<std::uint32_t>(sample_rate));
  wr_u32(buf, static_cast<std::uint32_t>(sample_rate * 2));
  wr_u16(buf, 2);   // block align
  wr_u16(buf, 16);  // bits
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  wr_u32(buf, static_cast<std::uint32_t>(2 * n));
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const long q = std::lrintf(std::clamp(samples(i), -1.0f, 1.0f) * 32768.0f);
    const std::int16_t s = static_cast<std::int16_t>(std::clamp<long>(q, -32768, 32767));
    buf.push_back(static_cast<unsigned char>(s & 0xff));
    buf.push_back(static_cast<unsigned char>((s >> 8) & 0xff));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("write_wav: write failed for " + path);
}

}  // namespace sqtts
