#include "sqtts/codes_io.hpp"

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace sqtts {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'C', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("SQC1: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_codes(std::ostream& os, const CodeGrid& codes, const QuantizerConfig& cfg) {
  cfg.validate();
  if (codes.cols() != cfg.latent_dim)
    throw std::invalid_argument("write_codes: code width does not match latent_dim");
  const int max_index = 2 * cfg.scale;
  const int width = bits_per_dim(cfg);
  const std::size_t bytes_per_frame = (static_cast<std::size_t>(cfg.latent_dim) * width + 7) / 8;

  os.write(kMagic, 4);
  put_u32(os, static_cast<std::uint32_t>(cfg.scale));
  put_u32(os, static_cast<std::uint32_t>(cfg.latent_dim));
  put_u32(os, static_cast<std::uint32_t>(codes.rows()));

  std::vector<unsigned char> frame(bytes_per_frame);
  for (Eigen::Index r = 0; r < codes.rows(); ++r) {
    std::fill(frame.begin(), frame.end(), 0);
    std::size_t bit = 0;
    for (Eigen::Index c = 0; c < codes.cols(); ++c) {
      const std::int32_t idx = codes(r, c);
      if (idx < 0 || idx > max_index)
        throw std::invalid_argument("write_codes: index out of range");
      for (int k = 0; k < width; ++k, ++bit)
        if ((idx >> k) & 1) frame[bit >> 3] |= static_cast<unsigned char>(1u << (bit & 7));
    }
    os.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  }
  if (!os) throw std::runtime_error("write_codes: stream write failed");
}

CodeGrid read_codes(std::istream& is, QuantizerConfig& cfg_out) {
  char magic[4];
  is.read(magic, 4);
  if (!is || !std::equal(magic, magic + 4, kMagic))
    throw std::runtime_error("SQC1: bad magic");
  const std::uint32_t scale = get_u32(is);
  const std::uint32_t dim = get_u32(is);
  const std::uint32_t frames = get_u32(is);
  if (scale < 1 || dim < 1) throw std::runtime_error("SQC1: invalid header fields");
  cfg_out.scale = static_cast<int>(scale);
  cfg_out.latent_dim = static_cast<int>(dim);

  const int width = bits_per_dim(cfg_out);
  const int max_index = 2 * cfg_out.scale;
  const std::size_t bytes_per_frame = (static_cast<std::size_t>(dim) * width + 7) / 8;

  CodeGrid codes(frames, dim);
  std::vector<unsigned char> frame(bytes_per_frame);
  for (std::uint32_t r = 0; r < frames; ++r) {
    is.read(reinterpret_cast<char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    if (!is) throw std::runtime_error("SQC1: truncated payload");
    std::size_t bit = 0;
    for (std::uint32_t c = 0; c < dim; ++c) {
      std::int32_t idx = 0;
      for (int k = 0; k < width; ++k, ++bit)
        if (frame[bit >> 3] & (1u << (bit & 7))) idx |= (1 << k);
      if (idx > max_index) throw std::runtime_error("SQC1: index out of range in payload");
      codes(r, c) = idx;
    }
  }
  return codes;
}

void save_codes(const std::string& path, const CodeGrid& codes, const QuantizerConfig& cfg) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_codes: cannot open " + path);
  write_codes(os, codes, cfg);
}

CodeGrid load_codes(const std::string& path, QuantizerConfig& cfg_out) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_codes: cannot open " + path);
  return read_codes(is, cfg_out);
}

}  // namespace sqtts
