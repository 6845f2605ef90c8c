#include "sqtts/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sqtts {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'C', 'K'};

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  buf.push_back(static_cast<unsigned char>(v & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  buf.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_bytes(std::vector<unsigned char>& buf, const void* p, std::size_t n) {
  const unsigned char* b = static_cast<const unsigned char*>(p);
  buf.insert(buf.end(), b, b + n);
}

void put_string(std::vector<unsigned char>& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  put_bytes(buf, s.data(), s.size());
}

struct Cursor {
  const unsigned char* p;
  std::size_t left;

  void need(std::size_t n) const {
    if (left < n) throw std::runtime_error("checkpoint: truncated file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                      (static_cast<std::uint32_t>(p[2]) << 16) |
                      (static_cast<std::uint32_t>(p[3]) << 24);
    p += 4;
    left -= 4;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    p += n;
    left -= n;
    return s;
  }
};

}  // namespace

std::uint32_t crc32(const unsigned char* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::vector<unsigned char> buf;
  put_bytes(buf, kMagic, 4);
  put_u32(buf, static_cast<std::uint32_t>(kCheckpointVersion));
  put_string(buf, ckpt.config.dump());

  put_u32(buf, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& [name, mat] : ckpt.arrays) {
    put_string(buf, name);
    put_u32(buf, static_cast<std::uint32_t>(mat.rows()));
    put_u32(buf, static_cast<std::uint32_t>(mat.cols()));
    put_bytes(buf, mat.data(), sizeof(float) * static_cast<std::size_t>(mat.size()));
  }
  put_u32(buf, static_cast<std::uint32_t>(ckpt.strings.size()));
  for (const auto& [name, s] : ckpt.strings) {
    put_string(buf, name);
    put_string(buf, s);
  }
  put_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 12) throw std::runtime_error("checkpoint: truncated file");
  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic, not a checkpoint file");

  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(buf[buf.size() - 4]) | (static_cast<std::uint32_t>(buf[buf.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(buf[buf.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(buf[buf.size() - 1]) << 24);
  if (crc32(buf.data(), buf.size() - 4) != stored_crc)
    throw std::runtime_error("checkpoint: checksum failure (file corrupt or tampered)");

  Cursor cur{buf.data() + 4, buf.size() - 8};
  const std::uint32_t version = cur.u32();
  if (version != static_cast<std::uint32_t>(kCheckpointVersion))
    throw std::runtime_error("checkpoint: version " + std::to_string(version) +
                             " not supported, expected " + std::to_string(kCheckpointVersion) +
                             " (no migration path)");

  Checkpoint ckpt;
  ckpt.config = nlohmann::json::parse(cur.str());
  const std::uint32_t num_arrays = cur.u32();
  for (std::uint32_t i = 0; i < num_arrays; ++i) {
    const std::string name = cur.str();
    const std::uint32_t rows = cur.u32();
    const std::uint32_t cols = cur.u32();
    const std::size_t bytes = sizeof(float) * static_cast<std::size_t>(rows) * cols;
    cur.need(bytes);
    Eigen::MatrixXf m(rows, cols);
    std::memcpy(m.data(), cur.p, bytes);
    cur.p += bytes;
    cur.left -= bytes;
    ckpt.arrays.emplace(name, std::move(m));
  }
  const std::uint32_t num_strings = cur.u32();
  for (std::uint32_t i = 0; i < num_strings; ++i) {
    const std::string name = cur.str();
    ckpt.strings.emplace(name, cur.str());
  }
  return ckpt;
}

}  // namespace sqtts
