#include <doctest.h>

#include <sstream>

#include "sqtts/codes_io.hpp"
#include "sqtts/rng.hpp"

using namespace sqtts;

namespace {

CodeGrid random_codes(Rng& rng, int frames, const QuantizerConfig& cfg) {
  CodeGrid codes(frames, cfg.latent_dim);
  for (int r = 0; r < frames; ++r)
    for (int c = 0; c < cfg.latent_dim; ++c)
      codes(r, c) = static_cast<int>(rng.uniform_int(2 * cfg.scale + 1));
  return codes;
}

}  // namespace

TEST_CASE("SQC1 header layout is 16 bytes") {
  const QuantizerConfig cfg{9, 32};
  CodeGrid codes = CodeGrid::Zero(1, 32);
  std::ostringstream os;
  write_codes(os, codes, cfg);
  const std::string bytes = os.str();
  // 16-byte header + one frame of 32 * 5 bits = 160 bits = 20 bytes
  CHECK(bytes.size() == 16 + 20);
  CHECK(bytes.substr(0, 4) == "SQC1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 9);   // S, little-endian u32
  CHECK(static_cast<unsigned char>(bytes[8]) == 32);  // d
  CHECK(static_cast<unsigned char>(bytes[12]) == 1);  // frames
}

TEST_CASE("SQC1 round trip is bit exact") {
  Rng rng(21);
  for (int scale : {1, 2, 9}) {
    const QuantizerConfig cfg{scale, scale == 2 ? 18 : 32};
    for (int rep = 0; rep < 50; ++rep) {
      const int frames = 1 + static_cast<int>(rng.uniform_int(40));
      const CodeGrid codes = random_codes(rng, frames, cfg);

      std::stringstream ss;
      write_codes(ss, codes, cfg);
      const std::string first = ss.str();

      QuantizerConfig got;
      const CodeGrid back = read_codes(ss, got);
      CHECK(got.scale == cfg.scale);
      CHECK(got.latent_dim == cfg.latent_dim);
      REQUIRE(back.rows() == codes.rows());
      CHECK((back == codes).all());

      std::ostringstream os2;
      write_codes(os2, back, got);
      CHECK(os2.str() == first);  // byte-identical re-serialization
    }
  }
}

TEST_CASE("SQC1 rejects bad input") {
  const QuantizerConfig cfg{9, 4};

  std::istringstream bad_magic("XXXX0000000000000000");
  QuantizerConfig out;
  CHECK_THROWS_WITH_AS(read_codes(bad_magic, out), doctest::Contains("magic"), std::runtime_error);

  // truncated payload
  CodeGrid codes = CodeGrid::Zero(4, 4);
  std::ostringstream os;
  write_codes(os, codes, cfg);
  std::string bytes = os.str();
  bytes.resize(bytes.size() - 3);
  std::istringstream truncated(bytes);
  CHECK_THROWS_WITH_AS(read_codes(truncated, out), doctest::Contains("truncated"),
                       std::runtime_error);

  // out-of-range index rejected on write
  codes(0, 0) = 19;
  std::ostringstream os2;
  CHECK_THROWS_AS(write_codes(os2, codes, cfg), std::invalid_argument);
}

TEST_CASE("SQC1 file round trip") {
  Rng rng(4);
  const QuantizerConfig cfg{9, 8};
  const CodeGrid codes = random_codes(rng, 13, cfg);
  const std::string path = "test_codes_io.sqc";
  save_codes(path, codes, cfg);
  QuantizerConfig got;
  const CodeGrid back = load_codes(path, got);
  CHECK((back == codes).all());
  std::remove(path.c_str());
}
