#pragma once

#include <iosfwd>
#include <string>

#include "sqtts/quantizer.hpp"

namespace sqtts {

// SQC1 stream: 16-byte header {magic "SQC1", u32 S, u32 d, u32 num_frames},
// all little-endian, followed by one row of packed indices per frame. Each
// index takes ceil(log2(2S+1)) bits, packed LSB-first; every frame is padded
// up to a byte boundary so frames stay byte-addressable.
void write_codes(std::ostream& os, const CodeGrid& codes, const QuantizerConfig& cfg);
CodeGrid read_codes(std::istream& is, QuantizerConfig& cfg_out);

void save_codes(const std::string& path, const CodeGrid& codes, const QuantizerConfig& cfg);
CodeGrid load_codes(const std::string& path, QuantizerConfig& cfg_out);

}  // namespace sqtts
