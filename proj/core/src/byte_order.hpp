#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>

#include "augmotion/error.hpp"

namespace augmotion::detail {

// Fixed little-endian encoding regardless of host order.

template <typename UInt>
void append_le(std::string& out, UInt value) {
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename UInt>
UInt load_le(const char* p) {
  UInt value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    value |= static_cast<UInt>(static_cast<unsigned char>(p[i])) << (8 * i);
  return value;
}

inline void append_f64(std::string& out, double v) { append_le(out, std::bit_cast<std::uint64_t>(v)); }
inline void append_f32(std::string& out, float v) { append_le(out, std::bit_cast<std::uint32_t>(v)); }
inline double load_f64(const char* p) { return std::bit_cast<double>(load_le<std::uint64_t>(p)); }
inline float load_f32(const char* p) { return std::bit_cast<float>(load_le<std::uint32_t>(p)); }

/// magic(8) | u64 header length | header bytes | payload
struct FramedFile {
  std::string_view header;
  std::string_view payload;
};

inline std::string frame_file(std::string_view magic, std::string_view header) {
  std::string out(magic);
  append_le<std::uint64_t>(out, header.size());
  out.append(header);
  return out;
}

inline FramedFile split_framed(std::string_view bytes, std::string_view magic) {
  if (bytes.size() < magic.size() + 8 || bytes.substr(0, magic.size()) != magic)
    throw Error(ErrorKind::kParse, "bad magic: expected '" + std::string(magic) + "'");
  const auto len = load_le<std::uint64_t>(bytes.data() + magic.size());
  const std::size_t offset = magic.size() + 8;
  if (len > bytes.size() - offset)
    throw Error(ErrorKind::kParse, "header length " + std::to_string(len) + " exceeds file size");
  return {bytes.substr(offset, len), bytes.substr(offset + len)};
}

}  // namespace augmotion::detail
