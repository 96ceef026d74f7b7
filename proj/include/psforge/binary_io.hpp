#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "psforge/errors.hpp"

namespace psforge {

// Little-endian primitives for the PSDS/PSDE binary formats.

inline void write_u16le(std::ostream& out, std::uint16_t v) {
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(bytes, 2);
}

inline void write_u32le(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 4);
}

inline void write_u64le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline void write_f32le(std::ostream& out, float v) {
  write_u32le(out, std::bit_cast<std::uint32_t>(v));
}

inline void read_bytes(std::istream& in, void* dst, size_t n, const std::string& what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw FormatError("truncated file while reading " + what);
  }
}

inline std::uint16_t read_u16le(std::istream& in, const std::string& what) {
  unsigned char bytes[2];
  read_bytes(in, bytes, 2, what);
  return static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
}

inline std::uint32_t read_u32le(std::istream& in, const std::string& what) {
  unsigned char bytes[4];
  read_bytes(in, bytes, 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline std::uint64_t read_u64le(std::istream& in, const std::string& what) {
  unsigned char bytes[8];
  read_bytes(in, bytes, 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline float read_f32le(std::istream& in, const std::string& what) {
  return std::bit_cast<float>(read_u32le(in, what));
}

}  // namespace psforge
