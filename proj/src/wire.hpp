#pragma once

// little-endian byte composition shared by the binary file formats
#include <bit>
#include <cstdint>
#include <fstream>
#include <string>

#include "layoutkit/error.hpp"

namespace layoutkit::wire {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) {
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
  }
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) {
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
  }
}

inline void put_f32(std::string& out, float f) {
  put_u32(out, std::bit_cast<std::uint32_t>(f));
}

inline std::uint32_t get_u32(const std::string& s, std::size_t& pos) {
  if (pos + 4 > s.size()) raise(ErrorCode::Parse, "binary payload is truncated");
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + k]))
         << (8 * k);
  }
  pos += 4;
  return v;
}

inline std::uint64_t get_u64(const std::string& s, std::size_t& pos) {
  if (pos + 8 > s.size()) raise(ErrorCode::Parse, "binary payload is truncated");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[pos + k]))
         << (8 * k);
  }
  pos += 8;
  return v;
}

inline float get_f32(const std::string& s, std::size_t& pos) {
  return std::bit_cast<float>(get_u32(s, pos));
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) raise(ErrorCode::Io, "cannot open file for writing: " + path);
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) raise(ErrorCode::Io, "failed writing file: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) raise(ErrorCode::Io, "cannot open file: " + path);
  std::string data((std::istreambuf_iterator<char>(file)),
                   std::istreambuf_iterator<char>());
  if (file.bad()) raise(ErrorCode::Io, "failed reading file: " + path);
  return data;
}

}  // namespace layoutkit::wire
