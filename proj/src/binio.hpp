#pragma once

// Little-endian primitives shared by the policy and LUT file formats.

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace clarq::binio {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 8);
}

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

inline void put_u16(std::ostream& out, std::uint16_t v) {
  const char buf[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(buf, 2);
}

inline void put_i32(std::ostream& out, std::int32_t v) { put_u32(out, static_cast<std::uint32_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void read_exact(std::istream& in, char* buf, std::size_t n) {
  if (!in.read(buf, static_cast<std::streamsize>(n)))
    throw std::runtime_error("unexpected end of binary record");
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char buf[8];
  read_exact(in, reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

inline std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  read_exact(in, reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

inline std::uint16_t get_u16(std::istream& in) {
  unsigned char buf[2];
  read_exact(in, reinterpret_cast<char*>(buf), 2);
  return static_cast<std::uint16_t>(buf[0] | (buf[1] << 8));
}

inline std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_magic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void expect_magic(std::istream& in, std::string_view magic) {
  char buf[16] = {};
  read_exact(in, buf, magic.size());
  if (std::string_view(buf, magic.size()) != magic)
    throw std::runtime_error("bad magic: expected " + std::string(magic));
}

}  // namespace clarq::binio
