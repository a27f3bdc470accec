#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "klemu/errors.hpp"

namespace klemu::codec {

// -- base64 -------------------------------------------------------------

inline std::string base64_encode(const std::uint8_t* data, std::size_t n) {
  static constexpr char table[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= n; i += 3) {
    const std::uint32_t v = (std::uint32_t(data[i]) << 16) |
                            (std::uint32_t(data[i + 1]) << 8) | data[i + 2];
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back(table[v & 63]);
  }
  const std::size_t rem = n - i;
  if (rem == 1) {
    const std::uint32_t v = std::uint32_t(data[i]) << 16;
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.append("==");
  } else if (rem == 2) {
    const std::uint32_t v = (std::uint32_t(data[i]) << 16) | (std::uint32_t(data[i + 1]) << 8);
    out.push_back(table[(v >> 18) & 63]);
    out.push_back(table[(v >> 12) & 63]);
    out.push_back(table[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline int base64_digit(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

inline std::vector<std::uint8_t> base64_decode(std::string_view s) {
  if (s.size() % 4 != 0) throw DataError("base64: length must be a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(s.size() / 4 * 3);
  for (std::size_t i = 0; i < s.size(); i += 4) {
    int pad = 0;
    std::uint32_t v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = s[i + k];
      if (c == '=') {
        // Padding only in the last two slots of the final quartet.
        if (i + 4 != s.size() || k < 2) throw DataError("base64: misplaced padding");
        ++pad;
        v <<= 6;
        continue;
      }
      if (pad > 0) throw DataError("base64: data after padding");
      const int d = base64_digit(c);
      if (d < 0) throw DataError("base64: invalid character");
      v = (v << 6) | std::uint32_t(d);
    }
    out.push_back(std::uint8_t((v >> 16) & 0xFF));
    if (pad < 2) out.push_back(std::uint8_t((v >> 8) & 0xFF));
    if (pad < 1) out.push_back(std::uint8_t(v & 0xFF));
  }
  return out;
}

// -- doubles <-> little-endian bytes ------------------------------------

inline void append_double_le(std::vector<std::uint8_t>& buf, double x) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) buf.push_back(std::uint8_t((bits >> (8 * b)) & 0xFF));
}

inline double read_double_le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

/// Encode a double array as base64 of its little-endian IEEE-754 bytes.
inline std::string encode_doubles(const double* data, std::size_t n) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(8 * n);
  for (std::size_t i = 0; i < n; ++i) append_double_le(bytes, data[i]);
  return base64_encode(bytes.data(), bytes.size());
}

inline std::vector<double> decode_doubles(std::string_view b64) {
  const auto bytes = base64_decode(b64);
  if (bytes.size() % 8 != 0) throw DataError("double array: byte count not a multiple of 8");
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = read_double_le(bytes.data() + 8 * i);
  return out;
}

// -- FNV-1a 64 ------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= std::uint8_t(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view s) {
  static constexpr char digits[] = "0123456789abcdef";
  const std::uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 0; i < 16; ++i) out[15 - i] = digits[(h >> (4 * i)) & 0xF];
  return out;
}

}  // namespace klemu::codec
