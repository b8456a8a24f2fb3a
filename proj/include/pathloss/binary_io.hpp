#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>

#include "pathloss/errors.hpp"

namespace pathloss::binary {

static_assert(std::endian::native == std::endian::little,
              "binary containers are little-endian; add byte swapping for this host");

template <typename T>
  requires std::is_trivially_copyable_v<T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
  requires std::is_trivially_copyable_v<T>
T get(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("unexpected end of binary container");
  return value;
}

template <typename T>
void put_span(std::ostream& out, std::span<const T> values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size_bytes()));
}

template <typename T>
void get_span(std::istream& in, std::span<T> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!in) throw FormatError("unexpected end of binary container");
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in, std::uint64_t max_len = (1ull << 32)) {
  const auto n = get<std::uint64_t>(in);
  if (n > max_len) throw FormatError("string length out of range in binary container");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw FormatError("unexpected end of binary container");
  return s;
}

inline void expect_magic(std::istream& in, const char (&magic)[9]) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) {
    throw FormatError(std::string("bad container magic, expected ") + magic);
  }
}

inline void put_magic(std::ostream& out, const char (&magic)[9]) { out.write(magic, 8); }

}  // namespace pathloss::binary
