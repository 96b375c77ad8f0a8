#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "kgeval/common.hpp"

namespace kgeval {

// Little-endian binary primitives shared by the vector and index file formats.

template <typename T>
void write_le(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  is.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!is) throw IoError("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

inline void write_magic(std::ostream& os, const char* magic) {
  os.write(magic, static_cast<std::streamsize>(std::strlen(magic)));
}

inline void expect_magic(std::istream& is, const char* magic, const char* what) {
  const size_t len = std::strlen(magic);
  std::string got(len, '\0');
  is.read(got.data(), static_cast<std::streamsize>(len));
  if (!is || got != magic)
    throw IoError(std::string(what) + ": bad magic, not a recognized file");
}

}  // namespace kgeval
