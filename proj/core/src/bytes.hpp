#pragma once

// Internal byte-level helpers shared by the binary readers and writers.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stratdepth::detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

template <typename T>
T byteswap(T v) {
  auto raw = std::bit_cast<std::array<std::uint8_t, sizeof(T)>>(v);
  std::reverse(raw.begin(), raw.end());
  return std::bit_cast<T>(raw);
}

template <typename T>
T load(const std::uint8_t* p, std::endian order) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return order == std::endian::native ? v : byteswap(v);
}

template <typename T>
void store(std::vector<std::uint8_t>& out, T v, std::endian order) {
  if (order != std::endian::native) v = byteswap(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace stratdepth::detail
