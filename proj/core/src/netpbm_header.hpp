#pragma once

// Token reader for the ASCII headers of PFM and PGM files.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "stratdepth/error.hpp"

namespace stratdepth::detail {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, std::string_view format,
               bool allow_comments)
      : bytes_(bytes), format_(format), comments_(allow_comments) {}

  std::string_view token() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !is_space(bytes_[pos_]) &&
           pos_ - start < kMaxToken) {
      ++pos_;
    }
    if (pos_ == start) fail_truncated("header ends early");
    if (pos_ < bytes_.size() && !is_space(bytes_[pos_])) {
      throw Error(ErrorCode::kFormatError,
                  std::string(format_) + ": header token too long");
    }
    return {reinterpret_cast<const char*>(bytes_.data()) + start, pos_ - start};
  }

  std::uint64_t dimension(const char* what) {
    const auto t = token();
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v == 0 ||
        v > kMaxDimension) {
      throw Error(ErrorCode::kFormatError, std::string(format_) + ": bad " +
                                               what + " '" + std::string(t) +
                                               "'");
    }
    return v;
  }

  double real(const char* what) {
    const auto t = token();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) {
      throw Error(ErrorCode::kFormatError, std::string(format_) + ": bad " +
                                               what + " '" + std::string(t) +
                                               "'");
    }
    return v;
  }

  /// The header ends with exactly one whitespace byte before the payload.
  std::size_t end_of_header() {
    if (pos_ >= bytes_.size()) fail_truncated("missing payload");
    if (!is_space(bytes_[pos_])) {
      throw Error(ErrorCode::kFormatError,
                  std::string(format_) + ": header not terminated");
    }
    return pos_ + 1;
  }

 private:
  static constexpr std::size_t kMaxToken = 64;
  static constexpr std::uint64_t kMaxDimension = 1u << 30;

  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  }

  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (is_space(bytes_[pos_])) {
        ++pos_;
      } else if (comments_ && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  [[noreturn]] void fail_truncated(const char* what) const {
    throw Error(ErrorCode::kTruncatedError,
                std::string(format_) + ": " + what);
  }

  std::span<const std::uint8_t> bytes_;
  std::string_view format_;
  bool comments_;
  std::size_t pos_ = 2;  // past the two-byte magic
};

}  // namespace stratdepth::detail
