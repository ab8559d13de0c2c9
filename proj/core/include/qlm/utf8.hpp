#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qlm::utf8 {

/// True when `bytes` is well-formed UTF-8 (no overlongs, surrogates or
/// code points above U+10FFFF).
bool is_valid(std::string_view bytes) noexcept;

struct CodePoint {
  char32_t value;
  std::size_t offset;  // byte offset of the first code unit
  std::size_t length;  // number of code units
};

/// Decodes every scalar value; throws InvalidUtf8 with the byte offset of the
/// first malformed sequence.
std::vector<CodePoint> decode(std::string_view bytes);

/// Unicode White_Space property.
bool is_whitespace(char32_t cp) noexcept;

}  // namespace qlm::utf8
