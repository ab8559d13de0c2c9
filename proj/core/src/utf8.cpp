#include "qlm/utf8.hpp"

#include <optional>

#include "qlm/errors.hpp"

namespace qlm::utf8 {
namespace {

// Returns the decoded scalar and its length, or nullopt if malformed.
std::optional<CodePoint> next(std::string_view s, std::size_t i) noexcept {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  const unsigned char b0 = byte(i);
  if (b0 < 0x80) return CodePoint{b0, i, 1};

  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4, cp = b0 & 0x07, min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (i + len > s.size()) return std::nullopt;
  for (std::size_t k = 1; k < len; ++k) {
    const unsigned char b = byte(i + k);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return std::nullopt;
  return CodePoint{cp, i, len};
}

}  // namespace

bool is_valid(std::string_view bytes) noexcept {
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto cp = next(bytes, i);
    if (!cp) return false;
    i += cp->length;
  }
  return true;
}

std::vector<CodePoint> decode(std::string_view bytes) {
  std::vector<CodePoint> out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    auto cp = next(bytes, i);
    if (!cp) throw InvalidUtf8("invalid UTF-8 at byte offset " + std::to_string(i));
    out.push_back(*cp);
    i += cp->length;
  }
  return out;
}

bool is_whitespace(char32_t cp) noexcept {
  switch (cp) {
    case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
    case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

}  // namespace qlm::utf8
