#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qlm/model.hpp"
#include "qlm/random.hpp"

namespace qlm {

using TokenStream = std::vector<std::string>;

enum class TokenizeMode {
  whitespace,  // split on Unicode whitespace, lowercase ASCII letters
  chars,       // one token per scalar value, whitespace and punctuation skipped
};

std::optional<TokenizeMode> parse_tokenize_mode(std::string_view name);
std::string_view to_string(TokenizeMode mode);

struct Punctuation {
  bool use_defaults = true;  // ASCII, general and CJK punctuation blocks
  std::u32string extra;      // additional scalars to skip in char mode

  bool contains(char32_t cp) const noexcept;
};

/// Throws InvalidUtf8 on malformed input.
TokenStream tokenize(std::string_view text, TokenizeMode mode, const Punctuation& punct = {});

/// Reads and tokenizes one file. Throws IoError if it cannot be read.
TokenStream read_tokens(const std::filesystem::path& path, TokenizeMode mode);

struct ContextPair {
  WordId center;
  std::vector<WordId> context;  // up to `window` ids on each side, center excluded

  friend bool operator==(const ContextPair&, const ContextPair&) = default;
};

inline constexpr std::size_t kDefaultWindow = 5;
inline constexpr double kDefaultSubsample = 1e-4;

struct WindowConfig {
  std::size_t window = kDefaultWindow;
  double subsample_t = kDefaultSubsample;  // <= 0 or +inf disables subsampling
  std::uint64_t seed = 0;
};

/// Maps tokens to ids, dropping out-of-vocabulary tokens entirely.
std::vector<WordId> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab);

/// Keep probability for a word of relative frequency f: min(1, sqrt(t / f)).
double keep_probability(double relative_frequency, double subsample_t) noexcept;

/// Randomly drops frequent words (word2vec-style subsampling).
std::vector<WordId> subsample(std::span<const WordId> ids, const Vocabulary& vocab,
                              double subsample_t, Rng& rng);

/// Calls f(center, context) for every position of `ids`, skipping positions
/// whose context would be empty. `context` is reused between calls.
template <typename F>
void for_each_context(std::span<const WordId> ids, std::size_t window, F&& f) {
  std::vector<WordId> context;
  context.reserve(2 * window);
  const std::size_t n = ids.size();
  for (std::size_t pos = 0; pos < n; ++pos) {
    context.clear();
    const std::size_t lo = pos >= window ? pos - window : 0;
    const std::size_t hi = std::min(n, pos + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (j != pos) context.push_back(ids[j]);
    }
    if (!context.empty()) f(ids[pos], std::span<const WordId>(context));
  }
}

/// Full windowing pipeline: OOV removal, subsampling, context extraction.
/// Throws DomainError if window < 1.
std::vector<ContextPair> windows(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 const WindowConfig& config);

// ---------------------------------------------------------------- periods

struct PeriodEntry {
  std::string name;
  std::vector<std::filesystem::path> paths;
};

/// Periods in first-appearance order; a repeated period name appends files.
struct PeriodManifest {
  std::vector<PeriodEntry> periods;
};

/// Parses `period<TAB>path` lines; '#' lines and blank lines are skipped.
/// Relative paths are resolved against `base_dir`. Throws DomainError on a
/// malformed line and IoError on a path that does not exist.
PeriodManifest parse_manifest(std::string_view tsv, const std::filesystem::path& base_dir);
PeriodManifest load_manifest(const std::filesystem::path& path);

struct PeriodTokens {
  std::string name;
  TokenStream tokens;  // files concatenated in listed order
};

/// One token stream per period in manifest order. Throws DomainError naming
/// the first period that yields no tokens.
std::vector<PeriodTokens> partition_by_period(const PeriodManifest& manifest, TokenizeMode mode);

}  // namespace qlm
