#include "qlm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qlm/errors.hpp"
#include "qlm/utf8.hpp"

namespace qlm {

std::optional<TokenizeMode> parse_tokenize_mode(std::string_view name) {
  if (name == "whitespace") return TokenizeMode::whitespace;
  if (name == "char" || name == "chars") return TokenizeMode::chars;
  return std::nullopt;
}

std::string_view to_string(TokenizeMode mode) {
  return mode == TokenizeMode::whitespace ? "whitespace" : "char";
}

bool Punctuation::contains(char32_t cp) const noexcept {
  if (extra.find(cp) != std::u32string::npos) return true;
  if (!use_defaults) return false;
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1: case 0x00AB: case 0x00B7: case 0x00BB: case 0x00BF:
      return true;
    default:
      break;
  }
  return (cp >= 0x2010 && cp <= 0x2027) ||  // dashes, quotes, ellipsis
         (cp >= 0x2030 && cp <= 0x205E) ||  // general punctuation
         (cp >= 0x3001 && cp <= 0x303F) ||  // CJK symbols and punctuation
         (cp >= 0xFE10 && cp <= 0xFE19) ||  // vertical forms
         (cp >= 0xFE30 && cp <= 0xFE4F) ||  // CJK compatibility forms
         (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
         (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

TokenStream tokenize(std::string_view text, TokenizeMode mode, const Punctuation& punct) {
  const auto cps = utf8::decode(text);
  TokenStream out;

  if (mode == TokenizeMode::chars) {
    for (const auto& cp : cps) {
      if (utf8::is_whitespace(cp.value) || punct.contains(cp.value)) continue;
      out.emplace_back(text.substr(cp.offset, cp.length));
    }
    return out;
  }

  std::string current;
  for (const auto& cp : cps) {
    if (utf8::is_whitespace(cp.value)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (cp.length == 1) {
      char c = text[cp.offset];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      current.push_back(c);
    } else {
      current.append(text.substr(cp.offset, cp.length));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TokenStream read_tokens(const std::filesystem::path& path, TokenizeMode mode) {
  const std::string text = read_file(path);
  try {
    return tokenize(text, mode);
  } catch (const InvalidUtf8& e) {
    throw InvalidUtf8(path.string() + ": " + e.what());
  }
}

std::vector<WordId> to_ids(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<WordId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) ids.push_back(*id);
  }
  return ids;
}

double keep_probability(double relative_frequency, double subsample_t) noexcept {
  if (!(subsample_t > 0.0) || std::isinf(subsample_t) || !(relative_frequency > 0.0)) return 1.0;
  return std::min(1.0, std::sqrt(subsample_t / relative_frequency));
}

std::vector<WordId> subsample(std::span<const WordId> ids, const Vocabulary& vocab,
                              double subsample_t, Rng& rng) {
  if (!(subsample_t > 0.0) || std::isinf(subsample_t) || vocab.total_count() == 0) {
    return {ids.begin(), ids.end()};
  }
  const double total = static_cast<double>(vocab.total_count());
  std::vector<double> keep(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    keep[i] = keep_probability(static_cast<double>(vocab.counts()[i]) / total, subsample_t);
  }
  std::vector<WordId> out;
  out.reserve(ids.size());
  for (WordId id : ids) {
    // One draw per token, even for words that are always kept, so the random
    // stream does not depend on the vocabulary's frequency profile.
    if (uniform01(rng) < keep[id]) out.push_back(id);
  }
  return out;
}

std::vector<ContextPair> windows(std::span<const std::string> tokens, const Vocabulary& vocab,
                                 const WindowConfig& config) {
  if (config.window < 1) throw DomainError("window must be at least 1");
  Rng rng(config.seed);
  const auto ids = subsample(to_ids(tokens, vocab), vocab, config.subsample_t, rng);
  std::vector<ContextPair> pairs;
  for_each_context(ids, config.window, [&](WordId center, std::span<const WordId> ctx) {
    pairs.push_back({center, {ctx.begin(), ctx.end()}});
  });
  return pairs;
}

// ---------------------------------------------------------------- periods

PeriodManifest parse_manifest(std::string_view tsv, const std::filesystem::path& base_dir) {
  PeriodManifest manifest;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= tsv.size()) {
    std::size_t end = tsv.find('\n', start);
    if (end == std::string_view::npos) end = tsv.size();
    std::string_view line = tsv.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == tsv.size()) break;
      continue;
    }

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == line.size()) {
      throw DomainError("manifest line " + std::to_string(line_no) +
                        ": expected 'period<TAB>path'");
    }
    std::string name(line.substr(0, tab));
    std::filesystem::path path(std::string(line.substr(tab + 1)));
    if (path.is_relative()) path = base_dir / path;
    if (!std::filesystem::exists(path)) {
      throw IoError("manifest line " + std::to_string(line_no) + ": file not found: " +
                    path.string());
    }

    auto it = std::find_if(manifest.periods.begin(), manifest.periods.end(),
                           [&](const PeriodEntry& p) { return p.name == name; });
    if (it == manifest.periods.end()) {
      manifest.periods.push_back({std::move(name), {std::move(path)}});
    } else {
      it->paths.push_back(std::move(path));
    }
    if (end == tsv.size()) break;
  }
  if (manifest.periods.empty()) throw DomainError("manifest lists no periods");
  return manifest;
}

PeriodManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

std::vector<PeriodTokens> partition_by_period(const PeriodManifest& manifest, TokenizeMode mode) {
  std::vector<PeriodTokens> out;
  out.reserve(manifest.periods.size());
  for (const auto& period : manifest.periods) {
    PeriodTokens pt{period.name, {}};
    for (const auto& path : period.paths) {
      auto tokens = read_tokens(path, mode);
      pt.tokens.insert(pt.tokens.end(), std::make_move_iterator(tokens.begin()),
                       std::make_move_iterator(tokens.end()));
    }
    if (pt.tokens.empty()) throw DomainError("period '" + period.name + "' contains no tokens");
    out.push_back(std::move(pt));
  }
  return out;
}

}  // namespace qlm
