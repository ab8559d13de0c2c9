#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qlm/linalg.hpp"

namespace qlm {

using WordId = std::uint32_t;

inline constexpr std::size_t kDefaultDim = 8;  // three qubits, 36 factor parameters

/// Ordered word list with frequencies. Ids are dense and follow insertion
/// order; they never change once assigned.
class Vocabulary {
 public:
  /// Appends a word. Throws DomainError on duplicates, InvalidUtf8 on bad bytes.
  WordId add(std::string word, std::uint64_t count);

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  const std::string& word(WordId id) const { return words_.at(id); }
  std::uint64_t count(WordId id) const { return counts_.at(id); }
  std::uint64_t total_count() const noexcept { return total_; }
  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  std::optional<WordId> find(std::string_view word) const;
  /// Throws OutOfVocabulary.
  WordId id_of(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, WordId, StringHash, std::equal_to<>> index_;
  std::uint64_t total_ = 0;
};

/// Streaming token counter. Feed any number of token sequences, then call
/// finish() to keep the words seen at least `min_count` times, in order of
/// first occurrence.
class VocabularyBuilder {
 public:
  void add(std::string_view token);
  void add(std::span<const std::string> tokens) {
    for (const auto& t : tokens) add(t);
  }
  /// Throws DomainError if min_count < 1 or nothing survives the threshold.
  Vocabulary finish(std::uint64_t min_count) const;

 private:
  Vocabulary seen_;
  std::vector<std::uint64_t> tallies_;
};

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count);

/// A vocabulary plus one packed Cholesky factor per word, stored contiguously.
class EmbeddingStore {
 public:
  /// Throws DomainError if `params` does not hold vocab.size() factors of
  /// dimension `dim` with nonnegative diagonals.
  EmbeddingStore(Vocabulary vocab, std::size_t dim, std::vector<double> params);

  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return vocab_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  /// Parameters per word, d(d+1)/2.
  std::size_t stride() const noexcept { return stride_; }
  bool is_complex() const noexcept { return false; }

  std::span<const double> factor_params(WordId id) const {
    return {params_.data() + static_cast<std::size_t>(id) * stride_, stride_};
  }
  std::span<double> factor_params(WordId id) {
    return {params_.data() + static_cast<std::size_t>(id) * stride_, stride_};
  }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> params() noexcept { return params_; }

  CholeskyFactor factor(WordId id) const;
  DensityMatrix density(WordId id) const { return cholesky_to_density(factor_params(id), dim_); }

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;

 private:
  Vocabulary vocab_;
  std::size_t dim_;
  std::size_t stride_;
  std::vector<double> params_;
};

/// Factors start at I/sqrt(dim) plus uniform noise of half-width noise/dim on
/// every entry (diagonal clamped at zero), so untrained words sit near the
/// maximally mixed state.
EmbeddingStore init_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed,
                               double noise = 0.1);

/// Throws OutOfVocabulary for unknown words.
DensityMatrix get_density(const EmbeddingStore& store, std::string_view word);

// QLM1 container, little-endian, no padding:
//   "QLM1" | u32 version=1 | u32 V | u32 d | u8 flags
//   V x (u32 byteLen | UTF-8 bytes | u64 count)
//   V x d(d+1)/2 float64, packed row-major lower triangle
// flags bit 0 = complex (unsupported), bit 1 = vocabulary only (d = 0, no payload).
inline constexpr std::uint32_t kModelVersion = 1;
inline constexpr std::uint8_t kFlagComplex = 0x01;
inline constexpr std::uint8_t kFlagVocabOnly = 0x02;
inline constexpr std::size_t kHeaderBytes = 17;

std::string encode_model(const EmbeddingStore& store);
EmbeddingStore decode_model(std::string_view bytes);
std::string encode_vocab(const Vocabulary& vocab);
Vocabulary decode_vocab(std::string_view bytes);

void save_model(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_model(const std::filesystem::path& path);
void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocab(const std::filesystem::path& path);

// Whole-file helpers shared with the corpus reader.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace qlm
