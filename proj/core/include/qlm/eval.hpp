#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qlm/corpus.hpp"
#include "qlm/model.hpp"

namespace qlm {

enum class SimKind { hs, uhlmann };

std::optional<SimKind> parse_sim_kind(std::string_view name);
std::string_view to_string(SimKind kind);

/// Similarity of two stored words under the chosen measure.
double similarity(const EmbeddingStore& store, WordId a, WordId b, SimKind kind);

struct SimilarityPair {
  std::string word1;
  std::string word2;
  double human_score;
};

struct SimilarityDataset {
  std::vector<SimilarityPair> pairs;
  std::vector<std::string> warnings;  // skipped malformed lines, with line numbers
};

/// Parses `word1 <sep> word2 <sep> score` lines, where the separator is a tab,
/// a comma or a run of spaces (detected per line). '#' lines are comments; a
/// first data line with a non-numeric score is taken as a header. Throws
/// DomainError if nothing parses.
SimilarityDataset parse_similarity_dataset(std::string_view text);
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path);

struct EvalReport {
  double pearson = 0.0;
  double spearman = 0.0;
  std::size_t pairs_total = 0;
  std::size_t pairs_covered = 0;
  SimKind sim_kind = SimKind::hs;
};

/// Scores every in-vocabulary pair and correlates with the human scores.
/// Dataset words are ASCII-lowercased in whitespace mode to match the
/// tokenizer. Throws DomainError with fewer than two covered pairs.
EvalReport evaluate(const EmbeddingStore& store, const SimilarityDataset& dataset, SimKind kind,
                    TokenizeMode mode = TokenizeMode::whitespace);

/// Single-line TSV: pearson, spearman, covered/total.
std::string to_tsv(const EvalReport& report);

/// Throw DomainError on length mismatch, fewer than two points or zero variance.
double pearson(std::span<const double> xs, std::span<const double> ys);
double spearman(std::span<const double> xs, std::span<const double> ys);
/// 1-based ranks, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Top-k words by similarity to `word`, excluding the word itself. Ties are
/// broken by ascending vocabulary id. Throws OutOfVocabulary.
std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingStore& store,
                                                              std::string_view word,
                                                              std::size_t k, SimKind kind);

}  // namespace qlm
