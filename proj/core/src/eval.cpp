#include "qlm/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "qlm/errors.hpp"
#include "qlm/log.hpp"

namespace qlm {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  char sep = 0;
  if (line.find('\t') != std::string_view::npos) {
    sep = '\t';
  } else if (line.find(',') != std::string_view::npos) {
    sep = ',';
  }
  if (sep != 0) {
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(sep, start);
      fields.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return fields;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

void require_paired(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("correlation inputs differ in length");
  if (xs.size() < 2) throw DomainError("correlation needs at least two points");
}

}  // namespace

std::optional<SimKind> parse_sim_kind(std::string_view name) {
  if (name == "hs") return SimKind::hs;
  if (name == "uhlmann") return SimKind::uhlmann;
  return std::nullopt;
}

std::string_view to_string(SimKind kind) { return kind == SimKind::hs ? "hs" : "uhlmann"; }

double similarity(const EmbeddingStore& store, WordId a, WordId b, SimKind kind) {
  const DensityMatrix ra = store.density(a);
  const DensityMatrix rb = store.density(b);
  return kind == SimKind::hs ? hs_similarity(ra, rb) : uhlmann_fidelity(ra, rb);
}

SimilarityDataset parse_similarity_dataset(std::string_view text) {
  SimilarityDataset ds;
  bool seen_data_line = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_fields(line);
    const bool first = !seen_data_line;
    seen_data_line = true;
    const auto score = fields.size() >= 3 ? parse_number(fields[2]) : std::nullopt;
    if (fields.size() >= 3 && !score && first) continue;  // header row
    if (fields.size() < 3 || !score || fields[0].empty() || fields[1].empty()) {
      std::string msg = "line " + std::to_string(line_no) + ": malformed similarity row skipped";
      log::warn(msg);
      ds.warnings.push_back(std::move(msg));
      continue;
    }
    ds.pairs.push_back({std::string(fields[0]), std::string(fields[1]), *score});
  }
  if (ds.pairs.empty()) throw DomainError("similarity dataset has no parsable lines");
  return ds;
}

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path) {
  return parse_similarity_dataset(read_file(path));
}

EvalReport evaluate(const EmbeddingStore& store, const SimilarityDataset& dataset, SimKind kind,
                    TokenizeMode mode) {
  if (dataset.pairs.empty()) throw DomainError("similarity dataset is empty");
  std::vector<double> model_scores;
  std::vector<double> human_scores;
  const Vocabulary& vocab = store.vocab();
  const bool fold = mode == TokenizeMode::whitespace;
  for (const auto& p : dataset.pairs) {
    const auto a = vocab.find(fold ? lower_ascii(p.word1) : p.word1);
    const auto b = vocab.find(fold ? lower_ascii(p.word2) : p.word2);
    if (!a || !b) continue;
    model_scores.push_back(similarity(store, *a, *b, kind));
    human_scores.push_back(p.human_score);
  }
  if (model_scores.size() < 2) {
    throw DomainError("only " + std::to_string(model_scores.size()) + " of " +
                      std::to_string(dataset.pairs.size()) +
                      " pairs are in vocabulary; need at least 2");
  }
  EvalReport r;
  r.pearson = pearson(model_scores, human_scores);
  r.spearman = spearman(model_scores, human_scores);
  r.pairs_total = dataset.pairs.size();
  r.pairs_covered = model_scores.size();
  r.sim_kind = kind;
  return r;
}

std::string to_tsv(const EvalReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%zu/%zu", r.pearson, r.spearman, r.pairs_covered,
                r.pairs_total);
  return buf;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require_paired(xs, ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  require_paired(xs, ys);
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

std::vector<std::pair<std::string, double>> nearest_neighbors(const EmbeddingStore& store,
                                                              std::string_view word,
                                                              std::size_t k, SimKind kind) {
  if (k < 1) throw DomainError("k must be at least 1");
  const WordId query = store.vocab().id_of(word);
  const DensityMatrix rq = store.density(query);

  std::vector<std::pair<double, WordId>> scored;
  scored.reserve(store.size());
  for (WordId id = 0; id < store.size(); ++id) {
    if (id == query) continue;
    const DensityMatrix r = store.density(id);
    scored.emplace_back(kind == SimKind::hs ? hs_similarity(rq, r) : uhlmann_fidelity(rq, r), id);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const auto& a, const auto& b) {
                      return a.first != b.first ? a.first > b.first : a.second < b.second;
                    });
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.emplace_back(store.vocab().word(scored[i].second), scored[i].first);
  }
  return out;
}

}  // namespace qlm
