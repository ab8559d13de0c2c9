#include "qlm/ensemble.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "qlm/errors.hpp"

namespace qlm {

EnsembleState ensemble_state(const EmbeddingStore& store, std::span<const std::string> tokens,
                             std::string period_name) {
  const Vocabulary& vocab = store.vocab();
  std::vector<std::uint64_t> counts(vocab.size(), 0);
  std::size_t in_vocab = 0;
  for (const auto& t : tokens) {
    if (auto id = vocab.find(t)) {
      ++counts[*id];
      ++in_vocab;
    }
  }
  if (in_vocab == 0) {
    throw DomainError("period '" + period_name + "' has no in-vocabulary tokens");
  }

  // Summation in vocabulary order keeps the result independent of token order.
  std::vector<WeightedDensity> parts;
  for (WordId id = 0; id < vocab.size(); ++id) {
    if (counts[id] > 0) parts.push_back({static_cast<double>(counts[id]), store.density(id)});
  }
  return {std::move(period_name), mixture_average(parts), tokens.size(), in_vocab,
          static_cast<double>(in_vocab) / static_cast<double>(tokens.size())};
}

std::optional<EnsembleMode> parse_ensemble_mode(std::string_view name) {
  if (name == "global" || name == "global_model") return EnsembleMode::global_model;
  if (name == "per-period" || name == "per_period_model") return EnsembleMode::per_period_model;
  return std::nullopt;
}

std::string_view to_string(EnsembleMode mode) {
  return mode == EnsembleMode::global_model ? "global_model" : "per_period_model";
}

EntropySeries period_entropy_series(const EmbeddingStore& store,
                                    std::span<const PeriodTokens> periods, LogBase base) {
  EntropySeries series{EnsembleMode::global_model, base, {}};
  series.rows.reserve(periods.size());
  for (const auto& p : periods) {
    const auto state = ensemble_state(store, p.tokens, p.name);
    series.rows.push_back(
        {p.name, von_neumann_entropy(state.rho, base), state.token_count, state.coverage});
  }
  return series;
}

EntropySeries period_entropy_series(std::span<const PeriodTokens> periods,
                                    const TrainConfig& config, LogBase base,
                                    std::size_t threads) {
  validate(config);
  EntropySeries series{EnsembleMode::per_period_model, base, {}};
  std::vector<std::optional<EntropyRow>> rows(periods.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < periods.size(); i = next++) {
      try {
        const auto& p = periods[i];
        const TokenStream* doc = &p.tokens;
        auto trained = train(std::span<const TokenStream>(doc, 1), config);
        const auto state = ensemble_state(trained.store, p.tokens, p.name);
        rows[i] = EntropyRow{p.name, von_neumann_entropy(state.rho, base), state.token_count,
                             state.coverage};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, periods.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  for (auto& r : rows) series.rows.push_back(std::move(*r));
  return series;
}

std::string to_csv(const EntropySeries& series) {
  std::string out = "period,entropy,tokens,coverage\n";
  char buf[96];
  for (const auto& r : series.rows) {
    // Period names containing separators or quotes are quoted CSV-style.
    if (r.period.find_first_of(",\"\n") != std::string::npos) {
      out += '"';
      for (char c : r.period) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    } else {
      out += r.period;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%zu,%.17g\n", r.entropy, r.tokens, r.coverage);
    out += buf;
  }
  return out;
}

}  // namespace qlm
