#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qlm/corpus.hpp"
#include "qlm/linalg.hpp"
#include "qlm/model.hpp"
#include "qlm/trainer.hpp"

namespace qlm {

/// Frequency-weighted mixture of the word states found in one period.
struct EnsembleState {
  std::string period_name;
  DensityMatrix rho;
  std::size_t token_count;     // all tokens in the period
  std::size_t in_vocab_count;  // tokens that contributed to rho
  double coverage;             // in_vocab_count / token_count
};

/// rho = sum_w f_w rho_w with f_w the in-vocabulary relative frequency of w.
/// Throws DomainError if no token of the period is in the vocabulary.
EnsembleState ensemble_state(const EmbeddingStore& store, std::span<const std::string> tokens,
                             std::string period_name = {});

enum class EnsembleMode { global_model, per_period_model };

std::optional<EnsembleMode> parse_ensemble_mode(std::string_view name);
std::string_view to_string(EnsembleMode mode);

struct EntropyRow {
  std::string period;
  double entropy;
  std::size_t tokens;
  double coverage;
};

struct EntropySeries {
  EnsembleMode mode = EnsembleMode::global_model;
  LogBase base = LogBase::natural;
  std::vector<EntropyRow> rows;  // manifest order
};

/// One shared model for every period.
EntropySeries period_entropy_series(const EmbeddingStore& store,
                                    std::span<const PeriodTokens> periods,
                                    LogBase base = LogBase::natural);

/// Trains one model per period with identical config and seed, then measures
/// each period against its own model. Up to `threads` periods train at once.
EntropySeries period_entropy_series(std::span<const PeriodTokens> periods,
                                    const TrainConfig& config, LogBase base = LogBase::natural,
                                    std::size_t threads = 1);

/// `period,entropy,tokens,coverage` header plus one LF-terminated row per period.
std::string to_csv(const EntropySeries& series);

}  // namespace qlm
