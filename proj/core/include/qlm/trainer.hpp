#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qlm/corpus.hpp"
#include "qlm/linalg.hpp"
#include "qlm/model.hpp"
#include "qlm/random.hpp"

namespace qlm {

struct TrainConfig {
  std::size_t dim = kDefaultDim;
  std::size_t window = kDefaultWindow;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.05;  // decays linearly to learning_rate / 100
  double subsample_t = kDefaultSubsample;
  std::uint64_t seed = 42;
  std::uint64_t min_count = 5;
  std::size_t workers = 1;
  double init_noise = 0.1;
};

/// Throws DomainError on the first violated constraint.
void validate(const TrainConfig& config);

struct TrainStats {
  std::vector<double> epoch_losses;  // mean loss per context pair
  std::uint64_t pairs_processed = 0;
  double wall_seconds = 0.0;
};

// Guards the logarithms in the loss.
inline constexpr double kLossEpsilon = 1e-8;

/// Uniform mixture of the context words' densities.
DensityMatrix context_state(const EmbeddingStore& store, std::span<const WordId> context);

/// -ln(s+ + eps) - sum ln(1 - s- + eps) with s = Tr(rho_context rho_word).
double pair_loss(const EmbeddingStore& store, WordId center, const DensityMatrix& context,
                 std::span<const WordId> negatives);

struct WordGradient {
  WordId word;
  std::vector<double> lower;  // d(d+1)/2, same packing as the factor
};

/// Loss of one (center, context, negatives) example and its gradient with
/// respect to every factor involved. A word appearing in several roles gets
/// one accumulated entry.
struct PairGradients {
  double loss = 0.0;
  std::vector<WordGradient> words;

  const WordGradient* find(WordId id) const;
};

PairGradients pair_gradients(const EmbeddingStore& store, WordId center,
                             std::span<const WordId> context, std::span<const WordId> negatives);

/// Gradient of a scalar f(rho) with respect to the packed factor of
/// rho = L L^T / Tr(L L^T), given the symmetric matrix df/drho.
std::vector<double> density_gradient_to_factor(std::span<const double> packed, std::size_t dim,
                                               const Matrix& grad_rho);

/// Draws negatives from the unigram^power distribution.
class NegativeSampler {
 public:
  /// Throws DomainError if the vocabulary has fewer than two words.
  explicit NegativeSampler(const Vocabulary& vocab, double power = 0.75);

  WordId draw(Rng& rng) const;
  /// Draws conditioned on `id != exclude`; equivalent to redrawing until the
  /// result differs from `exclude`.
  WordId draw_excluding(WordId exclude, Rng& rng) const;

  double probability(WordId id) const { return weights_[id] / total_; }
  std::size_t size() const noexcept { return weights_.size(); }

 private:
  WordId locate(double mass) const;

  std::vector<double> weights_;
  std::vector<double> cumulative_;  // inclusive prefix sums
  double total_ = 0.0;
};

std::vector<WordId> negative_sample(const NegativeSampler& sampler, std::size_t k, WordId center,
                                    Rng& rng);

struct TrainResult {
  EmbeddingStore store;
  TrainStats stats;
};

/// Called after each epoch with the 1-based epoch number.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Builds the vocabulary from `documents` (min_count), initializes near I/d
/// and runs CBOW-style SGD. Context windows never cross document boundaries.
/// Throws DomainError if the corpus yields no context pair and NumericError
/// on a non-finite loss.
TrainResult train(std::span<const TokenStream> documents, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Continues from an existing store (its vocabulary fixes the id space).
TrainStats train_store(EmbeddingStore& store, std::span<const TokenStream> documents,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace qlm
