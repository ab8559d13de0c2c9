#include "qlm/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "qlm/errors.hpp"
#include "qlm/log.hpp"

namespace qlm {
namespace {

using Index = Eigen::Index;

Matrix unpack_lower(std::span<const double> packed, std::size_t dim) {
  Matrix l = Matrix::Zero(static_cast<Index>(dim), static_cast<Index>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      l(static_cast<Index>(i), static_cast<Index>(j)) = packed[CholeskyFactor::index(i, j)];
  return l;
}

// Per-example scratch: one slot per distinct word, holding its parameters,
// density and the accumulated d(loss)/d(rho).
class Workspace {
 public:
  explicit Workspace(std::size_t dim) : dim_(dim), stride_(CholeskyFactor::param_count(dim)) {}

  void reset() { used_ = 0; }

  // Returns the slot for `id`, loading parameters through `load` on first use.
  template <typename Load>
  std::size_t slot(WordId id, Load&& load) {
    for (std::size_t s = 0; s < used_; ++s)
      if (ids_[s] == id) return s;
    if (used_ == ids_.size()) {
      ids_.push_back(0);
      params_.emplace_back(stride_);
      rho_.emplace_back(static_cast<Index>(dim_), static_cast<Index>(dim_));
      grad_.emplace_back(static_cast<Index>(dim_), static_cast<Index>(dim_));
    }
    const std::size_t s = used_++;
    ids_[s] = id;
    load(id, std::span<double>(params_[s]));
    rho_[s] = cholesky_to_density(params_[s], dim_).matrix();
    grad_[s].setZero();
    return s;
  }

  std::size_t used() const noexcept { return used_; }
  WordId id(std::size_t s) const { return ids_[s]; }
  std::vector<double>& params(std::size_t s) { return params_[s]; }
  const Matrix& rho(std::size_t s) const { return rho_[s]; }
  Matrix& grad(std::size_t s) { return grad_[s]; }

 private:
  std::size_t dim_;
  std::size_t stride_;
  std::size_t used_ = 0;
  std::vector<WordId> ids_;
  std::vector<std::vector<double>> params_;
  std::vector<Matrix> rho_;
  std::vector<Matrix> grad_;
};

double trace_product(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b).sum(); }

// Fills the workspace with every involved word and accumulates d(loss)/d(rho)
// per slot. Returns the loss.
template <typename Load>
double accumulate_example(Workspace& ws, std::size_t dim, WordId center,
                          std::span<const WordId> context, std::span<const WordId> negatives,
                          Load&& load) {
  ws.reset();
  const std::size_t center_slot = ws.slot(center, load);

  std::vector<std::size_t> neg_slots;
  neg_slots.reserve(negatives.size());
  for (WordId n : negatives) neg_slots.push_back(ws.slot(n, load));

  std::vector<std::size_t> ctx_slots;
  ctx_slots.reserve(context.size());
  Matrix rho_ctx = Matrix::Zero(static_cast<Index>(dim), static_cast<Index>(dim));
  for (WordId c : context) {
    const std::size_t s = ws.slot(c, load);
    ctx_slots.push_back(s);
    rho_ctx += ws.rho(s);
  }
  const double inv_n = 1.0 / static_cast<double>(context.size());
  rho_ctx *= inv_n;

  const double s_pos = trace_product(rho_ctx, ws.rho(center_slot));
  double loss = -std::log(s_pos + kLossEpsilon);
  const double a = -1.0 / (s_pos + kLossEpsilon);
  ws.grad(center_slot) += a * rho_ctx;
  Matrix grad_ctx = a * ws.rho(center_slot);

  for (std::size_t s : neg_slots) {
    const double s_neg = trace_product(rho_ctx, ws.rho(s));
    loss -= std::log(1.0 - s_neg + kLossEpsilon);
    const double b = 1.0 / (1.0 - s_neg + kLossEpsilon);
    ws.grad(s) += b * rho_ctx;
    grad_ctx += b * ws.rho(s);
  }

  grad_ctx *= inv_n;
  for (std::size_t s : ctx_slots) ws.grad(s) += grad_ctx;
  return loss;
}

void factor_gradient_into(std::span<const double> packed, std::size_t dim, const Matrix& grad_rho,
                          std::span<double> out) {
  double trace = 0.0;
  for (double v : packed) trace += v * v;
  const Matrix lower = unpack_lower(packed, dim);
  const Matrix rho = lower * lower.transpose() / trace;
  // d/dL of f(L L^T / t) = (2/t) (G L - Tr(G rho) L), restricted to the
  // lower triangle.
  const Matrix full = (2.0 / trace) * (grad_rho * lower - trace_product(grad_rho, rho) * lower);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      out[CholeskyFactor::index(i, j)] = full(static_cast<Index>(i), static_cast<Index>(j));
}

// Parameter buffer shared by the training workers. With more than one worker
// every element access is a relaxed atomic, so concurrent updates may be lost
// but never tear.
class SharedParams {
 public:
  SharedParams(std::span<double> params, std::size_t stride, bool concurrent)
      : params_(params), stride_(stride), concurrent_(concurrent) {}

  void load(WordId id, std::span<double> out) const {
    double* base = params_.data() + static_cast<std::size_t>(id) * stride_;
    if (!concurrent_) {
      std::copy(base, base + stride_, out.begin());
      return;
    }
    for (std::size_t k = 0; k < stride_; ++k)
      out[k] = std::atomic_ref<double>(base[k]).load(std::memory_order_relaxed);
  }

  void store(WordId id, std::span<const double> values) const {
    double* base = params_.data() + static_cast<std::size_t>(id) * stride_;
    if (!concurrent_) {
      std::copy(values.begin(), values.end(), base);
      return;
    }
    for (std::size_t k = 0; k < stride_; ++k)
      std::atomic_ref<double>(base[k]).store(values[k], std::memory_order_relaxed);
  }

 private:
  std::span<double> params_;
  std::size_t stride_;
  bool concurrent_;
};

// Applies one SGD step to every slot: gradient step, diagonal projection onto
// [0, inf), then rescaling to unit Frobenius norm (rho is unchanged by the
// rescale, which keeps gradient magnitudes from drifting).
void apply_update(Workspace& ws, std::size_t dim, double lr, const SharedParams& shared,
                  std::vector<double>& grad_buf, std::vector<double>& next) {
  for (std::size_t s = 0; s < ws.used(); ++s) {
    const auto& current = ws.params(s);
    factor_gradient_into(current, dim, ws.grad(s), grad_buf);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < current.size(); ++k) next[k] = current[k] - lr * grad_buf[k];
    for (std::size_t i = 0; i < dim; ++i) {
      double& d = next[CholeskyFactor::index(i, i)];
      if (d < 0.0) d = 0.0;
    }
    for (double v : next) norm2 += v * v;
    if (!std::isfinite(norm2)) {
      throw NumericError("parameter update overflowed (learning rate " + std::to_string(lr) + ")");
    }
    if (!(norm2 > 1e-200)) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : next) v *= inv;
    shared.store(ws.id(s), next);
  }
}

}  // namespace

void validate(const TrainConfig& c) {
  if (c.dim < 2) throw DomainError("dim must be at least 2");
  if (c.window < 1) throw DomainError("window must be at least 1");
  if (c.negatives < 1) throw DomainError("negatives must be at least 1");
  if (c.epochs < 1) throw DomainError("epochs must be at least 1");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw DomainError("learning rate must be positive");
  }
  if (c.min_count < 1) throw DomainError("min_count must be at least 1");
  if (c.workers < 1) throw DomainError("workers must be at least 1");
  if (std::isnan(c.subsample_t)) throw DomainError("subsample threshold is NaN");
  if (c.init_noise < 0.0) throw DomainError("init noise must be nonnegative");
}

DensityMatrix context_state(const EmbeddingStore& store, std::span<const WordId> context) {
  if (context.empty()) throw DomainError("context is empty");
  std::vector<WeightedDensity> parts;
  parts.reserve(context.size());
  for (WordId id : context) parts.push_back({1.0, store.density(id)});
  return mixture_average(parts);
}

double pair_loss(const EmbeddingStore& store, WordId center, const DensityMatrix& context,
                 std::span<const WordId> negatives) {
  double loss = -std::log(hs_similarity(context, store.density(center)) + kLossEpsilon);
  for (WordId n : negatives) {
    loss -= std::log(1.0 - hs_similarity(context, store.density(n)) + kLossEpsilon);
  }
  return loss;
}

const WordGradient* PairGradients::find(WordId id) const {
  for (const auto& w : words)
    if (w.word == id) return &w;
  return nullptr;
}

std::vector<double> density_gradient_to_factor(std::span<const double> packed, std::size_t dim,
                                               const Matrix& grad_rho) {
  std::vector<double> out(CholeskyFactor::param_count(dim));
  factor_gradient_into(packed, dim, grad_rho, out);
  return out;
}

PairGradients pair_gradients(const EmbeddingStore& store, WordId center,
                             std::span<const WordId> context, std::span<const WordId> negatives) {
  if (context.empty()) throw DomainError("context is empty");
  Workspace ws(store.dim());
  auto load = [&](WordId id, std::span<double> out) {
    auto p = store.factor_params(id);
    std::copy(p.begin(), p.end(), out.begin());
  };
  PairGradients result;
  result.loss = accumulate_example(ws, store.dim(), center, context, negatives, load);
  for (std::size_t s = 0; s < ws.used(); ++s) {
    result.words.push_back(
        {ws.id(s), density_gradient_to_factor(ws.params(s), store.dim(), ws.grad(s))});
  }
  return result;
}

// ---------------------------------------------------------------- negatives

NegativeSampler::NegativeSampler(const Vocabulary& vocab, double power) {
  if (vocab.size() < 2) throw DomainError("negative sampling needs at least two words");
  weights_.reserve(vocab.size());
  cumulative_.reserve(vocab.size());
  for (auto c : vocab.counts()) {
    const double w = std::pow(static_cast<double>(c), power);
    weights_.push_back(w);
    total_ += w;
    cumulative_.push_back(total_);
  }
  if (!(total_ > 0.0)) throw DomainError("negative sampling needs positive word counts");
}

WordId NegativeSampler::locate(double mass) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), mass);
  if (it == cumulative_.end()) --it;
  return static_cast<WordId>(it - cumulative_.begin());
}

WordId NegativeSampler::draw(Rng& rng) const { return locate(uniform01(rng) * total_); }

WordId NegativeSampler::draw_excluding(WordId exclude, Rng& rng) const {
  // Sample from the distribution with `exclude`'s mass cut out: skip over its
  // interval of the cumulative table.
  const double excluded = weights_[exclude];
  const double before = cumulative_[exclude] - excluded;
  double mass = uniform01(rng) * (total_ - excluded);
  if (mass >= before) mass += excluded;
  WordId id = locate(mass);
  if (id == exclude) {
    // Only reachable through rounding at the interval edge.
    id = exclude + 1 < weights_.size() ? exclude + 1 : exclude - 1;
  }
  return id;
}

std::vector<WordId> negative_sample(const NegativeSampler& sampler, std::size_t k, WordId center,
                                    Rng& rng) {
  std::vector<WordId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(sampler.draw_excluding(center, rng));
  return out;
}

// ---------------------------------------------------------------- training

TrainStats train_store(EmbeddingStore& store, std::span<const TokenStream> documents,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  const Vocabulary& vocab = store.vocab();
  const std::size_t dim = store.dim();
  const NegativeSampler sampler(vocab);

  std::vector<std::vector<WordId>> doc_ids;
  doc_ids.reserve(documents.size());
  double expected_per_epoch = 0.0;
  bool any_pair = false;
  {
    const double total = static_cast<double>(vocab.total_count());
    std::vector<double> keep(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      keep[i] = keep_probability(static_cast<double>(vocab.counts()[i]) / total,
                                 config.subsample_t);
    }
    for (const auto& doc : documents) {
      doc_ids.push_back(to_ids(doc, vocab));
      for (WordId id : doc_ids.back()) expected_per_epoch += keep[id];
      any_pair = any_pair || doc_ids.back().size() >= 2;
    }
  }
  if (!any_pair) throw DomainError("corpus yields no context pairs");

  const double planned = std::max(1.0, expected_per_epoch * static_cast<double>(config.epochs));
  const std::size_t workers = config.workers;
  const SharedParams shared(store.params(), store.stride(), workers > 1);
  std::atomic<std::uint64_t> processed{0};

  TrainStats stats;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> loss_sum(workers, 0.0);
    std::vector<std::uint64_t> pair_count(workers, 0);
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto run_worker = [&](std::size_t w) {
      try {
        Rng rng(derive_seed(config.seed, epoch * workers + w));
        Workspace ws(dim);
        std::vector<double> grad_buf(store.stride());
        std::vector<double> next(store.stride());
        auto load = [&](WordId id, std::span<double> out) { shared.load(id, out); };

        for (const auto& ids : doc_ids) {
          const std::size_t lo = ids.size() * w / workers;
          const std::size_t hi = ids.size() * (w + 1) / workers;
          const auto kept = subsample(std::span<const WordId>(ids).subspan(lo, hi - lo), vocab,
                                      config.subsample_t, rng);
          for_each_context(kept, config.window, [&](WordId center, std::span<const WordId> ctx) {
            const auto negatives = negative_sample(sampler, config.negatives, center, rng);
            const double loss = accumulate_example(ws, dim, center, ctx, negatives, load);
            if (!std::isfinite(loss)) {
              throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1) +
                                 " at center word '" + vocab.word(center) + "'");
            }
            const double progress =
                std::min(1.0, static_cast<double>(processed.fetch_add(1, std::memory_order_relaxed)) /
                                  planned);
            const double lr = config.learning_rate * (1.0 - 0.99 * progress);
            apply_update(ws, dim, lr, shared, grad_buf, next);
            loss_sum[w] += loss;
            ++pair_count[w];
          });
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };

    if (workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_worker, w);
    }
    if (failure) std::rethrow_exception(failure);

    double total_loss = 0.0;
    std::uint64_t total_pairs = 0;
    for (std::size_t w = 0; w < workers; ++w) {
      total_loss += loss_sum[w];
      total_pairs += pair_count[w];
    }
    if (total_pairs == 0) {
      throw DomainError("epoch " + std::to_string(epoch + 1) +
                        " produced no context pairs (subsampling removed every token)");
    }
    const double mean = total_loss / static_cast<double>(total_pairs);
    if (!std::isfinite(mean)) throw NumericError("non-finite mean loss in epoch " + std::to_string(epoch + 1));
    stats.epoch_losses.push_back(mean);
    stats.pairs_processed += total_pairs;
    log::info("epoch " + std::to_string(epoch + 1) + ": mean loss " + std::to_string(mean) +
              " over " + std::to_string(total_pairs) + " pairs");
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

TrainResult train(std::span<const TokenStream> documents, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  validate(config);
  VocabularyBuilder builder;
  std::size_t tokens = 0;
  for (const auto& doc : documents) {
    builder.add(doc);
    tokens += doc.size();
  }
  if (tokens == 0) throw DomainError("corpus is empty");
  Vocabulary vocab = builder.finish(config.min_count);
  EmbeddingStore store = init_embeddings(vocab, config.dim, config.seed, config.init_noise);
  TrainStats stats = train_store(store, documents, config, on_epoch);
  return {std::move(store), std::move(stats)};
}

}  // namespace qlm
