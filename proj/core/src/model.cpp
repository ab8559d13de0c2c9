#include "qlm/model.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "qlm/errors.hpp"
#include "qlm/random.hpp"
#include "qlm/utf8.hpp"

namespace qlm {

// ---------------------------------------------------------------- Vocabulary

WordId Vocabulary::add(std::string word, std::uint64_t count) {
  if (word.empty()) throw DomainError("vocabulary words must be nonempty");
  if (!utf8::is_valid(word)) throw InvalidUtf8("vocabulary word is not valid UTF-8");
  if (index_.find(std::string_view(word)) != index_.end()) {
    throw DomainError("duplicate vocabulary word '" + word + "'");
  }
  const auto id = static_cast<WordId>(words_.size());
  index_.emplace(word, id);
  words_.push_back(std::move(word));
  counts_.push_back(count);
  total_ += count;
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id_of(std::string_view word) const {
  if (auto id = find(word)) return *id;
  throw OutOfVocabulary(std::string(word));
}

void VocabularyBuilder::add(std::string_view token) {
  if (auto id = seen_.find(token)) {
    ++tallies_[*id];
    return;
  }
  seen_.add(std::string(token), 0);
  tallies_.push_back(1);
}

Vocabulary VocabularyBuilder::finish(std::uint64_t min_count) const {
  if (min_count < 1) throw DomainError("min_count must be at least 1");
  Vocabulary out;
  for (std::size_t i = 0; i < seen_.size(); ++i) {
    if (tallies_[i] >= min_count) out.add(seen_.words()[i], tallies_[i]);
  }
  if (out.empty()) {
    throw DomainError("vocabulary is empty (no token occurs at least " +
                      std::to_string(min_count) + " times)");
  }
  return out;
}

Vocabulary build_vocab(std::span<const std::string> tokens, std::uint64_t min_count) {
  VocabularyBuilder builder;
  builder.add(tokens);
  return builder.finish(min_count);
}

// ---------------------------------------------------------------- EmbeddingStore

EmbeddingStore::EmbeddingStore(Vocabulary vocab, std::size_t dim, std::vector<double> params)
    : vocab_(std::move(vocab)),
      dim_(dim),
      stride_(CholeskyFactor::param_count(dim)),
      params_(std::move(params)) {
  if (dim_ < 1) throw DomainError("embedding dimension must be positive");
  if (params_.size() != vocab_.size() * stride_) {
    throw DomainError("parameter buffer holds " + std::to_string(params_.size()) +
                      " values, expected " + std::to_string(vocab_.size() * stride_));
  }
  for (std::size_t w = 0; w < vocab_.size(); ++w) {
    for (std::size_t i = 0; i < dim_; ++i) {
      if (!(params_[w * stride_ + CholeskyFactor::index(i, i)] >= 0.0)) {
        throw DomainError("factor of '" + vocab_.word(static_cast<WordId>(w)) +
                          "' has a negative diagonal");
      }
    }
  }
}

CholeskyFactor EmbeddingStore::factor(WordId id) const {
  auto p = factor_params(id);
  return CholeskyFactor(dim_, std::vector<double>(p.begin(), p.end()));
}

EmbeddingStore init_embeddings(const Vocabulary& vocab, std::size_t dim, std::uint64_t seed,
                               double noise) {
  if (dim < 2) throw DomainError("embedding dimension must be at least 2");
  if (noise < 0.0) throw DomainError("initialization noise must be nonnegative");
  const std::size_t stride = CholeskyFactor::param_count(dim);
  const double diag = 1.0 / std::sqrt(static_cast<double>(dim));
  const double half_width = noise / static_cast<double>(dim);

  Rng rng(seed);
  std::vector<double> params(vocab.size() * stride);
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    double* f = params.data() + w * stride;
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double jitter = half_width > 0.0 ? uniform(rng, -half_width, half_width) : 0.0;
        f[CholeskyFactor::index(i, j)] = i == j ? std::max(0.0, diag + jitter) : jitter;
      }
    }
  }
  return EmbeddingStore(vocab, dim, std::move(params));
}

DensityMatrix get_density(const EmbeddingStore& store, std::string_view word) {
  return store.density(store.vocab().id_of(word));
}

// ---------------------------------------------------------------- encoding

namespace {

constexpr char kMagic[4] = {'Q', 'L', 'M', '1'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw TruncatedPayload(std::string("model file truncated while reading ") + what);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::string encode(const Vocabulary& vocab, std::size_t dim, std::uint8_t flags,
                   std::span<const double> params) {
  if (vocab.empty()) throw DomainError("cannot save an empty vocabulary");
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kModelVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vocab.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
  put<std::uint8_t>(out, flags);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& w = vocab.words()[i];
    put<std::uint32_t>(out, static_cast<std::uint32_t>(w.size()));
    out.append(w);
    put<std::uint64_t>(out, vocab.counts()[i]);
  }
  for (double v : params) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

struct Decoded {
  Vocabulary vocab;
  std::size_t dim;
  std::uint8_t flags;
  std::vector<double> params;
};

Decoded decode(std::string_view bytes) {
  Reader in(bytes);
  if (bytes.size() < 4 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw BadMagic("not a QLM1 model file (bad magic)");
  }
  in.take(4, "magic");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kModelVersion) {
    throw VersionMismatch("unsupported model version " + std::to_string(version) +
                          " (expected " + std::to_string(kModelVersion) + ")");
  }
  const auto words = in.get<std::uint32_t>("vocabulary size");
  const auto dim = in.get<std::uint32_t>("dimension");
  const auto flags = in.get<std::uint8_t>("flags");
  if (flags & kFlagComplex) throw UnsupportedFlags("complex-valued models are not supported");
  if (flags & ~(kFlagComplex | kFlagVocabOnly)) {
    throw UnsupportedFlags("unknown flag bits set in model header");
  }
  if (words == 0) throw FormatError("model file has an empty vocabulary");

  Decoded out{Vocabulary{}, dim, flags, {}};
  for (std::uint32_t i = 0; i < words; ++i) {
    const auto len = in.get<std::uint32_t>("word length");
    std::string word(in.take(len, "word bytes"));
    const auto count = in.get<std::uint64_t>("word count");
    if (!utf8::is_valid(word)) {
      throw InvalidUtf8("vocabulary entry " + std::to_string(i) + " is not valid UTF-8");
    }
    try {
      out.vocab.add(std::move(word), count);
    } catch (const InvalidUtf8&) {
      throw;
    } catch (const DomainError& e) {
      throw FormatError(e.what());
    }
  }

  const std::size_t stride = (flags & kFlagVocabOnly) ? 0 : CholeskyFactor::param_count(dim);
  if ((flags & kFlagVocabOnly) && dim != 0) {
    throw FormatError("vocabulary-only file must declare dimension 0");
  }
  const std::size_t n = static_cast<std::size_t>(words) * stride;
  out.params.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.params[i] = std::bit_cast<double>(in.get<std::uint64_t>("factor payload"));
  }
  if (in.remaining() != 0) {
    throw FormatError("model file has " + std::to_string(in.remaining()) + " trailing bytes");
  }
  return out;
}

}  // namespace

std::string encode_model(const EmbeddingStore& store) {
  return encode(store.vocab(), store.dim(), 0, store.params());
}

EmbeddingStore decode_model(std::string_view bytes) {
  Decoded d = decode(bytes);
  if (d.flags & kFlagVocabOnly) {
    throw FormatError("file holds a vocabulary only, not a trained model");
  }
  return EmbeddingStore(std::move(d.vocab), d.dim, std::move(d.params));
}

std::string encode_vocab(const Vocabulary& vocab) { return encode(vocab, 0, kFlagVocabOnly, {}); }

Vocabulary decode_vocab(std::string_view bytes) { return std::move(decode(bytes).vocab); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return data;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

void save_model(const EmbeddingStore& store, const std::filesystem::path& path) {
  write_file(path, encode_model(store));
}

EmbeddingStore load_model(const std::filesystem::path& path) {
  return decode_model(read_file(path));
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  write_file(path, encode_vocab(vocab));
}

Vocabulary load_vocab(const std::filesystem::path& path) { return decode_vocab(read_file(path)); }

}  // namespace qlm
