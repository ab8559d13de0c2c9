#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include <doctest.h>

#include "qlm/errors.hpp"
#include "qlm/model.hpp"
#include "support/fixtures.hpp"

using namespace qlm;

namespace {

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto j = s.find(' ', i);
    if (j == std::string::npos) j = s.size();
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

EmbeddingStore random_store(Rng& rng, std::size_t words, std::size_t dim) {
  Vocabulary vocab;
  for (std::size_t w = 0; w < words; ++w) {
    // Mix ASCII and multi-byte words.
    vocab.add((w % 3 == 0 ? "詞" : "w") + std::to_string(w), 1 + rng() % 1000);
  }
  std::vector<double> params;
  for (std::size_t w = 0; w < words; ++w) {
    auto p = qlm::testing::random_packed(dim, rng);
    params.insert(params.end(), p.begin(), p.end());
  }
  return EmbeddingStore(std::move(vocab), dim, std::move(params));
}

}  // namespace

TEST_CASE("build_vocab thresholds and orders by first occurrence") {
  const auto tokens = split("a b a c");
  const auto v2 = build_vocab(tokens, 2);
  REQUIRE(v2.size() == 1);
  CHECK(v2.word(0) == "a");
  CHECK(v2.count(0) == 2);

  const auto v1 = build_vocab(tokens, 1);
  REQUIRE(v1.size() == 3);
  CHECK(v1.words() == std::vector<std::string>{"a", "b", "c"});
  CHECK(v1.counts() == std::vector<std::uint64_t>{2, 1, 1});
  CHECK(v1.id_of("c") == 2);

  CHECK_THROWS_AS(build_vocab(tokens, 3), DomainError);
  CHECK_THROWS_AS(build_vocab(tokens, 0), DomainError);
}

TEST_CASE("build_vocab counts agree with an independent tally") {
  Rng rng(1);
  std::vector<std::string> tokens;
  for (int i = 0; i < 10000; ++i) {
    // Zipf-ish: small ids far more common.
    const auto id = static_cast<int>(std::pow(uniform01(rng), 3.0) * 500);
    tokens.push_back("t" + std::to_string(id));
  }
  std::unordered_map<std::string, std::uint64_t> tally;
  for (const auto& t : tokens) ++tally[t];

  const auto vocab = build_vocab(tokens, 3);
  std::size_t expected_words = 0;
  for (const auto& [w, c] : tally) expected_words += c >= 3;
  CHECK(vocab.size() == expected_words);
  for (WordId id = 0; id < vocab.size(); ++id) {
    REQUIRE(vocab.count(id) == tally.at(vocab.word(id)));
    REQUIRE(vocab.id_of(vocab.word(id)) == id);
  }
}

TEST_CASE("Vocabulary rejects duplicates and invalid UTF-8") {
  Vocabulary v;
  v.add("x", 1);
  CHECK_THROWS_AS(v.add("x", 1), DomainError);
  CHECK_THROWS_AS(v.add(std::string("\xff\xfe"), 1), InvalidUtf8);
  CHECK_THROWS_AS(v.id_of("missing"), OutOfVocabulary);
}

TEST_CASE("init_embeddings") {
  Vocabulary vocab;
  vocab.add("a", 3);
  vocab.add("b", 2);
  vocab.add("c", 1);

  SUBCASE("noiseless initialization is exactly maximally mixed") {
    const auto store = init_embeddings(vocab, 8, 1, 0.0);
    for (WordId id = 0; id < 3; ++id) {
      CHECK(qlm::testing::max_abs_diff(store.density(id).matrix(),
                                       Matrix::Identity(8, 8) / 8.0) == 0.0);
    }
    CHECK(qlm::testing::max_abs_diff(get_density(store, "b").matrix(),
                                     Matrix::Identity(8, 8) / 8.0) == 0.0);
  }
  SUBCASE("deterministic in the seed") {
    CHECK(encode_model(init_embeddings(vocab, 8, 42)) == encode_model(init_embeddings(vocab, 8, 42)));
    CHECK(encode_model(init_embeddings(vocab, 8, 42)) != encode_model(init_embeddings(vocab, 8, 43)));
  }
  SUBCASE("36 parameters per word at dim 8, noise bounded") {
    const auto store = init_embeddings(vocab, 8, 5);
    CHECK(store.stride() == 36);
    CHECK(store.params().size() == 3 * 36);
    const double diag = 1.0 / std::sqrt(8.0);
    for (WordId id = 0; id < 3; ++id) {
      const auto f = store.factor(id);
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          const double expected = i == j ? diag : 0.0;
          REQUIRE(std::abs(f.at(i, j) - expected) <= 0.1 / 8.0 + 1e-15);
        }
      REQUIRE(check_density(store.density(id)).ok());
    }
  }
  SUBCASE("dimension below 2 rejected") { CHECK_THROWS_AS(init_embeddings(vocab, 1, 0), DomainError); }
}

TEST_CASE("get_density signals out-of-vocabulary words") {
  Vocabulary vocab;
  vocab.add("known", 1);
  const auto store = init_embeddings(vocab, 4, 0);
  CHECK_THROWS_AS(get_density(store, "unknown"), OutOfVocabulary);
  try {
    get_density(store, "unknown");
  } catch (const OutOfVocabulary& e) {
    CHECK(e.word() == "unknown");
  }
}

TEST_CASE("model file layout") {
  Vocabulary vocab;
  vocab.add("alpha", 7);
  vocab.add("be", 2);
  vocab.add("漢", 1);
  const auto store = init_embeddings(vocab, 8, 9);
  const std::string bytes = encode_model(store);

  // header + sum(4 + len + 8) + 3 * 36 * 8
  const std::size_t vocab_bytes = (4 + 5 + 8) + (4 + 2 + 8) + (4 + 3 + 8);
  CHECK(bytes.size() == 17 + vocab_bytes + 3 * 36 * 8);
  CHECK(bytes.substr(0, 4) == "QLM1");
  CHECK(bytes[4] == 1);
  CHECK(bytes[8] == 3);
  CHECK(bytes[12] == 8);
  CHECK(bytes[16] == 0);
  // First payload double is the first word's L[0][0], little-endian.
  double first = 0.0;
  std::memcpy(&first, bytes.data() + 17 + vocab_bytes, 8);
  CHECK(first == store.factor_params(0)[0]);
}

TEST_CASE("persistence round trip is bit-exact on random stores") {
  Rng rng(21);
  qlm::testing::TempDir dir;
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 2 + static_cast<std::size_t>(t % 7);
    const auto store = random_store(rng, 1 + static_cast<std::size_t>(rng() % 20), dim);
    const auto path = dir / ("m" + std::to_string(t) + ".qlm");
    save_model(store, path);
    const auto loaded = load_model(path);
    REQUIRE(loaded.vocab() == store.vocab());
    REQUIRE(loaded.dim() == store.dim());
    REQUIRE(std::memcmp(loaded.params().data(), store.params().data(),
                        store.params().size() * sizeof(double)) == 0);
    REQUIRE(encode_model(loaded) == read_file(path));
  }
}

TEST_CASE("model decoding errors are distinct") {
  Rng rng(4);
  const auto store = random_store(rng, 3, 4);
  const std::string good = encode_model(store);

  std::string magic = good;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_model(magic), BadMagic);

  std::string version = good;
  version[4] = 2;
  CHECK_THROWS_AS(decode_model(version), VersionMismatch);

  CHECK_THROWS_AS(decode_model(good.substr(0, good.size() - 1)), TruncatedPayload);
  CHECK_THROWS_AS(decode_model(good.substr(0, 10)), TruncatedPayload);

  std::string complex = good;
  complex[16] = 1;
  CHECK_THROWS_AS(decode_model(complex), UnsupportedFlags);

  std::string bad_word = good;
  bad_word[17 + 4] = static_cast<char>(0xC0);  // overlong lead byte in word 0
  CHECK_THROWS_AS(decode_model(bad_word), InvalidUtf8);

  CHECK_THROWS_AS(decode_model(good + "x"), FormatError);
  CHECK_THROWS_AS(load_model("/nonexistent/dir/model.qlm"), IoError);
}

TEST_CASE("empty vocabulary cannot be saved") {
  const EmbeddingStore empty(Vocabulary{}, 8, {});
  CHECK_THROWS_AS(encode_model(empty), DomainError);
}

TEST_CASE("vocabulary-only container") {
  Vocabulary vocab;
  vocab.add("a", 2);
  vocab.add("b", 1);
  const auto bytes = encode_vocab(vocab);
  CHECK(bytes[16] == kFlagVocabOnly);
  CHECK(bytes.size() == 17 + 2 * (4 + 1 + 8));
  CHECK(decode_vocab(bytes) == vocab);
  CHECK_THROWS_AS(decode_model(bytes), FormatError);
}
