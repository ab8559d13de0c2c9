#include <fstream>
#include <limits>
#include <regex>
#include <string>
#include <vector>

#include <doctest.h>

#include "qlm/corpus.hpp"
#include "qlm/errors.hpp"
#include "support/fixtures.hpp"

using namespace qlm;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

Vocabulary vocab_of(const TokenStream& tokens) { return build_vocab(tokens, 1); }

TokenStream numbered(std::size_t n) {
  TokenStream t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(i));
  return t;
}

/// Nested-loop pair enumerator.
std::vector<ContextPair> brute_pairs(const std::vector<WordId>& ids, std::size_t w) {
  std::vector<ContextPair> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ContextPair p{ids[i], {}};
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const std::size_t dist = i > j ? i - j : j - i;
      if (j != i && dist <= w) p.context.push_back(ids[j]);
    }
    if (!p.context.empty()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize examples") {
  CHECK(tokenize("The cat sat", TokenizeMode::whitespace) == TokenStream{"the", "cat", "sat"});
  CHECK(tokenize("漢書", TokenizeMode::chars) == TokenStream{"漢", "書"});
  CHECK(tokenize("  a\t\tB\n　c d  ", TokenizeMode::whitespace) ==
        TokenStream{"a", "b", "c", "d"});
  CHECK(tokenize("ÉCOLE", TokenizeMode::whitespace) == TokenStream{"\xc3\x89" "cole"});
  CHECK(tokenize("天地，玄黃。 宇宙", TokenizeMode::chars) ==
        TokenStream{"天", "地", "玄", "黃", "宇", "宙"});
  CHECK(tokenize("", TokenizeMode::whitespace).empty());

  Punctuation custom;
  custom.extra = U"地";
  CHECK(tokenize("天地", TokenizeMode::chars, custom) == TokenStream{"天"});
  Punctuation none{false, {}};
  CHECK(tokenize("a,b", TokenizeMode::chars, none) == TokenStream{"a", ",", "b"});
}

TEST_CASE("tokenize rejects invalid UTF-8") {
  CHECK_THROWS_AS(tokenize("ok \xff bad", TokenizeMode::whitespace), InvalidUtf8);
  CHECK_THROWS_AS(tokenize("\xe6\xbc", TokenizeMode::chars), InvalidUtf8);
}

TEST_CASE("parse_tokenize_mode") {
  CHECK(parse_tokenize_mode("whitespace") == TokenizeMode::whitespace);
  CHECK(parse_tokenize_mode("char") == TokenizeMode::chars);
  CHECK(parse_tokenize_mode("chars") == TokenizeMode::chars);
  CHECK_FALSE(parse_tokenize_mode("jieba").has_value());
}

TEST_CASE("1MB file tokenizes like a reference regex splitter") {
  Rng rng(77);
  const std::vector<std::string> pieces = {"alpha", "Beta", "GAMMA", "δέλτα", "漢字", "x", "Qq9"};
  const std::string seps[] = {" ", "  ", "\t", "\n", "\r\n", " \n\t"};
  std::string text;
  while (text.size() < (1u << 20)) {
    text += pieces[rng() % pieces.size()];
    if (rng() % 4 == 0) text += pieces[rng() % pieces.size()];
    text += seps[rng() % 6];
  }
  qlm::testing::TempDir dir;
  write_text(dir / "big.txt", text);
  const auto tokens = read_tokens(dir / "big.txt", TokenizeMode::whitespace);

  std::string lowered = text;
  for (char& c : lowered)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  const std::regex ws("[ \\t\\r\\n]+");
  TokenStream expected;
  for (std::sregex_token_iterator it(lowered.begin(), lowered.end(), ws, -1), end; it != end; ++it) {
    if (it->length() > 0) expected.push_back(it->str());
  }
  CHECK(tokens.size() == expected.size());
  CHECK(tokens == expected);
}

TEST_CASE("windows enumeration example") {
  const TokenStream t{"a", "b", "c"};
  const auto v = vocab_of(t);
  const auto pairs = windows(t, v, {1, 0.0, 0});
  const std::vector<ContextPair> expected = {{0, {1}}, {1, {0, 2}}, {2, {1}}};
  CHECK(pairs == expected);
}

TEST_CASE("window at least corpus length saturates") {
  const auto t = numbered(6);
  const auto v = vocab_of(t);
  for (std::size_t w : {5u, 6u, 50u}) {
    const auto pairs = windows(t, v, {w, 0.0, 0});
    REQUIRE(pairs.size() == 6);
    for (const auto& p : pairs) {
      std::vector<WordId> others;
      for (WordId id = 0; id < 6; ++id)
        if (id != p.center) others.push_back(id);
      CHECK(p.context == others);
    }
  }
}

TEST_CASE("windows match brute-force enumeration and closed form") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = 1 + rng() % 6;
    const std::size_t n = 2 * w + 1 + rng() % 40;
    TokenStream t;
    for (std::size_t i = 0; i < n; ++i) t.push_back("v" + std::to_string(rng() % 10));
    const auto v = vocab_of(t);
    const auto pairs = windows(t, v, {w, 0.0, 0});
    REQUIRE(pairs == brute_pairs(to_ids(t, v), w));

    std::size_t total = 0;
    for (const auto& p : pairs) total += p.context.size();
    REQUIRE(pairs.size() == n);
    REQUIRE(total == 2 * n * w - w * (w + 1));
  }
}

TEST_CASE("OOV tokens are removed before windowing") {
  const TokenStream t{"a", "zz", "b", "zz", "c"};
  Vocabulary v;
  v.add("a", 1);
  v.add("b", 1);
  v.add("c", 1);
  const auto pairs = windows(t, v, {1, 0.0, 0});
  const std::vector<ContextPair> expected = {{0, {1}}, {1, {0, 2}}, {2, {1}}};
  CHECK(pairs == expected);
  CHECK_THROWS_AS(windows(t, v, {0, 0.0, 0}), DomainError);
}

TEST_CASE("subsampling") {
  CHECK(keep_probability(0.5, 0.0) == 1.0);
  CHECK(keep_probability(0.5, std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(keep_probability(1e-5, 1e-4) == 1.0);
  CHECK(keep_probability(0.01, 1e-4) == doctest::Approx(0.1).epsilon(1e-15));

  TokenStream t;
  Rng gen(5);
  for (int i = 0; i < 20000; ++i) t.push_back(gen() % 2 == 0 ? "the" : "w" + std::to_string(gen() % 2000));
  const auto v = vocab_of(t);

  SUBCASE("t = inf equals no subsampling") {
    const auto a = windows(t, v, {3, std::numeric_limits<double>::infinity(), 9});
    const auto b = windows(t, v, {3, 0.0, 9});
    CHECK(a == b);
  }
  SUBCASE("frequent words are dropped at the expected rate") {
    const auto ids = to_ids(t, v);
    Rng rng(11);
    const auto kept = subsample(ids, v, 1e-3, rng);
    const WordId the = v.id_of("the");
    const double f = static_cast<double>(v.count(the)) / static_cast<double>(v.total_count());
    const double p = keep_probability(f, 1e-3);
    const auto n = static_cast<double>(v.count(the));
    const auto kept_the = static_cast<double>(std::count(kept.begin(), kept.end(), the));
    CHECK(std::abs(kept_the - n * p) <= 4.0 * std::sqrt(n * p * (1 - p)));
  }
  SUBCASE("deterministic given seed") {
    CHECK(windows(t, v, {5, 1e-3, 1}) == windows(t, v, {5, 1e-3, 1}));
    CHECK(windows(t, v, {5, 1e-3, 1}) != windows(t, v, {5, 1e-3, 2}));
  }
  SUBCASE("no OOV ids and no self position") {
    for (const auto& p : windows(t, v, {5, 1e-3, 3})) {
      REQUIRE(p.center < v.size());
      REQUIRE(!p.context.empty());
      REQUIRE(p.context.size() <= 10);
      for (WordId id : p.context) REQUIRE(id < v.size());
    }
  }
}

TEST_CASE("manifest parsing") {
  qlm::testing::TempDir dir;
  write_text(dir / "a.txt", "one two");
  write_text(dir / "b.txt", "three");
  write_text(dir / "c.txt", "four five six");

  SUBCASE("order, comments, repeats, relative paths") {
    const auto m = parse_manifest("# header\nlate\ta.txt\n\nearly\tb.txt\r\nlate\tc.txt", dir.path());
    REQUIRE(m.periods.size() == 2);
    CHECK(m.periods[0].name == "late");
    CHECK(m.periods[0].paths == std::vector<std::filesystem::path>{dir / "a.txt", dir / "c.txt"});
    CHECK(m.periods[1].name == "early");
  }
  SUBCASE("load_manifest resolves against the manifest directory") {
    write_text(dir / "m.tsv", "p\tb.txt\n");
    const auto m = load_manifest(dir / "m.tsv");
    CHECK(m.periods.at(0).paths.at(0) == dir / "b.txt");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_manifest("no tab here\n", dir.path()), DomainError);
    CHECK_THROWS_AS(parse_manifest("\ta.txt\n", dir.path()), DomainError);
    CHECK_THROWS_AS(parse_manifest("# only comments\n", dir.path()), DomainError);
    CHECK_THROWS_AS(parse_manifest("p\tmissing.txt\n", dir.path()), IoError);
  }
}

TEST_CASE("partition_by_period") {
  qlm::testing::TempDir dir;
  write_text(dir / "a.txt", "one two");
  write_text(dir / "b.txt", "three");
  write_text(dir / "c.txt", "four five six");
  write_text(dir / "empty.txt", "  \n");

  SUBCASE("disjoint files and concatenation in listed order") {
    const auto parts = partition_by_period(parse_manifest("x\ta.txt\ny\tb.txt\nx\tc.txt\n", dir.path()),
                                           TokenizeMode::whitespace);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].name == "x");
    CHECK(parts[0].tokens == TokenStream{"one", "two", "four", "five", "six"});
    CHECK(parts[1].tokens == TokenStream{"three"});
  }
  SUBCASE("nine periods") {
    std::string tsv;
    for (int i = 1; i <= 9; ++i) tsv += "period" + std::to_string(i) + "\ta.txt\n";
    const auto parts = partition_by_period(parse_manifest(tsv, dir.path()), TokenizeMode::whitespace);
    REQUIRE(parts.size() == 9);
    for (int i = 0; i < 9; ++i) CHECK(parts[static_cast<std::size_t>(i)].name == "period" + std::to_string(i + 1));
  }
  SUBCASE("empty period") {
    CHECK_THROWS_AS(partition_by_period(parse_manifest("x\ta.txt\ny\tempty.txt\n", dir.path()),
                                        TokenizeMode::whitespace),
                    DomainError);
  }
}
