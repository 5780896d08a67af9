#include "unmt/bpe.hpp"

#include "unmt/corpus_io.hpp"
#include "unmt/rng.hpp"
#include "unmt/utf8.hpp"

#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

using namespace unmt;

TEST_CASE("learn_bpe picks highest-frequency pair") {
  // "aaab" x10: pairs (a,a)=20, (a,b</w>)=10 -> first merge is (a,a).
  RawCorpus c{"src", std::vector<std::string>(10, "aaab")};
  BpeModel m = learn_bpe({c}, 1);
  REQUIRE(m.merges.size() == 1);
  CHECK(m.merges[0] == std::pair<std::string, std::string>("a", "a"));
}

TEST_CASE("learn_bpe rejects merge_count 0 and empty corpus") {
  RawCorpus c{"src", {"ab"}};
  CHECK_THROWS(learn_bpe({c}, 0));
  RawCorpus empty{"src", {}};
  CHECK_THROWS(learn_bpe({empty}, 5));
}

TEST_CASE("learn_bpe on single-character words yields no merges") {
  RawCorpus c{"src", {"a b c", "a b"}};
  BpeModel m = learn_bpe({c}, 10);
  CHECK(m.merges.empty());
}

TEST_CASE("learn_bpe tie-break is lexicographic") {
  // "ab" x3 and "ba" x3 give pairs (a,b</w>)=3 and (b,a</w>)=3; the
  // lexicographic winner is ("a","b</w>").
  RawCorpus c{"src", {"ab ba", "ab ba", "ab ba"}};
  BpeModel m = learn_bpe({c}, 1);
  REQUIRE(m.merges.size() == 1);
  CHECK(m.merges[0].first == "a");
  CHECK(m.merges[0].second == "b</w>");
}

TEST_CASE("apply_bpe hand-traced merge") {
  BpeModel m;
  m.merges = {{"a", "a"}};
  auto subwords = apply_bpe(m, "aaab");
  CHECK(subwords == std::vector<std::string>{"aa", "a", "b</w>"});
}

TEST_CASE("apply_bpe of empty line is empty") {
  BpeModel m;
  CHECK(apply_bpe(m, "").empty());
}

TEST_CASE("bpe round-trips random normalized lines") {
  Rng rng(9);
  const std::vector<char32_t> pool = {U'a', U'b', U'c', U'd',   U'e',
                                      U'x', U'.', U',', 0x0915, 0x0940,
                                      0x4e2d, U'0', U'1'};
  // Train on some random text, then round-trip fresh lines.
  std::vector<std::string> train_lines;
  auto random_line = [&]() {
    std::vector<char32_t> cps;
    int words = 1 + static_cast<int>(rng.uniform_int(8));
    for (int w = 0; w < words; ++w) {
      if (w) cps.push_back(U' ');
      int len = 1 + static_cast<int>(rng.uniform_int(6));
      for (int i = 0; i < len; ++i)
        cps.push_back(pool[rng.uniform_int(pool.size())]);
    }
    return utf8_encode(cps);
  };
  for (int i = 0; i < 300; ++i) train_lines.push_back(random_line());
  RawCorpus train{"src", train_lines};
  RawCorpus norm = normalize_corpus(train, true, nullptr);
  BpeModel m = learn_bpe({norm}, 80);

  for (int i = 0; i < 10000; ++i) {
    std::string line;
    REQUIRE(normalize_line(random_line(), true, line));
    if (line.empty()) continue;
    CAPTURE(line);
    CHECK(detokenize(apply_bpe(m, line)) == line);
  }
}

TEST_CASE("learn_bpe is deterministic across runs") {
  Rng rng(11);
  std::vector<std::string> lines;
  for (int i = 0; i < 200; ++i) {
    std::string s;
    int len = 2 + static_cast<int>(rng.uniform_int(10));
    for (int j = 0; j < len; ++j)
      s += static_cast<char>('a' + rng.uniform_int(5));
    lines.push_back(s);
  }
  RawCorpus c{"src", lines};
  BpeModel a = learn_bpe({c}, 60);
  BpeModel b = learn_bpe({c}, 60);
  CHECK(a.merges == b.merges);
}

TEST_CASE("bpe model file round-trip") {
  RawCorpus c{"src", {"abab abab cd"}};
  BpeModel m = learn_bpe({c}, 5);
  std::string path = "bpe_test_model.txt";
  save_bpe(m, path);
  BpeModel loaded = load_bpe(path);
  CHECK(loaded.merges == m.merges);
  std::remove(path.c_str());
}
