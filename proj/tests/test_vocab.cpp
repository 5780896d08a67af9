#include "unmt/vocab.hpp"

#include "unmt/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace unmt;

TEST_CASE("vocabulary fixes special ids and orders by frequency") {
  RawCorpus c{"src", {"a</w> a</w> b</w>"}};
  Vocabulary v = Vocabulary::build({c});
  CHECK(v.id("<pad>") == special::Pad);
  CHECK(special::Pad == 0);
  CHECK(v.id("<unk>") == special::Unk);
  CHECK(v.id("<mask>") == special::Mask);
  CHECK(v.size() == special::Count + 2);
  CHECK(v.token(special::Count) == "a</w>");
  CHECK(v.token(special::Count + 1) == "b</w>");
}

TEST_CASE("vocabulary frequency ties order lexicographically") {
  Rng rng(3);
  std::vector<std::string> words;
  for (int i = 0; i < 40; ++i) {
    std::string w;
    for (int j = 0; j < 3; ++j)
      w += static_cast<char>('a' + rng.uniform_int(6));
    w += "</w>";
    // Repeat a word 1..4 times to create frequency ties.
    int reps = 1 + static_cast<int>(rng.uniform_int(4));
    for (int r = 0; r < reps; ++r) words.push_back(w);
  }
  std::string line;
  for (const auto& w : words) {
    if (!line.empty()) line += ' ';
    line += w;
  }
  RawCorpus c{"src", {line}};
  Vocabulary v = Vocabulary::build({c});

  // Brute-force oracle: count, sort by (-freq, token).
  std::map<std::string, long> freq;
  for (const auto& w : words) freq[w]++;
  std::vector<std::pair<std::string, long>> expect(freq.begin(), freq.end());
  std::sort(expect.begin(), expect.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  REQUIRE(v.size() == special::Count + static_cast<Index>(expect.size()));
  for (std::size_t i = 0; i < expect.size(); ++i)
    CHECK(v.token(special::Count + static_cast<TokenId>(i)) == expect[i].first);
}

TEST_CASE("token-id round trip is a bijection over non-specials") {
  RawCorpus c{"src", {"x</w> y</w> z</w> x</w>"}};
  Vocabulary v = Vocabulary::build({c});
  for (TokenId id = special::Count; id < v.size(); ++id)
    CHECK(v.id(v.token(id)) == id);
}

TEST_CASE("encode maps OOV to UNK, decode strips specials") {
  RawCorpus c{"src", {"dog</w> cat</w>"}};
  Vocabulary v = Vocabulary::build({c});
  IdSeq ids = v.encode({"dog</w>", "unseen</w>"});
  CHECK(ids[1] == special::Unk);

  IdSeq seq = {v.id("cat</w>"), special::Eos};
  CHECK(v.decode(seq) == "cat");
}

TEST_CASE("decode rejects out-of-range id") {
  RawCorpus c{"src", {"a</w>"}};
  Vocabulary v = Vocabulary::build({c});
  CHECK_THROWS(v.decode({static_cast<TokenId>(v.size())}));
  CHECK_THROWS(v.decode({-1}));
}

TEST_CASE("encode-decode identity for in-vocab line") {
  RawCorpus c{"src", {"the</w> cat</w> sat</w>"}};
  Vocabulary v = Vocabulary::build({c});
  IdSeq ids = v.encode_line("the</w> cat</w> sat</w>");
  CHECK(v.decode(ids) == "the cat sat");
}

TEST_CASE("vocabulary file round-trip") {
  RawCorpus c{"src", {"b</w> b</w> a</w> ccc"}};
  Vocabulary v = Vocabulary::build({c});
  std::string path = "vocab_test.txt";
  v.save(path);
  Vocabulary l = Vocabulary::load(path);
  REQUIRE(l.size() == v.size());
  for (TokenId i = 0; i < v.size(); ++i) {
    CHECK(l.token(i) == v.token(i));
    CHECK(l.frequency(i) == v.frequency(i));
  }
  CHECK(l.content_hash() == v.content_hash());
  std::remove(path.c_str());
}
