#include "unmt/normalize.hpp"
#include "unmt/rng.hpp"
#include "unmt/utf8.hpp"

#include <doctest.h>

#include <string>
#include <vector>

using namespace unmt;

namespace {

struct NfcVector {
  const char8_t* input;
  const char8_t* expected;
};
const NfcVector kNfcVectors[] = {
#include "nfc_vectors.inc"
};

std::string s8(const char8_t* p) {
  return std::string(reinterpret_cast<const char*>(p));
}

}  // namespace

TEST_CASE("nfc matches frozen reference vectors") {
  for (const auto& v : kNfcVectors) {
    CAPTURE(s8(v.input));
    CHECK(nfc_utf8(s8(v.input)) == s8(v.expected));
  }
}

TEST_CASE("normalize_line splits punctuation and lowercases") {
  std::string out;
  REQUIRE(normalize_line("Hello,  World!", true, out));
  CHECK(out == "hello , world !");
}

TEST_CASE("normalize_line keeps case when lowercase is off") {
  std::string out;
  REQUIRE(normalize_line("Hello World", false, out));
  CHECK(out == "Hello World");
}

TEST_CASE("normalize_corpus drops empty lines with index") {
  RawCorpus raw{"src", {"a b", "", "   ", "c"}};
  NormalizeReport rep;
  RawCorpus norm = normalize_corpus(raw, false, &rep);
  CHECK(norm.lines == std::vector<std::string>{"a b", "c"});
  CHECK(rep.dropped_empty == std::vector<std::size_t>{1, 2});
  CHECK(rep.invalid_utf8.empty());
}

TEST_CASE("normalize_corpus rejects invalid utf8 with index") {
  RawCorpus raw{"src", {"ok", "bad\xff\xfe", "fine"}};
  NormalizeReport rep;
  RawCorpus norm = normalize_corpus(raw, false, &rep);
  CHECK(norm.lines.size() == 2);
  CHECK(rep.invalid_utf8 == std::vector<std::size_t>{1});
}

TEST_CASE("normalize is idempotent on mixed-script lines") {
  // Random lines mixing Latin, Devanagari, CJK, combining marks,
  // punctuation and odd whitespace.
  Rng rng(42);
  const std::vector<char32_t> pool = {
      U'a',    U'B',     U'z',    0x00e9, 0x0301, 0x0915, 0x093c, 0x0940,
      0x4e2d,  0x6587,   0x1100,  0x1161, U'.',   U',',   U'!',   0x0964,
      U' ',    U'\t',    0x00a0,  U'0',   U'9',   0x201c, 0x201d, U'-',
      0x2014,  U'(',     U')',    0x0130, 0x0131, 0xc5};
  for (int line = 0; line < 1000; ++line) {
    std::vector<char32_t> cps;
    int len = 1 + static_cast<int>(rng.uniform_int(40));
    for (int i = 0; i < len; ++i)
      cps.push_back(pool[rng.uniform_int(pool.size())]);
    std::string raw = utf8_encode(cps);
    bool lower = rng.bernoulli(0.5);
    std::string once, twice;
    REQUIRE(normalize_line(raw, lower, once));
    REQUIRE(normalize_line(once, lower, twice));
    CAPTURE(raw);
    CHECK(once == twice);
  }
}

TEST_CASE("composition exclusions stay decomposed") {
  // U+0958 decomposes to ka + nukta and must not recompose.
  std::string qa = "क़";
  std::string expect = "क़";
  CHECK(nfc_utf8(qa) == expect);
  CHECK(nfc_utf8(expect) == expect);
}
