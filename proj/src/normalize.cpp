#include "unmt/normalize.hpp"

#include "unmt/utf8.hpp"

#include <algorithm>
#include <cstdint>

namespace unmt {

namespace {

struct DecompEntry {
  std::uint32_t cp, a, b;
};
struct CccEntry {
  std::uint32_t cp;
  std::uint8_t ccc;
};
struct CompEntry {
  std::uint32_t a, b, cp;
};
struct LowerEntry {
  std::uint32_t cp, lower;
};

#include "unicode_tables.inc"

constexpr char32_t kHangulSBase = 0xac00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11a7;
constexpr int kHangulLCount = 19, kHangulVCount = 21, kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

const DecompEntry* find_decomp(char32_t cp) {
  auto it = std::lower_bound(
      std::begin(kDecomp), std::end(kDecomp), static_cast<std::uint32_t>(cp),
      [](const DecompEntry& e, std::uint32_t v) { return e.cp < v; });
  if (it != std::end(kDecomp) && it->cp == static_cast<std::uint32_t>(cp))
    return it;
  return nullptr;
}

int ccc(char32_t cp) {
  auto it = std::lower_bound(
      std::begin(kCcc), std::end(kCcc), static_cast<std::uint32_t>(cp),
      [](const CccEntry& e, std::uint32_t v) { return e.cp < v; });
  if (it != std::end(kCcc) && it->cp == static_cast<std::uint32_t>(cp))
    return it->ccc;
  return 0;
}

char32_t compose_pair(char32_t a, char32_t b) {
  // Hangul LV / LVT composition.
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
      b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
    return kHangulSBase + ((a - kHangulLBase) * kHangulVCount +
                           (b - kHangulVBase)) * kHangulTCount;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    return a + (b - kHangulTBase);
  }
  CompEntry key{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                0};
  auto it = std::lower_bound(std::begin(kComp), std::end(kComp), key,
                             [](const CompEntry& e, const CompEntry& k) {
                               return e.a != k.a ? e.a < k.a : e.b < k.b;
                             });
  if (it != std::end(kComp) && it->a == key.a && it->b == key.b) return it->cp;
  return 0;
}

void decompose_into(char32_t cp, std::u32string& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    char32_t s = cp - kHangulSBase;
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    char32_t t = s % kHangulTCount;
    if (t != 0) out.push_back(kHangulTBase + t);
    return;
  }
  if (const DecompEntry* e = find_decomp(cp)) {
    decompose_into(e->a, out);
    if (e->b != 0) decompose_into(e->b, out);
    return;
  }
  out.push_back(cp);
}

}  // namespace

std::u32string nfc(const std::u32string& in) {
  // Canonical decomposition.
  std::u32string d;
  d.reserve(in.size());
  for (char32_t cp : in) decompose_into(cp, d);

  // Canonical ordering: stable sort runs of nonzero-ccc marks.
  for (std::size_t i = 0; i < d.size();) {
    if (ccc(d[i]) == 0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < d.size() && ccc(d[j]) != 0) ++j;
    std::stable_sort(d.begin() + static_cast<std::ptrdiff_t>(i),
                     d.begin() + static_cast<std::ptrdiff_t>(j),
                     [](char32_t a, char32_t b) { return ccc(a) < ccc(b); });
    i = j;
  }

  // Canonical composition (UAX #15). A character composes with the last
  // starter unless blocked: a starter is blocked by anything in between,
  // a mark by a preceding mark of equal or higher class.
  std::u32string out;
  out.reserve(d.size());
  std::ptrdiff_t last_starter = -1;
  int prev_cc = 0;  // class of the most recently appended character
  for (char32_t cp : d) {
    int cls = ccc(cp);
    if (last_starter >= 0) {
      bool unblocked =
          cls == 0
              ? out.size() == static_cast<std::size_t>(last_starter) + 1
              : prev_cc < cls;
      if (unblocked) {
        if (char32_t c =
                compose_pair(out[static_cast<std::size_t>(last_starter)], cp)) {
          out[static_cast<std::size_t>(last_starter)] = c;
          continue;
        }
      }
    }
    if (cls == 0) last_starter = static_cast<std::ptrdiff_t>(out.size());
    prev_cc = cls;
    out.push_back(cp);
  }
  return out;
}

std::string nfc_utf8(const std::string& in) {
  std::vector<char32_t> cps;
  if (!utf8_decode(in, cps)) return in;
  std::u32string u(cps.begin(), cps.end());
  std::u32string c = nfc(u);
  std::string out;
  for (char32_t cp : c) utf8_append(out, cp);
  return out;
}

bool is_split_punct(char32_t cp) {
  // ASCII punctuation.
  if ((cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
      (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e))
    return true;
  switch (cp) {
    case 0x0964:  // danda
    case 0x0965:  // double danda
    case 0x2018:  // left single quote
    case 0x2019:  // right single quote
    case 0x201c:  // left double quote
    case 0x201d:  // right double quote
    case 0x2013:  // en dash
    case 0x2014:  // em dash
    case 0x2026:  // ellipsis
    case 0x00a1:  // inverted exclamation
    case 0x00bf:  // inverted question
    case 0x00ab:  // left guillemet
    case 0x00bb:  // right guillemet
    case 0x3002:  // ideographic full stop
    case 0x3001:  // ideographic comma
    case 0xff0c:  // fullwidth comma
    case 0xff0e:  // fullwidth full stop
    case 0xff1f:  // fullwidth question mark
    case 0xff01:  // fullwidth exclamation
      return true;
    default:
      return false;
  }
}

char32_t simple_lower(char32_t cp) {
  auto it = std::lower_bound(
      std::begin(kLower), std::end(kLower), static_cast<std::uint32_t>(cp),
      [](const LowerEntry& e, std::uint32_t v) { return e.cp < v; });
  if (it != std::end(kLower) && it->cp == static_cast<std::uint32_t>(cp))
    return it->lower;
  return cp;
}

namespace {

bool is_space(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\r' || cp == 0x0b || cp == 0x0c ||
         cp == 0x00a0 || (cp >= 0x2000 && cp <= 0x200a) || cp == 0x202f ||
         cp == 0x205f || cp == 0x3000 || cp == 0x2028 || cp == 0x2029;
}

}  // namespace

bool normalize_line(const std::string& in, bool lowercase, std::string& out) {
  std::vector<char32_t> cps;
  if (!utf8_decode(in, cps)) return false;

  std::u32string composed = nfc(std::u32string(cps.begin(), cps.end()));
  if (lowercase)
    for (char32_t& cp : composed) cp = simple_lower(cp);

  // Tokenize: spaces separate, every punctuation codepoint stands alone.
  std::u32string o;
  o.reserve(composed.size() + 8);
  bool pending_space = false;
  bool at_start = true;
  auto emit = [&](char32_t cp) {
    if (pending_space && !at_start) o.push_back(U' ');
    pending_space = false;
    at_start = false;
    o.push_back(cp);
  };
  for (char32_t cp : composed) {
    if (is_space(cp)) {
      pending_space = true;
    } else if (is_split_punct(cp)) {
      pending_space = true;
      emit(cp);
      pending_space = true;
    } else {
      emit(cp);
    }
  }

  out.clear();
  for (char32_t cp : o) utf8_append(out, cp);
  return true;
}

RawCorpus normalize_corpus(const RawCorpus& raw, bool lowercase,
                           NormalizeReport* report) {
  RawCorpus out;
  out.language = raw.language;
  out.lines.reserve(raw.lines.size());
  for (std::size_t i = 0; i < raw.lines.size(); ++i) {
    std::string line;
    if (!normalize_line(raw.lines[i], lowercase, line)) {
      if (report) report->invalid_utf8.push_back(i);
      continue;
    }
    if (line.empty()) {
      if (report) report->dropped_empty.push_back(i);
      continue;
    }
    out.lines.push_back(std::move(line));
  }
  return out;
}

}  // namespace unmt
