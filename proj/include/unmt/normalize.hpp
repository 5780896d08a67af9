#pragma once

#include "unmt/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace unmt {

struct RawCorpus {
  std::string language;            // display tag, e.g. "src", "en"
  std::vector<std::string> lines;  // one sentence per line, UTF-8, no '\n'
};

struct NormalizeReport {
  std::vector<std::size_t> invalid_utf8;  // input line indices, rejected
  std::vector<std::size_t> dropped_empty; // input line indices, dropped
};

// Unicode NFC over a single string (exposed for tests).
std::u32string nfc(const std::u32string& in);
std::string nfc_utf8(const std::string& in);

// True if the codepoint is in the punctuation split table. The table is the
// ASCII punctuation block plus common typographic punctuation and the
// Devanagari dandas; see normalize.cpp for the full list.
bool is_split_punct(char32_t cp);

char32_t simple_lower(char32_t cp);

// Normalizes one line: NFC, whitespace collapsed to single spaces, each
// punctuation codepoint split into its own token, optional lowercasing.
// Returns false on invalid UTF-8.
bool normalize_line(const std::string& in, bool lowercase, std::string& out);

// Applies normalize_line to every line. Invalid lines are rejected and
// lines that normalize to nothing are dropped; both are reported by index.
RawCorpus normalize_corpus(const RawCorpus& raw, bool lowercase,
                           NormalizeReport* report = nullptr);

}  // namespace unmt
