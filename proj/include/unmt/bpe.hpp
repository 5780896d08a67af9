#pragma once

#include "unmt/normalize.hpp"

#include <string>
#include <utility>
#include <vector>

namespace unmt {

// Byte-pair encoding over whitespace-separated words. Each word is split
// into codepoint symbols with kEndOfWord appended to the final symbol;
// merges then join adjacent symbols. Detokenization concatenates subwords
// and turns each end-of-word marker back into a space, which recovers the
// input line exactly as long as the input does not itself contain the
// marker string (normalize_corpus output never does, since '<', '/' and
// '>' are split punctuation).
inline constexpr const char* kEndOfWord = "</w>";

struct BpeModel {
  std::vector<std::pair<std::string, std::string>> merges;
  std::string end_of_word_marker = kEndOfWord;

  std::size_t merge_count() const { return merges.size(); }
};

// Learns merges by greedy highest-frequency pair selection over the
// concatenated corpora; ties break lexicographically on (left, right).
// Returns min(merge_count, available merges) rules. Throws on empty input
// or merge_count < 1.
BpeModel learn_bpe(const std::vector<RawCorpus>& corpora,
                   std::size_t merge_count);

// Deterministic segmentation of one line into subword strings. At each
// step the first rule in model order with an occurrence in the word is
// applied to all its occurrences, leftmost first.
std::vector<std::string> apply_bpe(const BpeModel& model,
                                   const std::string& line);

// Segments a whole line and joins the subwords with single spaces.
std::string apply_bpe_line(const BpeModel& model, const std::string& line);

// Segments every line, sharing the per-word segmentation cache.
RawCorpus apply_bpe_corpus(const BpeModel& model, const RawCorpus& corpus);

// Inverse of apply_bpe_line: merges subwords back into words.
std::string detokenize(const std::vector<std::string>& subwords,
                       const std::string& marker = kEndOfWord);
std::string detokenize_line(const std::string& bpe_line,
                            const std::string& marker = kEndOfWord);

// Line-oriented model file: header "bpe-v1 <count>", then one
// "left<TAB>right" rule per line.
void save_bpe(const BpeModel& model, const std::string& path);
BpeModel load_bpe(const std::string& path);

}  // namespace unmt
