#pragma once

#include "unmt/normalize.hpp"
#include "unmt/types.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace unmt {

class Vocabulary {
 public:
  Vocabulary();

  // Builds from BPE-segmented corpora: tokens ordered by descending
  // frequency, ties lexicographic, specials prepended. Throws if no token
  // is present.
  static Vocabulary build(const std::vector<RawCorpus>& corpora);

  TokenId id(const std::string& token) const;  // Unk if absent
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;  // throws on out-of-range
  std::int64_t frequency(TokenId id) const;

  Index size() const { return static_cast<Index>(tokens_.size()); }
  bool is_special(TokenId id) const { return id >= 0 && id < special::Count; }

  // Token ids (non-special) in vocabulary order, i.e. by descending corpus
  // frequency.
  std::vector<TokenId> regular_ids() const;

  IdSeq encode(const std::vector<std::string>& subwords) const;
  IdSeq encode_line(const std::string& bpe_line) const;

  // Drops specials, merges BPE subwords back into words.
  std::string decode(const IdSeq& ids) const;

  std::uint64_t content_hash() const;

  // "token<TAB>frequency" per line, specials first.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  void add(const std::string& token, std::int64_t freq);

  std::vector<std::string> tokens_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace unmt
