#include "unmt/vocab.hpp"

#include "unmt/bpe.hpp"
#include "unmt/hash.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unmt {

namespace {
const char* kSpecialNames[special::Count] = {
    "<pad>", "<unk>", "<s>", "</s>", "<mask>", "<2src>", "<2tgt>"};
}

Vocabulary::Vocabulary() {
  for (TokenId i = 0; i < special::Count; ++i) add(kSpecialNames[i], 0);
}

void Vocabulary::add(const std::string& token, std::int64_t freq) {
  if (index_.count(token))
    throw std::runtime_error("Vocabulary: duplicate token '" + token + "'");
  index_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(token);
  freqs_.push_back(freq);
}

Vocabulary Vocabulary::build(const std::vector<RawCorpus>& corpora) {
  std::unordered_map<std::string, std::int64_t> freq;
  for (const RawCorpus& c : corpora) {
    for (const std::string& line : c.lines) {
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) freq[tok]++;
    }
  }
  if (freq.empty()) throw std::runtime_error("Vocabulary::build: no tokens");

  std::vector<std::pair<std::string, std::int64_t>> items(freq.begin(),
                                                          freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocabulary v;
  for (const auto& [tok, f] : items) {
    // Corpus text can never produce the special surfaces ('<' and '>' are
    // split punctuation), but guard anyway.
    if (!v.index_.count(tok)) v.add(tok, f);
  }
  return v;
}

TokenId Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? special::Unk : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw std::runtime_error("Vocabulary: id out of range: " +
                             std::to_string(id));
  return tokens_[static_cast<std::size_t>(id)];
}

std::int64_t Vocabulary::frequency(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= freqs_.size())
    throw std::runtime_error("Vocabulary: id out of range: " +
                             std::to_string(id));
  return freqs_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::regular_ids() const {
  std::vector<TokenId> out;
  out.reserve(tokens_.size());
  for (TokenId i = special::Count; i < size(); ++i) out.push_back(i);
  return out;
}

IdSeq Vocabulary::encode(const std::vector<std::string>& subwords) const {
  IdSeq ids;
  ids.reserve(subwords.size());
  for (const std::string& s : subwords) ids.push_back(id(s));
  return ids;
}

IdSeq Vocabulary::encode_line(const std::string& bpe_line) const {
  std::istringstream ss(bpe_line);
  std::string tok;
  IdSeq ids;
  while (ss >> tok) ids.push_back(id(tok));
  return ids;
}

std::string Vocabulary::decode(const IdSeq& ids) const {
  std::vector<std::string> subwords;
  subwords.reserve(ids.size());
  for (TokenId i : ids) {
    const std::string& tok = token(i);  // validates range
    if (is_special(i)) continue;
    subwords.push_back(tok);
  }
  return detokenize(subwords);
}

std::uint64_t Vocabulary::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const std::string& t : tokens_) {
    h = fnv1a(t, h);
    h = fnv1a(std::string_view("\n", 1), h);
  }
  return h;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Vocabulary::save: cannot write " + path);
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    out << tokens_[i] << '\t' << freqs_[i] << "\n";
  if (!out) throw std::runtime_error("Vocabulary::save: write failed " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Vocabulary::load: cannot open " + path);
  Vocabulary v;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("Vocabulary::load: malformed line " +
                               std::to_string(lineno) + " in " + path);
    std::string tok = line.substr(0, tab);
    std::int64_t f = std::stoll(line.substr(tab + 1));
    if (lineno <= static_cast<std::size_t>(special::Count)) {
      TokenId id = static_cast<TokenId>(lineno - 1);
      if (tok != kSpecialNames[id])
        throw std::runtime_error(
            "Vocabulary::load: special token mismatch at line " +
            std::to_string(lineno) + " in " + path);
      continue;
    }
    v.add(tok, f);
  }
  if (v.size() <= special::Count)
    throw std::runtime_error("Vocabulary::load: no tokens in " + path);
  return v;
}

}  // namespace unmt
