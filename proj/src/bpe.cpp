#include "unmt/bpe.hpp"

#include "unmt/utf8.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace unmt {

namespace {

using Word = std::vector<std::string>;

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

Word to_symbols(const std::string& word, const std::string& marker) {
  std::vector<char32_t> cps;
  Word syms;
  if (utf8_decode(word, cps)) {
    for (char32_t cp : cps) {
      std::string s;
      utf8_append(s, cp);
      syms.push_back(std::move(s));
    }
  } else {
    // Invalid UTF-8 should not reach here through the pipeline; fall back
    // to byte symbols so segmentation still round-trips.
    for (char c : word) syms.push_back(std::string(1, c));
  }
  if (!syms.empty()) syms.back() += marker;
  return syms;
}

// Merges all occurrences of (left,right) in the word, leftmost first.
bool merge_in_word(Word& w, const std::string& left, const std::string& right) {
  bool any = false;
  Word out;
  out.reserve(w.size());
  std::size_t i = 0;
  while (i < w.size()) {
    if (i + 1 < w.size() && w[i] == left && w[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
      any = true;
    } else {
      out.push_back(w[i]);
      ++i;
    }
  }
  if (any) w.swap(out);
  return any;
}

}  // namespace

BpeModel learn_bpe(const std::vector<RawCorpus>& corpora,
                   std::size_t merge_count) {
  if (merge_count < 1) throw std::runtime_error("learn_bpe: merge_count < 1");

  // Word frequency over all corpora.
  std::unordered_map<std::string, std::int64_t> word_freq;
  for (const RawCorpus& c : corpora)
    for (const std::string& line : c.lines)
      for (std::string& w : split_ws(line)) word_freq[std::move(w)]++;
  if (word_freq.empty()) throw std::runtime_error("learn_bpe: no training text");

  BpeModel model;
  std::vector<std::pair<Word, std::int64_t>> words;
  words.reserve(word_freq.size());
  {
    // Deterministic word order (irrelevant to counts, kept tidy for debugging).
    std::vector<const std::pair<const std::string, std::int64_t>*> items;
    items.reserve(word_freq.size());
    for (const auto& kv : word_freq) items.push_back(&kv);
    std::sort(items.begin(), items.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    for (auto* kv : items)
      words.emplace_back(to_symbols(kv->first, model.end_of_word_marker),
                         kv->second);
  }

  for (std::size_t step = 0; step < merge_count; ++step) {
    // std::map keys are ordered, which gives the lexicographic tie-break
    // for free when scanning for the max.
    std::map<std::pair<std::string, std::string>, std::int64_t> pair_freq;
    for (const auto& [w, f] : words)
      for (std::size_t i = 0; i + 1 < w.size(); ++i)
        pair_freq[{w[i], w[i + 1]}] += f;
    if (pair_freq.empty()) break;

    auto best = pair_freq.begin();
    for (auto it = std::next(pair_freq.begin()); it != pair_freq.end(); ++it)
      if (it->second > best->second) best = it;

    const auto& [left, right] = best->first;
    for (auto& [w, f] : words) merge_in_word(w, left, right);
    model.merges.emplace_back(left, right);
  }
  return model;
}

namespace {

const Word& segment_word(const BpeModel& model, const std::string& word,
                         std::unordered_map<std::string, Word>& cache) {
  auto it = cache.find(word);
  if (it == cache.end()) {
    Word w = to_symbols(word, model.end_of_word_marker);
    bool changed = true;
    while (changed && w.size() > 1) {
      changed = false;
      for (const auto& [l, r] : model.merges) {
        if (merge_in_word(w, l, r)) {
          changed = true;
          break;  // restart from the first rule
        }
      }
    }
    it = cache.emplace(word, std::move(w)).first;
  }
  return it->second;
}

std::vector<std::string> apply_bpe_cached(
    const BpeModel& model, const std::string& line,
    std::unordered_map<std::string, Word>& cache) {
  std::vector<std::string> out;
  for (const std::string& word : split_ws(line)) {
    const Word& w = segment_word(model, word, cache);
    out.insert(out.end(), w.begin(), w.end());
  }
  return out;
}

}  // namespace

std::vector<std::string> apply_bpe(const BpeModel& model,
                                   const std::string& line) {
  std::unordered_map<std::string, Word> cache;
  return apply_bpe_cached(model, line, cache);
}

std::string apply_bpe_line(const BpeModel& model, const std::string& line) {
  std::string out;
  for (const std::string& s : apply_bpe(model, line)) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

RawCorpus apply_bpe_corpus(const BpeModel& model, const RawCorpus& corpus) {
  RawCorpus out;
  out.language = corpus.language;
  out.lines.reserve(corpus.lines.size());
  std::unordered_map<std::string, Word> cache;
  for (const std::string& line : corpus.lines) {
    std::string joined;
    for (const std::string& s : apply_bpe_cached(model, line, cache)) {
      if (!joined.empty()) joined += ' ';
      joined += s;
    }
    out.lines.push_back(std::move(joined));
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& subwords,
                       const std::string& marker) {
  std::string out;
  for (const std::string& s : subwords) {
    if (s.size() >= marker.size() &&
        s.compare(s.size() - marker.size(), marker.size(), marker) == 0) {
      out += s.substr(0, s.size() - marker.size());
      out += ' ';
    } else {
      out += s;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string detokenize_line(const std::string& bpe_line,
                            const std::string& marker) {
  return detokenize(split_ws(bpe_line), marker);
}

void save_bpe(const BpeModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_bpe: cannot write " + path);
  out << "bpe-v1 " << model.merges.size() << "\n";
  for (const auto& [l, r] : model.merges) out << l << '\t' << r << "\n";
  if (!out) throw std::runtime_error("save_bpe: write failed for " + path);
}

BpeModel load_bpe(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_bpe: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string tag;
  std::size_t count = 0;
  if (!(hs >> tag >> count) || tag != "bpe-v1")
    throw std::runtime_error("load_bpe: bad header in " + path);
  BpeModel model;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("load_bpe: malformed rule in " + path);
    model.merges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  if (model.merges.size() != count)
    throw std::runtime_error("load_bpe: rule count does not match header in " +
                             path);
  return model;
}

}  // namespace unmt
