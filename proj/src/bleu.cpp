#include "unmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace unmt {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

using NgramCounts = std::map<std::string, long>;

NgramCounts count_ngrams(const std::vector<std::string>& toks, int n) {
  NgramCounts counts;
  if (static_cast<int>(toks.size()) < n) return counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= toks.size(); ++i) {
    std::string key;
    for (int j = 0; j < n; ++j) {
      if (j) key += '\x1f';
      key += toks[i + static_cast<std::size_t>(j)];
    }
    counts[key]++;
  }
  return counts;
}

struct PrecisionStats {
  long matches[4] = {0, 0, 0, 0};
  long totals[4] = {0, 0, 0, 0};
  long cand_len = 0;
  long ref_len = 0;

  void accumulate(const std::vector<std::string>& cand,
                  const std::vector<std::string>& ref) {
    cand_len += static_cast<long>(cand.size());
    ref_len += static_cast<long>(ref.size());
    for (int n = 1; n <= 4; ++n) {
      NgramCounts c = count_ngrams(cand, n);
      NgramCounts r = count_ngrams(ref, n);
      for (const auto& [key, count] : c) {
        auto it = r.find(key);
        long clipped = it == r.end() ? 0 : std::min(count, it->second);
        matches[n - 1] += clipped;
        totals[n - 1] += count;
      }
    }
  }

  Real brevity_penalty() const {
    if (cand_len == 0) return 0;
    if (cand_len >= ref_len) return 1;
    return std::exp(1.0 - static_cast<Real>(ref_len) /
                              static_cast<Real>(cand_len));
  }
};

}  // namespace

Real corpus_bleu(const std::vector<std::string>& candidates,
                 const std::vector<std::string>& references) {
  if (candidates.size() != references.size())
    throw std::runtime_error("corpus_bleu: list length mismatch");
  if (candidates.empty())
    throw std::runtime_error("corpus_bleu: empty input");

  PrecisionStats st;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    st.accumulate(tokens_of(candidates[i]), tokens_of(references[i]));

  Real log_sum = 0;
  for (int n = 0; n < 4; ++n) {
    if (st.matches[n] == 0 || st.totals[n] == 0) return 0;
    log_sum += std::log(static_cast<Real>(st.matches[n]) /
                        static_cast<Real>(st.totals[n]));
  }
  return 100.0 * st.brevity_penalty() * std::exp(log_sum / 4.0);
}

Real sentence_bleu(const std::string& candidate, const std::string& reference) {
  PrecisionStats st;
  st.accumulate(tokens_of(candidate), tokens_of(reference));
  if (st.cand_len == 0) return 0;

  Real log_sum = 0;
  for (int n = 0; n < 4; ++n) {
    Real p;
    if (n == 0 && st.matches[0] > 0) {
      p = static_cast<Real>(st.matches[0]) / static_cast<Real>(st.totals[0]);
    } else {
      p = static_cast<Real>(st.matches[n] + 1) /
          static_cast<Real>(st.totals[n] + 1);
    }
    log_sum += std::log(p);
  }
  return 100.0 * st.brevity_penalty() * std::exp(log_sum / 4.0);
}

}  // namespace unmt
