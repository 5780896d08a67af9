#include "unmt/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unmt {

namespace {

bool is_generatable(TokenId id) {
  // EOS terminates; UNK and regular tokens may be emitted. Everything
  // else (PAD, MASK, BOS, language tokens) is banned from generation.
  return id == special::Eos || id == special::Unk || id >= special::Count;
}

TokenId start_token(const Parameters& p, Lang target) {
  return decoder_start_token(p.config, target);
}

int generation_budget(const Parameters& p, const DecodeOptions& opt) {
  int budget = p.config.max_len - 1;  // one position is spent on the start
  if (opt.max_len > 0) budget = std::min(budget, opt.max_len);
  return budget;
}

Vector log_softmax(const Vector& logits) {
  Real mx = logits.maxCoeff();
  Real lse = mx + std::log((logits.array() - mx).exp().sum());
  return logits.array() - lse;
}

TokenSequence greedy_decode(const Parameters& p, const Matrix& enc_out,
                            Lang target, const DecodeOptions& opt) {
  IncrementalDecoder dec(p, enc_out, target);
  TokenSequence out;
  out.language = target;
  TokenId tok = start_token(p, target);
  const int budget = generation_budget(p, opt);
  for (int step = 0; step < budget; ++step) {
    Vector logits = dec.step(tok);
    TokenId best = -1;
    Real best_score = 0;
    for (Index v = 0; v < logits.size(); ++v) {
      if (!is_generatable(static_cast<TokenId>(v))) continue;
      if (best < 0 || logits(v) > best_score) {
        best = static_cast<TokenId>(v);
        best_score = logits(v);
      }
    }
    if (best == special::Eos) break;
    out.ids.push_back(best);
    tok = best;
  }
  return out;
}

struct Hypothesis {
  IdSeq ids;          // generated tokens (no start, no EOS)
  Real logprob = 0;
  IncrementalDecoder dec;
  TokenId last;
  bool finished = false;

  Real normalized(double alpha) const {
    // Length includes the terminal EOS so the empty hypothesis is finite.
    double len = static_cast<double>(ids.size()) + 1.0;
    return logprob / std::pow(len, alpha);
  }
};

TokenSequence beam_decode(const Parameters& p, const Matrix& enc_out,
                          Lang target, const DecodeOptions& opt) {
  const int width = std::max(1, opt.beam_width);
  const int budget = generation_budget(p, opt);

  std::vector<Hypothesis> beam;
  beam.push_back(Hypothesis{{},
                            0.0,
                            IncrementalDecoder(p, enc_out, target),
                            start_token(p, target),
                            false});
  std::vector<Hypothesis> finished;

  for (int step = 0; step < budget && !beam.empty(); ++step) {
    std::vector<Hypothesis> candidates;
    for (Hypothesis& h : beam) {
      Vector logits = h.dec.step(h.last);
      Vector lp = log_softmax(logits);
      // Top `width` generatable tokens of this hypothesis.
      std::vector<TokenId> order;
      order.reserve(static_cast<std::size_t>(lp.size()));
      for (Index v = 0; v < lp.size(); ++v)
        if (is_generatable(static_cast<TokenId>(v)))
          order.push_back(static_cast<TokenId>(v));
      std::stable_sort(order.begin(), order.end(),
                       [&lp](TokenId a, TokenId b) {
                         if (lp(a) != lp(b)) return lp(a) > lp(b);
                         return a < b;
                       });
      if (static_cast<int>(order.size()) > width)
        order.resize(static_cast<std::size_t>(width));
      for (TokenId tok : order) {
        Hypothesis next = h;
        next.logprob += lp(tok);
        if (tok == special::Eos) {
          next.finished = true;
          finished.push_back(std::move(next));
        } else {
          next.ids.push_back(tok);
          next.last = tok;
          candidates.push_back(std::move(next));
        }
      }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Hypothesis& a, const Hypothesis& b) {
                       return a.logprob > b.logprob;
                     });
    if (static_cast<int>(candidates.size()) > width)
      candidates.erase(candidates.begin() + width, candidates.end());
    beam = std::move(candidates);
    // Length normalization rewards longer hypotheses, so no admissible
    // early stop; run until every beam finishes or the budget is spent.
  }

  // Unfinished hypotheses count as truncated outputs.
  for (Hypothesis& h : beam) finished.push_back(std::move(h));
  if (finished.empty()) return TokenSequence{{}, target};
  const Hypothesis* best = &finished.front();
  for (const Hypothesis& h : finished)
    if (h.normalized(opt.length_alpha) > best->normalized(opt.length_alpha))
      best = &h;
  TokenSequence out;
  out.language = target;
  out.ids = best->ids;
  return out;
}

}  // namespace

TokenSequence translate_encoded(const Parameters& p, const Matrix& enc_out,
                                Lang target_language,
                                const DecodeOptions& opt) {
  if (opt.strategy == DecodeStrategy::Greedy)
    return greedy_decode(p, enc_out, target_language, opt);
  return beam_decode(p, enc_out, target_language, opt);
}

TokenSequence translate(const Parameters& p, const TokenSequence& src,
                        Lang target_language, const DecodeOptions& opt) {
  IdSeq enc_ids = src.ids;
  enc_ids.push_back(special::Eos);
  if (static_cast<Index>(enc_ids.size()) > p.config.max_len)
    enc_ids.resize(static_cast<std::size_t>(p.config.max_len));
  Matrix enc_out = encode_sequence(p, enc_ids);
  return translate_encoded(p, enc_out, target_language, opt);
}

}  // namespace unmt
