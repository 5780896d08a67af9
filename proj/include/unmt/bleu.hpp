#pragma once

#include "unmt/types.hpp"

#include <string>
#include <vector>

namespace unmt {

// Corpus BLEU-4 on whitespace tokens of detokenized text: geometric mean
// of modified (clipped) n-gram precisions for n = 1..4 times the brevity
// penalty exp(min(0, 1 - ref_len/cand_len)). Any order with zero matches
// gives 0. Range [0, 100].
Real corpus_bleu(const std::vector<std::string>& candidates,
                 const std::vector<std::string>& references);

// Single-pair BLEU for sample inspection only, never aggregated. Orders
// 2-4 use add-one smoothing; order 1 is unsmoothed unless it has zero
// matches, in which case add-one applies there too so fully disjoint
// pairs score small but nonzero.
Real sentence_bleu(const std::string& candidate, const std::string& reference);

}  // namespace unmt
