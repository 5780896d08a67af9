#pragma once

#include "unmt/decode.hpp"
#include "unmt/model.hpp"
#include "unmt/rng.hpp"

#include <vector>

namespace unmt {

// One span-masked training example: the encoder sees the sequence with a
// contiguous span replaced by MASK, the decoder reconstructs exactly that
// span. decoder_in is the span shifted right behind the start symbol.
struct MassSample {
  IdSeq encoder_ids;
  IdSeq decoder_in_ids;
  IdSeq decoder_out_ids;
  int span_start = 0;
  int span_len = 0;
};

// Masks one contiguous span of length max(1, round(word_mass * len)) at a
// uniformly random start. Pure given the rng state.
MassSample mass_mask(const IdSeq& seq, double word_mass, Rng& rng);

struct NoiseConfig {
  int shuffle_window = 3;  // max displacement k
  double drop_prob = 0.1;
};

// Word deletion followed by a local shuffle: each token drops with
// probability p (never all of them; one uniformly chosen survivor is kept
// if every draw deletes), then survivors are reordered by sorting index
// i + u_i with u_i uniform in [0, k+1), so nobody moves more than k
// positions.
IdSeq dae_noise(const IdSeq& seq, const NoiseConfig& config, Rng& rng);

struct BtPair {
  TokenSequence synthetic_src;  // model output
  TokenSequence gold_tgt;       // untouched corpus text
};

struct BtBatchResult {
  std::vector<BtPair> pairs;
  int dropped = 0;  // sentences whose synthetic source came out empty
};

// Translates each monolingual sentence into the other language with the
// current model and pairs (synthetic source -> gold target). direction is
// the translation direction the resulting pairs will train.
BtBatchResult make_bt_batch(const Parameters& params,
                            const std::vector<IdSeq>& tgt_mono_batch,
                            Lang tgt_lang, const DecodeOptions& decode_opt);

}  // namespace unmt
