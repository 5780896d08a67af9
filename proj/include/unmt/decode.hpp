#pragma once

#include "unmt/transformer.hpp"

#include <string>

namespace unmt {

enum class DecodeStrategy { Greedy, Beam };

struct DecodeOptions {
  DecodeStrategy strategy = DecodeStrategy::Greedy;
  int beam_width = 4;
  double length_alpha = 1.0;  // beam score = logprob / length^alpha
  int max_len = 0;            // 0 uses the model max_len
};

// Translates one sequence. src carries clean token ids (no specials); the
// terminal EOS and the decoder start symbol are handled internally. The
// start symbol is BOS when the model uses decoder language codes and the
// target's language token otherwise. Output never contains special ids.
TokenSequence translate(const Parameters& p, const TokenSequence& src,
                        Lang target_language, const DecodeOptions& opt = {});

// Reuses a precomputed encoder output (batch back-translation shares it).
TokenSequence translate_encoded(const Parameters& p, const Matrix& enc_out,
                                Lang target_language,
                                const DecodeOptions& opt = {});

}  // namespace unmt
