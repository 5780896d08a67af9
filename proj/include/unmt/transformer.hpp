#pragma once

#include "unmt/model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace unmt {

enum class Side { Encoder, Decoder };

// Token embedding + positional encoding (+ decoder language code when the
// config enables it). Throws if the sequence exceeds max_len.
Matrix embed_input(const Parameters& p, const IdSeq& ids, Side side,
                   Lang language);

// BOS when decoder language codes are in use; otherwise the target
// language token doubles as the start symbol.
inline TokenId decoder_start_token(const ModelConfig& config, Lang target) {
  return config.use_decoder_lang_code ? special::Bos
                                      : special::lang_token(target);
}

struct ActivationCache;  // defined in transformer.cpp

// Per-sample logits over the real (unpadded) positions: sample i has a
// tgt_len[i] x V block of the logical B x T x V tensor. Padding positions
// never enter the computation, which is what makes PAD invariance exact.
struct ForwardResult {
  std::vector<Matrix> logits;
  std::shared_ptr<ActivationCache> cache;  // present iff requested

  ForwardResult();
  ~ForwardResult();
  ForwardResult(ForwardResult&&) noexcept;
  ForwardResult& operator=(ForwardResult&&) noexcept;
};

// dropout_rng enables dropout (training); nullopt runs deterministically
// with dropout off.
ForwardResult forward(const Parameters& p, const Batch& batch,
                      bool want_cache = false,
                      std::optional<Rng> dropout_rng = std::nullopt);

struct LossInfo {
  Real mean = 0;     // natural-log cross-entropy per real target token
  Real total = 0;    // summed over real tokens
  long tokens = 0;   // real (non-PAD) target positions
  long correct = 0;  // argmax == target, for teacher-forced accuracy
};

// Mean cross-entropy over non-PAD target positions. Throws if the batch
// has no real target token.
LossInfo cross_entropy(const std::vector<Matrix>& logits, const Batch& batch);

struct BackwardResult {
  LossInfo loss;
  Gradients grads;
};

// Loss and exact gradients for every trainable tensor. The embedding
// gradient is always produced; freezing is the optimizer's concern.
BackwardResult backward(const Parameters& p, const Batch& batch,
                        std::optional<Rng> dropout_rng = std::nullopt);

// Encoder-only forward over one sequence (no padding), for decoding.
Matrix encode_sequence(const Parameters& p, const IdSeq& src_with_eos);

// Incremental decoder with per-layer key/value caches. Deterministic,
// dropout off. Copyable so beam search can branch hypotheses.
class IncrementalDecoder {
 public:
  IncrementalDecoder(const Parameters& p, const Matrix& enc_out,
                     Lang tgt_lang);

  // Feeds one token and returns the logits row for the next position.
  Vector step(TokenId token);

  Index position() const { return pos_; }

 private:
  const Parameters* p_;
  Lang tgt_lang_;
  Index pos_ = 0;
  struct LayerState {
    Matrix self_k, self_v;    // grows one row per step
    Matrix cross_k, cross_v;  // fixed, from encoder output
  };
  std::vector<LayerState> layers_;
};

}  // namespace unmt
