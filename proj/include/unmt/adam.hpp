#pragma once

#include "unmt/model.hpp"

#include <optional>

namespace unmt {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // 0 disables clipping
};

// First/second moment accumulators mirror the parameter tree.
struct OptimizerState {
  Gradients m;
  Gradients v;
  long step = 0;

  static OptimizerState init(const Parameters& params) {
    return OptimizerState{params.zeros_like(), params.zeros_like(), 0};
  }
};

// Global-norm gradient clipping over all trainable tensors; returns the
// pre-clip norm.
Real clip_gradients(Gradients& grads, double max_norm);

// Bias-corrected Adam update. In Static embedding mode the embedding
// tensor (and the untied output embedding, if present) is skipped
// entirely so its bytes never change.
void adam_step(Parameters& params, const Gradients& grads,
               OptimizerState& state, const AdamConfig& config,
               EmbeddingMode mode);

// Coverage-annotated cross-lingual initialization table for the joint
// vocabulary: row i holds the vector for token i, covered[i] says whether
// it came from trained embeddings (or is a Gaussian fallback).
struct CrossLingualInit {
  Matrix vectors;             // V x d
  std::vector<bool> covered;  // V
};

// Random: seeded Gaussian with sigma = dim^-1/2 (same as Parameters::init).
// NonStatic/Static: rows copied from the cross-lingual table; uncovered
// tokens keep Gaussian init. Returns the number of uncovered tokens.
// Throws if the table dimension differs from the model dimension.
int apply_embedding_mode(Parameters& params, EmbeddingMode mode,
                         const CrossLingualInit* crosslingual, Rng rng);

}  // namespace unmt
