#pragma once

#include "unmt/adam.hpp"
#include "unmt/embedding.hpp"
#include "unmt/types.hpp"

#include <string>
#include <vector>

namespace unmt {

struct IdPair {
  int src = 0;
  int tgt = 0;
  auto operator<=>(const IdPair&) const = default;
};

// Orthogonal map minimizing ||X_d W - Z_d||_F over the dictionary-aligned
// row submatrices: W = U V^T from the SVD of X_d^T Z_d. Source vectors map
// as x * W. Throws on an empty dictionary.
Matrix procrustes(const Matrix& x, const Matrix& z,
                  const std::vector<IdPair>& dict);

// Top-n rows of Z by cosine to the query; ties break by ascending id.
std::vector<int> nn_retrieve(const Vector& query, const Matrix& z, int n);

// CSLS: score(x, z) = 2 cos(x,z) - r_T(x) - r_S(z) with r_T the mean
// cosine of x to its k nearest rows of Z and r_S the mean cosine of z to
// its k nearest rows of X_mapped. Throws if k > rows(Z).
std::vector<int> csls_retrieve(const Vector& x_mapped, const Matrix& z,
                               const Matrix& x_mapped_all, int k, int n);

struct AlignOptions {
  int max_iters = 20;
  int k_csls = 10;
  // Induction considers the top_f most frequent tokens of each side; the
  // candidate id lists passed by the caller are already frequency-ordered.
  int top_f = 4000;
};

struct AlignResult {
  Matrix w;
  std::vector<IdPair> dictionary;  // final (seed + induced), sorted
  int iterations = 0;
};

// Alternates Procrustes on the current dictionary with mutual-CSLS
// induction over the candidate rows until the dictionary stops changing
// or max_iters is reached. Throws "no seed signal" on an empty seed.
AlignResult self_learning_align(const Matrix& x, const Matrix& z,
                                const std::vector<IdPair>& seed,
                                const std::vector<int>& src_candidates,
                                const std::vector<int>& tgt_candidates,
                                const AlignOptions& opt);

enum class RetrievalMode { NN, CSLS };

struct WordTranslationEval {
  Real p_at_1 = 0;
  int evaluated = 0;  // distinct gold source tokens scored
  int skipped = 0;    // gold pairs with unresolvable tokens
};

// P@1 of gold source tokens whose top-1 retrieval is any of their gold
// targets. x rows are mapped through w before retrieval.
WordTranslationEval eval_word_translation(const EmbeddingMatrix& src,
                                          const EmbeddingMatrix& tgt,
                                          const Matrix& w,
                                          const BilingualDictionary& gold,
                                          RetrievalMode mode, int k_csls = 10);

// Identical surface strings present in both token lists (the numeral and
// shared-punctuation seeding signal).
std::vector<IdPair> identical_token_seed(
    const std::vector<std::string>& src_tokens,
    const std::vector<std::string>& tgt_tokens);

// "map-v1 d" header, then d lines of d space-separated reals.
void save_map(const Matrix& w, const std::string& path);
Matrix load_map(const std::string& path);

// Per-token choice for initializing the NMT embedding table: tokens seen
// in the target corpus use the target row, tokens seen only in the source
// corpus use the mapped source row, everything else stays uncovered.
CrossLingualInit assemble_crosslingual_init(const Matrix& src_mapped,
                                            const Matrix& tgt,
                                            const std::vector<long>& src_counts,
                                            const std::vector<long>& tgt_counts,
                                            bool renormalize);

}  // namespace unmt
