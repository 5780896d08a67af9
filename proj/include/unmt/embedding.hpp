#pragma once

#include "unmt/types.hpp"
#include "unmt/rng.hpp"
#include "unmt/vocab.hpp"

#include <string>
#include <vector>

namespace unmt {

// Token vectors over the joint vocabulary: row i belongs to tokens[i].
// Tokens absent from the training corpus keep their seeded random
// initialization.
struct EmbeddingMatrix {
  Matrix vectors;                   // V x d
  std::vector<std::string> tokens;  // V

  Index rows() const { return vectors.rows(); }
  Index dim() const { return vectors.cols(); }
};

struct SkipGramConfig {
  int dim = 32;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;  // linearly decayed to lr * 1e-4
  std::uint64_t seed = 1;

  void validate() const;
};

// Negative-sampling skip-gram over BPE token ids. Deterministic given the
// seed (single-threaded by design). Sentences carry no special ids.
EmbeddingMatrix train_skipgram(const std::vector<IdSeq>& sentences,
                               const Vocabulary& vocab,
                               const SkipGramConfig& config);

// Token occurrence counts over id sequences, indexed by token id.
std::vector<long> count_tokens(const std::vector<IdSeq>& sentences,
                               Index vocab_size);

// Alignment preprocessing: unit-normalize rows, mean-center columns,
// re-normalize. Throws naming the token on a zero row.
EmbeddingMatrix preprocess_embeddings(const EmbeddingMatrix& e);

// word2vec text format: "V d" header, then "token v1 .. vd" with 6
// decimal places. Tokens containing spaces are rejected at save time.
void save_embeddings(const EmbeddingMatrix& e, const std::string& path);
EmbeddingMatrix load_embeddings(const std::string& path);

struct BilingualDictionary {
  enum class Provenance { Seed, Induced, Gold };
  std::vector<std::pair<std::string, std::string>> pairs;
  Provenance provenance = Provenance::Gold;
};

// MUSE layout: "source<TAB>target" per line, UTF-8.
void save_dictionary(const BilingualDictionary& d, const std::string& path);
BilingualDictionary load_dictionary(const std::string& path);

}  // namespace unmt
