#include "unmt/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace unmt {

namespace {

double sigmoid(double z) {
  if (z > 30) return 1.0;
  if (z < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-z));
}

// Cumulative unigram^0.75 distribution for negative sampling.
struct NegativeSampler {
  std::vector<double> cdf;
  std::vector<TokenId> ids;

  NegativeSampler(const std::vector<long>& counts) {
    double total = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= 0) continue;
      ids.push_back(static_cast<TokenId>(i));
      total += std::pow(static_cast<double>(counts[i]), 0.75);
      cdf.push_back(total);
    }
    for (double& c : cdf) c /= total;
  }

  TokenId sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= ids.size()) idx = ids.size() - 1;
    return ids[idx];
  }
};

}  // namespace

EmbeddingMatrix train_skipgram(const std::vector<IdSeq>& sentences,
                               const Vocabulary& vocab,
                               const SkipGramConfig& config) {
  config.validate();
  if (sentences.empty())
    throw std::runtime_error("train_skipgram: empty corpus");

  const Index v = vocab.size();
  const Index d = config.dim;
  Rng rng(config.seed);

  // word2vec-style init: input vectors uniform in [-0.5/d, 0.5/d],
  // context vectors zero. Untrained tokens keep this initialization.
  Matrix syn0(v, d), syn1(v, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < v; ++i)
      syn0(i, j) = (rng.uniform() - 0.5) / static_cast<double>(d);
  syn1.setZero();

  std::vector<long> counts = count_tokens(sentences, v);
  long corpus_tokens = 0;
  for (long c : counts) corpus_tokens += c;
  if (corpus_tokens == 0)
    throw std::runtime_error("train_skipgram: corpus has no tokens");
  NegativeSampler sampler(counts);

  const double lr0 = config.learning_rate;
  const double lr_floor = lr0 * 1e-4;
  const double planned =
      static_cast<double>(config.epochs) * static_cast<double>(corpus_tokens);
  long processed = 0;

  Vector accum(d);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const IdSeq& sent : sentences) {
      const int n = static_cast<int>(sent.size());
      for (int t = 0; t < n; ++t, ++processed) {
        double lr = lr0;
        if (planned > 0)
          lr = std::max(lr_floor,
                        lr0 * (1.0 - static_cast<double>(processed) / planned));
        // Dynamic window, as in the reference skip-gram implementation.
        int span = 1 + static_cast<int>(rng.uniform_int(
                           static_cast<std::uint64_t>(config.window)));
        TokenId center = sent[static_cast<std::size_t>(t)];
        for (int c = t - span; c <= t + span; ++c) {
          if (c == t || c < 0 || c >= n) continue;
          TokenId context = sent[static_cast<std::size_t>(c)];
          accum.setZero();
          // Positive pair plus sampled negatives on the context matrix.
          for (int neg = 0; neg <= config.negatives; ++neg) {
            TokenId target;
            double label;
            if (neg == 0) {
              target = context;
              label = 1.0;
            } else {
              target = sampler.sample(rng);
              if (target == context) continue;
              label = 0.0;
            }
            double z = syn0.row(center).dot(syn1.row(target));
            double grad = (sigmoid(z) - label) * lr;
            accum += grad * syn1.row(target).transpose();
            syn1.row(target) -= grad * syn0.row(center);
          }
          syn0.row(center) -= accum.transpose();
        }
      }
    }
  }

  EmbeddingMatrix e;
  e.vectors = std::move(syn0);
  e.tokens.reserve(static_cast<std::size_t>(v));
  for (TokenId i = 0; i < v; ++i) e.tokens.push_back(vocab.token(i));
  return e;
}

}  // namespace unmt
