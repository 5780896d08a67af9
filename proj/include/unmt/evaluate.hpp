#pragma once

#include "unmt/align.hpp"
#include "unmt/model.hpp"
#include "unmt/transformer.hpp"

#include <string>
#include <vector>

namespace unmt {

// Per-run metric time series; (epoch, name) is unique within a run.
struct MetricLog {
  struct Entry {
    int epoch = 0;
    std::string regime;
    std::string name;
    Real value = 0;
  };
  std::vector<Entry> series;
  std::string run_id;

  void add(int epoch, const std::string& regime, const std::string& name,
           Real value);
  const Entry* find(int epoch, const std::string& name) const;
  std::vector<Real> values(const std::string& name) const;  // epoch order

  // Append-only CSV "epoch,regime,metric,value" (6-decimal floats).
  std::string to_csv() const;
  static MetricLog from_csv(const std::string& text, std::string run_id);
};

// One CSV per metric name under out_dir: "<name>.csv" with header
// "epoch,value", rows sorted by epoch.
std::vector<std::string> emit_curves(const MetricLog& log,
                                     const std::string& out_dir);

struct ParallelEval {
  Real perplexity = 0;  // exp(total cross-entropy / target tokens)
  Real accuracy = 0;    // teacher-forced next-token accuracy
  Real mean_ce = 0;
  long tokens = 0;
};

// Teacher-forced source->target evaluation over parallel pairs (clean
// token ids, no specials). Throws on an empty set.
ParallelEval evaluate_parallel(const Parameters& params,
                               const std::vector<std::pair<IdSeq, IdSeq>>& pairs,
                               Lang src_lang, Lang tgt_lang,
                               int batch_sentences = 32);

struct WordTranslationReport {
  std::string pair_name;
  WordTranslationEval nn_fwd, csls_fwd;  // src -> tgt
  WordTranslationEval nn_bwd, csls_bwd;  // tgt -> src
  int dictionary_size = 0;

  std::string to_text() const;  // fixed-width table
  std::string to_json() const;
};

// Runs both retrieval modes in both directions. The reverse direction
// uses the transpose of the orthogonal map.
WordTranslationReport word_translation_report(const EmbeddingMatrix& src,
                                              const EmbeddingMatrix& tgt,
                                              const Matrix& w,
                                              const BilingualDictionary& gold,
                                              const std::string& pair_name,
                                              int k_csls = 10);

}  // namespace unmt
