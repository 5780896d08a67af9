#include "unmt/evaluate.hpp"

#include "unmt/corpus_io.hpp"
#include "unmt/objectives.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <stdexcept>

namespace unmt {

namespace {

std::string format_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

void MetricLog::add(int epoch, const std::string& regime,
                    const std::string& name, Real value) {
  if (!std::isfinite(value))
    throw std::runtime_error("MetricLog: non-finite value for " + name);
  if (find(epoch, name))
    throw std::runtime_error("MetricLog: duplicate entry " + name +
                             " at epoch " + std::to_string(epoch));
  series.push_back({epoch, regime, name, value});
}

const MetricLog::Entry* MetricLog::find(int epoch,
                                        const std::string& name) const {
  for (const Entry& e : series)
    if (e.epoch == epoch && e.name == name) return &e;
  return nullptr;
}

std::vector<Real> MetricLog::values(const std::string& name) const {
  std::vector<std::pair<int, Real>> rows;
  for (const Entry& e : series)
    if (e.name == name) rows.emplace_back(e.epoch, e.value);
  std::sort(rows.begin(), rows.end());
  std::vector<Real> out;
  out.reserve(rows.size());
  for (auto& [ep, v] : rows) out.push_back(v);
  return out;
}

std::string MetricLog::to_csv() const {
  std::string out = "epoch,regime,metric,value\n";
  for (const Entry& e : series) {
    out += std::to_string(e.epoch);
    out += ',';
    out += e.regime;
    out += ',';
    out += e.name;
    out += ',';
    out += format_real(e.value);
    out += '\n';
  }
  return out;
}

MetricLog MetricLog::from_csv(const std::string& text, std::string run_id) {
  MetricLog log;
  log.run_id = std::move(run_id);
  std::istringstream ss(text);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string epoch_s, regime, name, value_s;
    if (!std::getline(ls, epoch_s, ',') || !std::getline(ls, regime, ',') ||
        !std::getline(ls, name, ',') || !std::getline(ls, value_s))
      throw std::runtime_error("MetricLog: malformed CSV row: " + line);
    log.series.push_back(
        {std::stoi(epoch_s), regime, name, std::stod(value_s)});
  }
  return log;
}

std::vector<std::string> emit_curves(const MetricLog& log,
                                     const std::string& out_dir) {
  if (log.series.empty())
    throw std::runtime_error("emit_curves: empty metric log");
  std::filesystem::create_directories(out_dir);

  std::map<std::string, std::vector<std::pair<int, Real>>> by_name;
  for (const auto& e : log.series) by_name[e.name].emplace_back(e.epoch, e.value);

  std::vector<std::string> files;
  for (auto& [name, rows] : by_name) {
    std::sort(rows.begin(), rows.end());
    std::string content = "epoch,value\n";
    for (const auto& [epoch, value] : rows) {
      content += std::to_string(epoch);
      content += ',';
      content += format_real(value);
      content += '\n';
    }
    std::string path = out_dir + "/" + name + ".csv";
    write_file_atomic(path, content);
    files.push_back(path);
  }
  return files;
}

ParallelEval evaluate_parallel(const Parameters& params,
                               const std::vector<std::pair<IdSeq, IdSeq>>& pairs,
                               Lang src_lang, Lang tgt_lang,
                               int batch_sentences) {
  if (pairs.empty())
    throw std::runtime_error("evaluate_parallel: empty validation set");
  ParallelEval res;
  Real total_ce = 0;
  long tokens = 0, correct = 0;
  const int cap = params.config.max_len - 1;

  for (std::size_t begin = 0; begin < pairs.size();
       begin += static_cast<std::size_t>(batch_sentences)) {
    std::size_t end = std::min(pairs.size(),
                               begin + static_cast<std::size_t>(batch_sentences));
    std::vector<IdSeq> src, tin, tout;
    for (std::size_t i = begin; i < end; ++i) {
      IdSeq s = pairs[i].first;
      IdSeq t = pairs[i].second;
      if (static_cast<int>(s.size()) > cap)
        s.resize(static_cast<std::size_t>(cap));
      if (static_cast<int>(t.size()) > cap)
        t.resize(static_cast<std::size_t>(cap));
      s.push_back(special::Eos);
      IdSeq ti, to;
      ti.push_back(decoder_start_token(params.config, tgt_lang));
      ti.insert(ti.end(), t.begin(), t.end());
      to = t;
      to.push_back(special::Eos);
      src.push_back(std::move(s));
      tin.push_back(std::move(ti));
      tout.push_back(std::move(to));
    }
    Batch batch = make_batch(src, tin, tout, src_lang, tgt_lang);
    auto fwd = forward(params, batch);
    LossInfo info = cross_entropy(fwd.logits, batch);
    total_ce += info.total;
    tokens += info.tokens;
    correct += info.correct;
  }
  res.mean_ce = total_ce / static_cast<Real>(tokens);
  res.perplexity = std::exp(res.mean_ce);
  res.accuracy = static_cast<Real>(correct) / static_cast<Real>(tokens);
  res.tokens = tokens;
  return res;
}

std::string WordTranslationReport::to_text() const {
  char buf[256];
  std::string out;
  out += "word translation accuracy (P@1)\n";
  std::snprintf(buf, sizeof(buf), "%-12s %10s %10s %10s %10s %8s\n",
                "pair", "nn>", "csls>", "nn<", "csls<", "dict");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-12s %9.2f%% %9.2f%% %9.2f%% %9.2f%% %8d\n",
                pair_name.c_str(), 100.0 * nn_fwd.p_at_1,
                100.0 * csls_fwd.p_at_1, 100.0 * nn_bwd.p_at_1,
                100.0 * csls_bwd.p_at_1, dictionary_size);
  out += buf;
  if (nn_fwd.skipped || nn_bwd.skipped) {
    std::snprintf(buf, sizeof(buf), "skipped pairs: %d (fwd), %d (bwd)\n",
                  nn_fwd.skipped, nn_bwd.skipped);
    out += buf;
  }
  return out;
}

std::string WordTranslationReport::to_json() const {
  nlohmann::json j;
  j["pair"] = pair_name;
  j["dictionary_size"] = dictionary_size;
  auto fill = [](const WordTranslationEval& e) {
    return nlohmann::json{{"p_at_1", e.p_at_1},
                          {"evaluated", e.evaluated},
                          {"skipped", e.skipped}};
  };
  j["forward"] = {{"nn", fill(nn_fwd)}, {"csls", fill(csls_fwd)}};
  j["backward"] = {{"nn", fill(nn_bwd)}, {"csls", fill(csls_bwd)}};
  return j.dump(2);
}

WordTranslationReport word_translation_report(const EmbeddingMatrix& src,
                                              const EmbeddingMatrix& tgt,
                                              const Matrix& w,
                                              const BilingualDictionary& gold,
                                              const std::string& pair_name,
                                              int k_csls) {
  WordTranslationReport rep;
  rep.pair_name = pair_name;
  rep.dictionary_size = static_cast<int>(gold.pairs.size());
  rep.nn_fwd = eval_word_translation(src, tgt, w, gold, RetrievalMode::NN,
                                     k_csls);
  rep.csls_fwd = eval_word_translation(src, tgt, w, gold, RetrievalMode::CSLS,
                                       k_csls);
  BilingualDictionary reversed;
  reversed.provenance = gold.provenance;
  for (const auto& [s, t] : gold.pairs) reversed.pairs.emplace_back(t, s);
  Matrix w_inv = w.transpose();  // orthogonal
  rep.nn_bwd = eval_word_translation(tgt, src, w_inv, reversed,
                                     RetrievalMode::NN, k_csls);
  rep.csls_bwd = eval_word_translation(tgt, src, w_inv, reversed,
                                       RetrievalMode::CSLS, k_csls);
  return rep;
}

}  // namespace unmt
