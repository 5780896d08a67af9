#include "unmt/embedding.hpp"

#include "unmt/nn_ops.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace unmt {

void SkipGramConfig::validate() const {
  if (window < 1) throw std::runtime_error("SkipGramConfig: window < 1");
  if (negatives < 1) throw std::runtime_error("SkipGramConfig: negatives < 1");
  if (learning_rate <= 0)
    throw std::runtime_error("SkipGramConfig: learning_rate <= 0");
  if (dim < 1) throw std::runtime_error("SkipGramConfig: dim < 1");
  if (epochs < 0) throw std::runtime_error("SkipGramConfig: epochs < 0");
}

std::vector<long> count_tokens(const std::vector<IdSeq>& sentences,
                               Index vocab_size) {
  std::vector<long> counts(static_cast<std::size_t>(vocab_size), 0);
  for (const IdSeq& s : sentences)
    for (TokenId id : s) counts.at(static_cast<std::size_t>(id))++;
  return counts;
}

EmbeddingMatrix preprocess_embeddings(const EmbeddingMatrix& e) {
  EmbeddingMatrix out = e;
  auto fail = [&out](Index row) {
    throw std::runtime_error("preprocess_embeddings: zero vector for token '" +
                             out.tokens[static_cast<std::size_t>(row)] + "'");
  };
  normalize_rows_inplace(out.vectors, fail);
  Eigen::RowVectorXd mean = out.vectors.colwise().mean();
  out.vectors.rowwise() -= mean;
  normalize_rows_inplace(out.vectors, fail);
  return out;
}

void save_embeddings(const EmbeddingMatrix& e, const std::string& path) {
  if (static_cast<Index>(e.tokens.size()) != e.rows())
    throw std::runtime_error("save_embeddings: token/row count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_embeddings: cannot write " + path);
  out << e.rows() << ' ' << e.dim() << "\n";
  char buf[64];
  for (Index i = 0; i < e.rows(); ++i) {
    const std::string& tok = e.tokens[static_cast<std::size_t>(i)];
    if (tok.find(' ') != std::string::npos || tok.empty())
      throw std::runtime_error(
          "save_embeddings: token not representable in word2vec text "
          "format: '" + tok + "'");
    out << tok;
    for (Index j = 0; j < e.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), " %.6f", e.vectors(i, j));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_embeddings: write failed " + path);
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_embeddings: cannot open " + path);
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("load_embeddings: empty file " + path);
  std::istringstream hs(header);
  Index v = 0, d = 0;
  if (!(hs >> v >> d) || v < 1 || d < 1)
    throw std::runtime_error("load_embeddings: bad header in " + path);

  EmbeddingMatrix e;
  e.vectors.resize(v, d);
  e.tokens.resize(static_cast<std::size_t>(v));
  std::string line;
  Index row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (row >= v)
      throw std::runtime_error("load_embeddings: more rows than header in " +
                               path);
    std::istringstream ls(line);
    ls >> e.tokens[static_cast<std::size_t>(row)];
    for (Index j = 0; j < d; ++j) {
      if (!(ls >> e.vectors(row, j)))
        throw std::runtime_error("load_embeddings: short row " +
                                 std::to_string(row) + " in " + path);
    }
    ++row;
  }
  if (row != v)
    throw std::runtime_error("load_embeddings: row count mismatch in " + path);
  return e;
}

void save_dictionary(const BilingualDictionary& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dictionary: cannot write " + path);
  for (const auto& [s, t] : d.pairs) out << s << '\t' << t << "\n";
  if (!out) throw std::runtime_error("save_dictionary: write failed " + path);
}

BilingualDictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dictionary: cannot open " + path);
  BilingualDictionary d;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("load_dictionary: malformed line in " + path);
    d.pairs.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return d;
}

}  // namespace unmt
