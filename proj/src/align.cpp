#include "unmt/align.hpp"

#include "unmt/nn_ops.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace unmt {

namespace {

Matrix normalized_rows(const Matrix& m) {
  Matrix out = m;
  for (Index i = 0; i < out.rows(); ++i) {
    Real n = out.row(i).norm();
    if (n > 0) out.row(i) /= n;
  }
  return out;
}

Vector normalized(const Vector& v) {
  Real n = v.norm();
  return n > 0 ? Vector(v / n) : v;
}

// Mean of the top-k entries of each row.
Vector topk_row_means(const Matrix& sims, int k) {
  Vector out(sims.rows());
  std::vector<Real> row(static_cast<std::size_t>(sims.cols()));
  for (Index i = 0; i < sims.rows(); ++i) {
    for (Index j = 0; j < sims.cols(); ++j)
      row[static_cast<std::size_t>(j)] = sims(i, j);
    std::nth_element(row.begin(), row.begin() + (k - 1), row.end(),
                     std::greater<>());
    Real sum = 0;
    for (int j = 0; j < k; ++j) sum += row[static_cast<std::size_t>(j)];
    out(i) = sum / static_cast<Real>(k);
  }
  return out;
}

std::vector<int> top_n_ids(const Vector& scores, int n) {
  std::vector<int> ids(static_cast<std::size_t>(scores.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
  std::stable_sort(ids.begin(), ids.end(), [&scores](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;
  });
  if (static_cast<int>(ids.size()) > n)
    ids.resize(static_cast<std::size_t>(n));
  return ids;
}

}  // namespace

Matrix procrustes(const Matrix& x, const Matrix& z,
                  const std::vector<IdPair>& dict) {
  if (dict.empty()) throw std::runtime_error("procrustes: empty dictionary");
  if (x.cols() != z.cols())
    throw std::runtime_error("procrustes: dimension mismatch");
  const Index d = x.cols();
  const Index n = static_cast<Index>(dict.size());
  Matrix xd(n, d), zd(n, d);
  for (Index i = 0; i < n; ++i) {
    const IdPair& p = dict[static_cast<std::size_t>(i)];
    xd.row(i) = x.row(p.src);
    zd.row(i) = z.row(p.tgt);
  }
  Matrix m = xd.transpose() * zd;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

std::vector<int> nn_retrieve(const Vector& query, const Matrix& z, int n) {
  if (n < 1) throw std::runtime_error("nn_retrieve: n < 1");
  Vector scores = normalized_rows(z) * normalized(query);
  return top_n_ids(scores, n);
}

std::vector<int> csls_retrieve(const Vector& x_mapped, const Matrix& z,
                               const Matrix& x_mapped_all, int k, int n) {
  if (k < 1) throw std::runtime_error("csls_retrieve: k < 1");
  if (k > z.rows())
    throw std::runtime_error("csls_retrieve: k exceeds target rows");
  if (n < 1) throw std::runtime_error("csls_retrieve: n < 1");

  Matrix zn = normalized_rows(z);
  Matrix xn = normalized_rows(x_mapped_all);
  Vector q = normalized(x_mapped);

  Vector cos_q = zn * q;  // cos(x, z) for all z
  // r_T(x): mean cosine of the query to its k nearest targets.
  {
    std::vector<Real> row(static_cast<std::size_t>(cos_q.size()));
    for (Index j = 0; j < cos_q.size(); ++j)
      row[static_cast<std::size_t>(j)] = cos_q(j);
    std::nth_element(row.begin(), row.begin() + (k - 1), row.end(),
                     std::greater<>());
    Real rt = 0;
    for (int j = 0; j < k; ++j) rt += row[static_cast<std::size_t>(j)];
    rt /= static_cast<Real>(k);
    cos_q.array() -= 0.5 * rt;  // folded into scores below
  }
  // r_S(z): mean cosine of each target to its k nearest mapped sources.
  int ks = std::min<int>(k, static_cast<int>(xn.rows()));
  Matrix sims_zx = zn * xn.transpose();  // |Z| x |X|
  Vector rs = topk_row_means(sims_zx, ks);

  Vector scores = 2.0 * cos_q - rs;
  return top_n_ids(scores, n);
}

namespace {

// Forward CSLS best-match for every query row (batch form). queries and
// targets must be row-normalized.
std::vector<int> csls_best_rows(const Matrix& queries, const Matrix& targets,
                                int k) {
  Matrix sims = queries * targets.transpose();  // Q x T cosines
  int kq = std::min<int>(k, static_cast<int>(targets.rows()));
  int kt = std::min<int>(k, static_cast<int>(queries.rows()));
  Vector rt = topk_row_means(sims, kq);                // per query
  Vector rs = topk_row_means(Matrix(sims.transpose()), kt);  // per target

  std::vector<int> best(static_cast<std::size_t>(queries.rows()));
  for (Index i = 0; i < sims.rows(); ++i) {
    int arg = 0;
    Real best_score = -1e300;
    for (Index j = 0; j < sims.cols(); ++j) {
      Real s = 2.0 * sims(i, j) - rt(i) - rs(j);
      if (s > best_score) {
        best_score = s;
        arg = static_cast<int>(j);
      }
    }
    best[static_cast<std::size_t>(i)] = arg;
  }
  return best;
}

}  // namespace

AlignResult self_learning_align(const Matrix& x, const Matrix& z,
                                const std::vector<IdPair>& seed,
                                const std::vector<int>& src_candidates,
                                const std::vector<int>& tgt_candidates,
                                const AlignOptions& opt) {
  if (seed.empty()) throw std::runtime_error("no seed signal");

  std::vector<int> src_cands = src_candidates;
  std::vector<int> tgt_cands = tgt_candidates;
  if (static_cast<int>(src_cands.size()) > opt.top_f)
    src_cands.resize(static_cast<std::size_t>(opt.top_f));
  if (static_cast<int>(tgt_cands.size()) > opt.top_f)
    tgt_cands.resize(static_cast<std::size_t>(opt.top_f));

  std::vector<IdPair> dict = seed;
  std::sort(dict.begin(), dict.end());
  dict.erase(std::unique(dict.begin(), dict.end()), dict.end());

  AlignResult res;
  res.w = procrustes(x, z, dict);
  res.dictionary = dict;

  if (opt.max_iters <= 0 || src_cands.empty() || tgt_cands.empty()) return res;

  Matrix zc(static_cast<Index>(tgt_cands.size()), z.cols());
  for (std::size_t i = 0; i < tgt_cands.size(); ++i)
    zc.row(static_cast<Index>(i)) = z.row(tgt_cands[i]);
  Matrix zc_n = normalized_rows(zc);

  for (int iter = 1; iter <= opt.max_iters; ++iter) {
    res.iterations = iter;
    // Map the source candidates with the current rotation.
    Matrix xc(static_cast<Index>(src_cands.size()), x.cols());
    for (std::size_t i = 0; i < src_cands.size(); ++i)
      xc.row(static_cast<Index>(i)) = x.row(src_cands[i]) * res.w;
    Matrix xc_n = normalized_rows(xc);

    std::vector<int> fwd = csls_best_rows(xc_n, zc_n, opt.k_csls);
    std::vector<int> bwd = csls_best_rows(zc_n, xc_n, opt.k_csls);

    std::vector<IdPair> next = seed;
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      int j = fwd[i];
      if (bwd[static_cast<std::size_t>(j)] == static_cast<int>(i))
        next.push_back({src_cands[i], tgt_cands[static_cast<std::size_t>(j)]});
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());

    if (next == res.dictionary) break;
    res.dictionary = std::move(next);
    res.w = procrustes(x, z, res.dictionary);
  }
  return res;
}

WordTranslationEval eval_word_translation(const EmbeddingMatrix& src,
                                          const EmbeddingMatrix& tgt,
                                          const Matrix& w,
                                          const BilingualDictionary& gold,
                                          RetrievalMode mode, int k_csls) {
  if (gold.pairs.empty())
    throw std::runtime_error("eval_word_translation: empty gold dictionary");

  std::unordered_map<std::string, int> src_index, tgt_index;
  for (std::size_t i = 0; i < src.tokens.size(); ++i)
    src_index.emplace(src.tokens[i], static_cast<int>(i));
  for (std::size_t i = 0; i < tgt.tokens.size(); ++i)
    tgt_index.emplace(tgt.tokens[i], static_cast<int>(i));

  WordTranslationEval res;
  std::unordered_map<int, std::vector<int>> gold_by_src;
  for (const auto& [s, t] : gold.pairs) {
    auto si = src_index.find(s);
    auto ti = tgt_index.find(t);
    if (si == src_index.end() || ti == tgt_index.end()) {
      res.skipped++;
      continue;
    }
    gold_by_src[si->second].push_back(ti->second);
  }
  if (gold_by_src.empty()) return res;

  Matrix x_mapped = src.vectors * w;
  Matrix zn = normalized_rows(tgt.vectors);
  Matrix xn = normalized_rows(x_mapped);

  // Precompute the CSLS target penalties once.
  Vector rs;
  if (mode == RetrievalMode::CSLS) {
    if (k_csls > tgt.vectors.rows())
      throw std::runtime_error("eval_word_translation: k exceeds target rows");
    int ks = std::min<int>(k_csls, static_cast<int>(xn.rows()));
    Matrix sims_zx = zn * xn.transpose();
    rs = topk_row_means(sims_zx, ks);
  }

  int hits = 0;
  for (const auto& [sid, targets] : gold_by_src) {
    Vector cos_q = zn * xn.row(sid).transpose();
    int best = 0;
    if (mode == RetrievalMode::NN) {
      Real best_score = -1e300;
      for (Index j = 0; j < cos_q.size(); ++j)
        if (cos_q(j) > best_score) {
          best_score = cos_q(j);
          best = static_cast<int>(j);
        }
    } else {
      Vector scores = 2.0 * cos_q - rs;  // r_T is constant per query
      Real best_score = -1e300;
      for (Index j = 0; j < scores.size(); ++j)
        if (scores(j) > best_score) {
          best_score = scores(j);
          best = static_cast<int>(j);
        }
    }
    res.evaluated++;
    if (std::find(targets.begin(), targets.end(), best) != targets.end())
      hits++;
  }
  res.p_at_1 = static_cast<Real>(hits) / static_cast<Real>(res.evaluated);
  return res;
}

std::vector<IdPair> identical_token_seed(
    const std::vector<std::string>& src_tokens,
    const std::vector<std::string>& tgt_tokens) {
  std::unordered_map<std::string, int> tgt_index;
  for (std::size_t i = 0; i < tgt_tokens.size(); ++i)
    tgt_index.emplace(tgt_tokens[i], static_cast<int>(i));
  std::vector<IdPair> seed;
  for (std::size_t i = 0; i < src_tokens.size(); ++i) {
    auto it = tgt_index.find(src_tokens[i]);
    if (it != tgt_index.end())
      seed.push_back({static_cast<int>(i), it->second});
  }
  return seed;
}

void save_map(const Matrix& w, const std::string& path) {
  if (w.rows() != w.cols()) throw std::runtime_error("save_map: not square");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_map: cannot write " + path);
  out << "map-v1 " << w.rows() << "\n";
  char buf[64];
  for (Index i = 0; i < w.rows(); ++i) {
    for (Index j = 0; j < w.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), j ? " %.17g" : "%.17g", w(i, j));
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_map: write failed " + path);
}

Matrix load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_map: cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string tag;
  Index d = 0;
  if (!(hs >> tag >> d) || tag != "map-v1" || d < 1)
    throw std::runtime_error("load_map: bad header in " + path);
  Matrix w(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (!(in >> w(i, j)))
        throw std::runtime_error("load_map: truncated matrix in " + path);
  return w;
}

CrossLingualInit assemble_crosslingual_init(const Matrix& src_mapped,
                                            const Matrix& tgt,
                                            const std::vector<long>& src_counts,
                                            const std::vector<long>& tgt_counts,
                                            bool renormalize) {
  if (src_mapped.rows() != tgt.rows() || src_mapped.cols() != tgt.cols())
    throw std::runtime_error("assemble_crosslingual_init: shape mismatch");
  const Index v = tgt.rows();
  if (static_cast<Index>(src_counts.size()) != v ||
      static_cast<Index>(tgt_counts.size()) != v)
    throw std::runtime_error("assemble_crosslingual_init: count size mismatch");

  CrossLingualInit init;
  init.vectors = Matrix::Zero(v, tgt.cols());
  init.covered.assign(static_cast<std::size_t>(v), false);
  for (Index i = 0; i < v; ++i) {
    std::size_t si = static_cast<std::size_t>(i);
    if (tgt_counts[si] > 0) {
      init.vectors.row(i) = tgt.row(i);
      init.covered[si] = true;
    } else if (src_counts[si] > 0) {
      init.vectors.row(i) = src_mapped.row(i);
      init.covered[si] = true;
    }
  }
  if (renormalize) {
    for (Index i = 0; i < v; ++i) {
      if (!init.covered[static_cast<std::size_t>(i)]) continue;
      Real n = init.vectors.row(i).norm();
      if (n > 0) init.vectors.row(i) /= n;
    }
  }
  return init;
}

}  // namespace unmt
