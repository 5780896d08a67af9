#pragma once

#include "unmt/model.hpp"
#include "unmt/rng.hpp"
#include "unmt/transformer.hpp"

#include <string>
#include <vector>

namespace unmt::testutil {

// Random well-formed batch for a model: src rows end with EOS, tgt_in
// starts with BOS, tgt_out is the shift with terminal EOS.
inline Batch random_batch(Index vocab, int b, int min_len, int max_len,
                          Rng& rng, Lang src_lang = Lang::Src,
                          Lang tgt_lang = Lang::Tgt) {
  std::vector<IdSeq> src, tin, tout;
  for (int i = 0; i < b; ++i) {
    auto draw_len = [&] {
      return min_len + static_cast<int>(
                           rng.uniform_int(static_cast<std::uint64_t>(
                               max_len - min_len + 1)));
    };
    IdSeq s, t;
    int sl = draw_len(), tl = draw_len();
    for (int k = 0; k < sl; ++k)
      s.push_back(special::Count +
                  static_cast<TokenId>(rng.uniform_int(
                      static_cast<std::uint64_t>(vocab - special::Count))));
    for (int k = 0; k < tl; ++k)
      t.push_back(special::Count +
                  static_cast<TokenId>(rng.uniform_int(
                      static_cast<std::uint64_t>(vocab - special::Count))));
    s.push_back(special::Eos);
    IdSeq ti, to;
    ti.push_back(special::Bos);
    ti.insert(ti.end(), t.begin(), t.end());
    to = t;
    to.push_back(special::Eos);
    src.push_back(std::move(s));
    tin.push_back(std::move(ti));
    tout.push_back(std::move(to));
  }
  return make_batch(src, tin, tout, src_lang, tgt_lang);
}

inline Real rel_err(Real a, Real b, Real floor = 1e-6) {
  Real denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Central finite-difference gradient of the batch loss w.r.t. one
// coordinate of one tensor. Mutates and restores the parameter.
inline Real fd_gradient(Parameters& p, const Batch& batch, Matrix& tensor,
                        Index i, Index j, Real h = 1e-5) {
  const Real saved = tensor(i, j);
  tensor(i, j) = saved + h;
  Real up = cross_entropy(forward(p, batch).logits, batch).mean;
  tensor(i, j) = saved - h;
  Real dn = cross_entropy(forward(p, batch).logits, batch).mean;
  tensor(i, j) = saved;
  return (up - dn) / (2 * h);
}

}  // namespace unmt::testutil
