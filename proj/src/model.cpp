#include "unmt/model.hpp"

#include "unmt/nn_ops.hpp"

#include <cmath>

namespace unmt {

const char* to_string(EmbeddingMode m) {
  switch (m) {
    case EmbeddingMode::Random: return "random";
    case EmbeddingMode::NonStatic: return "non_static";
    case EmbeddingMode::Static: return "static";
  }
  return "?";
}

EmbeddingMode embedding_mode_from_string(const std::string& s) {
  if (s == "random") return EmbeddingMode::Random;
  if (s == "non_static") return EmbeddingMode::NonStatic;
  if (s == "static") return EmbeddingMode::Static;
  throw std::runtime_error("unknown embedding mode: " + s);
}

namespace {

Matrix glorot(Index rows, Index cols, Rng& rng) {
  double std = std::sqrt(2.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.gaussian(0.0, std);
  return m;
}

LayerNormParams init_ln(Index d) {
  return {Matrix::Ones(d, 1), Matrix::Zero(d, 1)};
}

AttentionParams init_attn(Index d, Rng& rng) {
  AttentionParams a;
  a.wq = glorot(d, d, rng);
  a.wk = glorot(d, d, rng);
  a.wv = glorot(d, d, rng);
  a.wo = glorot(d, d, rng);
  a.bq = Matrix::Zero(d, 1);
  a.bk = Matrix::Zero(d, 1);
  a.bv = Matrix::Zero(d, 1);
  a.bo = Matrix::Zero(d, 1);
  return a;
}

FfnParams init_ffn(Index d, Index f, Rng& rng) {
  FfnParams x;
  x.w1 = glorot(d, f, rng);
  x.b1 = Matrix::Zero(f, 1);
  x.w2 = glorot(f, d, rng);
  x.b2 = Matrix::Zero(d, 1);
  return x;
}

}  // namespace

Parameters Parameters::init(const ModelConfig& config, Index vocab_size,
                            Rng rng) {
  config.validate();
  Parameters p;
  p.config = config;
  p.vocab_size = vocab_size;
  const Index d = config.dim;

  double emb_std = 1.0 / std::sqrt(static_cast<double>(d));
  p.embedding.resize(vocab_size, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < vocab_size; ++i)
      p.embedding(i, j) = rng.gaussian(0.0, emb_std);
  if (!config.tie_embeddings) {
    p.out_embedding.resize(vocab_size, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < vocab_size; ++i)
        p.out_embedding(i, j) = rng.gaussian(0.0, emb_std);
  }
  p.lang_code_src.resize(d, 1);
  p.lang_code_tgt.resize(d, 1);
  for (Index i = 0; i < d; ++i) {
    p.lang_code_src(i, 0) = rng.gaussian(0.0, emb_std);
    p.lang_code_tgt(i, 0) = rng.gaussian(0.0, emb_std);
  }

  for (int l = 0; l < config.layers; ++l) {
    EncoderLayerParams e;
    e.ln1 = init_ln(d);
    e.attn = init_attn(d, rng);
    e.ln2 = init_ln(d);
    e.ffn = init_ffn(d, config.ffn_dim, rng);
    p.encoder.push_back(std::move(e));

    DecoderLayerParams dec;
    dec.ln1 = init_ln(d);
    dec.self_attn = init_attn(d, rng);
    dec.ln2 = init_ln(d);
    dec.cross_attn = init_attn(d, rng);
    dec.ln3 = init_ln(d);
    dec.ffn = init_ffn(d, config.ffn_dim, rng);
    p.decoder.push_back(std::move(dec));
  }
  p.encoder_norm = init_ln(d);
  p.decoder_norm = init_ln(d);

  p.pos_encoding = sinusoidal_positional_encoding<Real>(config.max_len, d);
  return p;
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  visit_tensors(z, [](const std::string&, Matrix& t) { t.setZero(); });
  return z;
}

std::vector<NamedTensor> named_tensors(Parameters& p) {
  std::vector<NamedTensor> out;
  visit_tensors(p, [&out](const std::string& name, Matrix& t) {
    out.push_back({name, &t});
  });
  return out;
}

Batch make_batch(const std::vector<IdSeq>& src,
                 const std::vector<IdSeq>& tgt_in,
                 const std::vector<IdSeq>& tgt_out, Lang src_lang,
                 Lang tgt_lang) {
  if (src.size() != tgt_in.size() || src.size() != tgt_out.size())
    throw std::runtime_error("make_batch: side sizes differ");
  const Index b = static_cast<Index>(src.size());
  Index s_max = 1, t_max = 1;
  for (const auto& r : src) s_max = std::max<Index>(s_max, static_cast<Index>(r.size()));
  for (const auto& r : tgt_in) t_max = std::max<Index>(t_max, static_cast<Index>(r.size()));

  Batch batch;
  batch.src_lang = src_lang;
  batch.tgt_lang = tgt_lang;
  batch.src.setConstant(b, s_max, special::Pad);
  batch.tgt_in.setConstant(b, t_max, special::Pad);
  batch.tgt_out.setConstant(b, t_max, special::Pad);
  batch.src_len.resize(static_cast<std::size_t>(b));
  batch.tgt_len.resize(static_cast<std::size_t>(b));
  for (Index i = 0; i < b; ++i) {
    const auto& s = src[static_cast<std::size_t>(i)];
    const auto& ti = tgt_in[static_cast<std::size_t>(i)];
    const auto& to = tgt_out[static_cast<std::size_t>(i)];
    if (ti.size() != to.size())
      throw std::runtime_error("make_batch: tgt_in/tgt_out length mismatch");
    batch.src_len[static_cast<std::size_t>(i)] = static_cast<int>(s.size());
    batch.tgt_len[static_cast<std::size_t>(i)] = static_cast<int>(ti.size());
    for (std::size_t j = 0; j < s.size(); ++j)
      batch.src(i, static_cast<Index>(j)) = s[j];
    for (std::size_t j = 0; j < ti.size(); ++j) {
      batch.tgt_in(i, static_cast<Index>(j)) = ti[j];
      batch.tgt_out(i, static_cast<Index>(j)) = to[j];
    }
  }
  return batch;
}

}  // namespace unmt
