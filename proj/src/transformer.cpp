#include "unmt/transformer.hpp"

#include "unmt/nn_ops.hpp"

#include <cmath>
#include <stdexcept>

namespace unmt {

namespace {

constexpr Real kLnEps = 1e-5;
constexpr Real kMaskValue = -1e30;

struct LnCache {
  Matrix xhat;  // S x d
  Vector istd;  // S
};

Matrix ln_forward(const Matrix& x, const LayerNormParams& p, LnCache* c) {
  const Index s = x.rows(), d = x.cols();
  Matrix out(s, d);
  if (c) {
    c->xhat.resize(s, d);
    c->istd.resize(s);
  }
  for (Index i = 0; i < s; ++i) {
    Real mu = x.row(i).mean();
    Real var = (x.row(i).array() - mu).square().mean();
    Real istd = Real(1) / std::sqrt(var + kLnEps);
    Eigen::RowVectorXd xhat = (x.row(i).array() - mu) * istd;
    out.row(i) = (xhat.array() * p.gain.col(0).transpose().array()) +
                 p.bias.col(0).transpose().array();
    if (c) {
      c->xhat.row(i) = xhat;
      c->istd(i) = istd;
    }
  }
  return out;
}

Matrix ln_backward(const Matrix& dy, const LayerNormParams& p,
                   const LnCache& c, LayerNormParams& g) {
  const Index s = dy.rows(), d = dy.cols();
  Matrix dx(s, d);
  for (Index i = 0; i < s; ++i) {
    Eigen::RowVectorXd dyh =
        dy.row(i).array() * p.gain.col(0).transpose().array();
    Real m1 = dyh.mean();
    Real m2 = (dyh.array() * c.xhat.row(i).array()).mean();
    dx.row(i) =
        c.istd(i) * (dyh.array() - m1 - c.xhat.row(i).array() * m2).matrix();
  }
  g.gain.col(0).noalias() += (dy.array() * c.xhat.array()).colwise().sum().matrix().transpose();
  g.bias.col(0).noalias() += dy.colwise().sum().transpose();
  return dx;
}

struct AttnCache {
  Matrix xq, xkv;            // inputs
  Matrix q, k, v;            // projected
  std::vector<Matrix> probs; // per head, Sq x Sk
  Matrix ctx;                // pre-output-projection
};

Matrix attn_forward(const AttentionParams& p, int heads, const Matrix& xq,
                    const Matrix& xkv, bool causal, AttnCache* c) {
  const Index d = xq.cols();
  const Index dk = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dk));

  Matrix q = xq * p.wq;
  q.rowwise() += p.bq.col(0).transpose();
  Matrix k = xkv * p.wk;
  k.rowwise() += p.bk.col(0).transpose();
  Matrix v = xkv * p.wv;
  v.rowwise() += p.bv.col(0).transpose();

  Matrix ctx(xq.rows(), d);
  std::vector<Matrix> probs(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto qh = q.middleCols(h * dk, dk);
    auto kh = k.middleCols(h * dk, dk);
    auto vh = v.middleCols(h * dk, dk);
    Matrix scores = qh * kh.transpose() * scale;
    if (causal) {
      for (Index i = 0; i < scores.rows(); ++i)
        for (Index j = i + 1; j < scores.cols(); ++j)
          scores(i, j) = kMaskValue;
    }
    softmax_rows_inplace(scores);
    ctx.middleCols(h * dk, dk).noalias() = scores * vh;
    probs[static_cast<std::size_t>(h)] = std::move(scores);
  }
  Matrix out = ctx * p.wo;
  out.rowwise() += p.bo.col(0).transpose();
  if (c) {
    c->xq = xq;
    c->xkv = xkv;
    c->q = std::move(q);
    c->k = std::move(k);
    c->v = std::move(v);
    c->probs = std::move(probs);
    c->ctx = std::move(ctx);
  }
  return out;
}

// Returns dXq; accumulates dXkv into dxkv_acc (may alias the same stream
// for self-attention, handled by the caller).
Matrix attn_backward(const AttentionParams& p, int heads, const Matrix& dout,
                     const AttnCache& c, AttentionParams& g,
                     Matrix& dxkv_acc) {
  const Index d = c.xq.cols();
  const Index dk = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dk));

  g.wo.noalias() += c.ctx.transpose() * dout;
  g.bo.col(0).noalias() += dout.colwise().sum().transpose();
  Matrix dctx = dout * p.wo.transpose();

  Matrix dq(c.q.rows(), d), dkm(c.k.rows(), d), dv(c.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const Matrix& a = c.probs[static_cast<std::size_t>(h)];
    auto vh = c.v.middleCols(h * dk, dk);
    auto qh = c.q.middleCols(h * dk, dk);
    auto kh = c.k.middleCols(h * dk, dk);
    Matrix dctx_h = dctx.middleCols(h * dk, dk);
    Matrix da = dctx_h * vh.transpose();
    dv.middleCols(h * dk, dk).noalias() = a.transpose() * dctx_h;
    Matrix ds = softmax_rows_backward(a, da);
    dq.middleCols(h * dk, dk).noalias() = ds * kh * scale;
    dkm.middleCols(h * dk, dk).noalias() = ds.transpose() * qh * scale;
  }

  g.wq.noalias() += c.xq.transpose() * dq;
  g.bq.col(0).noalias() += dq.colwise().sum().transpose();
  g.wk.noalias() += c.xkv.transpose() * dkm;
  g.bk.col(0).noalias() += dkm.colwise().sum().transpose();
  g.wv.noalias() += c.xkv.transpose() * dv;
  g.bv.col(0).noalias() += dv.colwise().sum().transpose();

  dxkv_acc.noalias() += dkm * p.wk.transpose();
  dxkv_acc.noalias() += dv * p.wv.transpose();
  return dq * p.wq.transpose();
}

struct FfnCache {
  Matrix x;  // input, S x d
  Matrix z;  // pre-activation, S x f
};

Matrix ffn_forward(const FfnParams& p, const Matrix& x, FfnCache* c) {
  Matrix z = x * p.w1;
  z.rowwise() += p.b1.col(0).transpose();
  Matrix h = gelu(z);
  Matrix out = h * p.w2;
  out.rowwise() += p.b2.col(0).transpose();
  if (c) {
    c->x = x;
    c->z = std::move(z);
  }
  return out;
}

Matrix ffn_backward(const FfnParams& p, const Matrix& dout, const FfnCache& c,
                    FfnParams& g) {
  Matrix h = gelu(c.z);
  g.w2.noalias() += h.transpose() * dout;
  g.b2.col(0).noalias() += dout.colwise().sum().transpose();
  Matrix dh = dout * p.w2.transpose();
  Matrix dz = dh.cwiseProduct(gelu_grad(c.z));
  g.w1.noalias() += c.x.transpose() * dz;
  g.b1.col(0).noalias() += dz.colwise().sum().transpose();
  return dz * p.w1.transpose();
}

// Inverted-dropout mask; empty matrix means "disabled".
Matrix make_dropout_mask(Index rows, Index cols, double p, Rng& rng) {
  Matrix m(rows, cols);
  const Real keep = Real(1) / (Real(1) - p);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      m(i, j) = rng.bernoulli(p) ? Real(0) : keep;
  return m;
}

inline Matrix apply_drop(const Matrix& x, const Matrix& mask) {
  return mask.size() == 0 ? x : x.cwiseProduct(mask);
}

struct EncLayerCache {
  LnCache ln1;
  AttnCache attn;
  Matrix drop1;
  LnCache ln2;
  FfnCache ffn;
  Matrix drop2;
};

struct DecLayerCache {
  LnCache ln1;
  AttnCache self_attn;
  Matrix drop1;
  LnCache ln2;
  AttnCache cross_attn;
  Matrix drop2;
  LnCache ln3;
  FfnCache ffn;
  Matrix drop3;
};

struct SampleCache {
  IdSeq src_ids, tgt_in_ids;
  Matrix emb_drop_enc, emb_drop_dec;
  std::vector<EncLayerCache> enc_layers;
  LnCache enc_norm;
  Matrix enc_out;
  std::vector<DecLayerCache> dec_layers;
  LnCache dec_norm;
  Matrix dec_out;
};

}  // namespace

struct ActivationCache {
  std::vector<SampleCache> samples;
};

ForwardResult::ForwardResult() = default;
ForwardResult::~ForwardResult() = default;
ForwardResult::ForwardResult(ForwardResult&&) noexcept = default;
ForwardResult& ForwardResult::operator=(ForwardResult&&) noexcept = default;

namespace {

void check_finite(const Matrix& x, const char* stage, int layer) {
  if (!x.allFinite())
    throw std::runtime_error(std::string("non-finite activation in ") + stage +
                             " layer " + std::to_string(layer));
}

Matrix gather_embedding(const Parameters& p, const IdSeq& ids) {
  Matrix x(static_cast<Index>(ids.size()), p.config.dim);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    TokenId id = ids[t];
    if (id < 0 || id >= p.vocab_size)
      throw std::runtime_error("token id out of range: " + std::to_string(id));
    x.row(static_cast<Index>(t)) = p.embedding.row(id);
  }
  return x;
}

Matrix embed_sequence(const Parameters& p, const IdSeq& ids, Side side,
                      Lang language) {
  const Index s = static_cast<Index>(ids.size());
  if (s > p.config.max_len)
    throw std::runtime_error("sequence length " + std::to_string(s) +
                             " exceeds max_len " +
                             std::to_string(p.config.max_len));
  Matrix x = gather_embedding(p, ids);
  x += p.pos_encoding.topRows(s);
  if (side == Side::Decoder && p.config.use_decoder_lang_code) {
    const Matrix& code =
        language == Lang::Src ? p.lang_code_src : p.lang_code_tgt;
    x.rowwise() += code.col(0).transpose();
  }
  return x;
}

const Matrix& output_matrix(const Parameters& p) {
  return p.config.tie_embeddings ? p.embedding : p.out_embedding;
}

Matrix encoder_forward(const Parameters& p, const IdSeq& src, Lang /*lang*/,
                       SampleCache* c, Rng* drop_rng) {
  const double pdrop = p.config.dropout;
  Matrix x = embed_sequence(p, src, Side::Encoder, Lang::Src);
  if (drop_rng) {
    Matrix mask = make_dropout_mask(x.rows(), x.cols(), pdrop, *drop_rng);
    x = apply_drop(x, mask);
    if (c) c->emb_drop_enc = std::move(mask);
  }
  for (std::size_t l = 0; l < p.encoder.size(); ++l) {
    const EncoderLayerParams& L = p.encoder[l];
    EncLayerCache* lc = c ? &c->enc_layers[l] : nullptr;
    Matrix a = ln_forward(x, L.ln1, lc ? &lc->ln1 : nullptr);
    Matrix sa = attn_forward(L.attn, p.config.heads, a, a, /*causal=*/false,
                             lc ? &lc->attn : nullptr);
    if (drop_rng) {
      Matrix mask = make_dropout_mask(sa.rows(), sa.cols(), pdrop, *drop_rng);
      sa = apply_drop(sa, mask);
      if (lc) lc->drop1 = std::move(mask);
    }
    x += sa;
    Matrix f = ln_forward(x, L.ln2, lc ? &lc->ln2 : nullptr);
    Matrix ff = ffn_forward(L.ffn, f, lc ? &lc->ffn : nullptr);
    if (drop_rng) {
      Matrix mask = make_dropout_mask(ff.rows(), ff.cols(), pdrop, *drop_rng);
      ff = apply_drop(ff, mask);
      if (lc) lc->drop2 = std::move(mask);
    }
    x += ff;
    check_finite(x, "encoder", static_cast<int>(l));
  }
  return ln_forward(x, p.encoder_norm, c ? &c->enc_norm : nullptr);
}

Matrix decoder_forward(const Parameters& p, const IdSeq& tgt_in, Lang tgt_lang,
                       const Matrix& enc_out, SampleCache* c, Rng* drop_rng) {
  const double pdrop = p.config.dropout;
  Matrix y = embed_sequence(p, tgt_in, Side::Decoder, tgt_lang);
  if (drop_rng) {
    Matrix mask = make_dropout_mask(y.rows(), y.cols(), pdrop, *drop_rng);
    y = apply_drop(y, mask);
    if (c) c->emb_drop_dec = std::move(mask);
  }
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const DecoderLayerParams& L = p.decoder[l];
    DecLayerCache* lc = c ? &c->dec_layers[l] : nullptr;
    Matrix a = ln_forward(y, L.ln1, lc ? &lc->ln1 : nullptr);
    Matrix sa = attn_forward(L.self_attn, p.config.heads, a, a,
                             /*causal=*/true, lc ? &lc->self_attn : nullptr);
    if (drop_rng) {
      Matrix mask = make_dropout_mask(sa.rows(), sa.cols(), pdrop, *drop_rng);
      sa = apply_drop(sa, mask);
      if (lc) lc->drop1 = std::move(mask);
    }
    y += sa;
    Matrix cq = ln_forward(y, L.ln2, lc ? &lc->ln2 : nullptr);
    Matrix ca = attn_forward(L.cross_attn, p.config.heads, cq, enc_out,
                             /*causal=*/false, lc ? &lc->cross_attn : nullptr);
    if (drop_rng) {
      Matrix mask = make_dropout_mask(ca.rows(), ca.cols(), pdrop, *drop_rng);
      ca = apply_drop(ca, mask);
      if (lc) lc->drop2 = std::move(mask);
    }
    y += ca;
    Matrix f = ln_forward(y, L.ln3, lc ? &lc->ln3 : nullptr);
    Matrix ff = ffn_forward(L.ffn, f, lc ? &lc->ffn : nullptr);
    if (drop_rng) {
      Matrix mask = make_dropout_mask(ff.rows(), ff.cols(), pdrop, *drop_rng);
      ff = apply_drop(ff, mask);
      if (lc) lc->drop3 = std::move(mask);
    }
    y += ff;
    check_finite(y, "decoder", static_cast<int>(l));
  }
  return ln_forward(y, p.decoder_norm, c ? &c->dec_norm : nullptr);
}

IdSeq crop_row(const MatX<TokenId>& m, Index i, int len) {
  IdSeq ids(static_cast<std::size_t>(len));
  for (int t = 0; t < len; ++t) ids[static_cast<std::size_t>(t)] = m(i, t);
  return ids;
}

}  // namespace

Matrix embed_input(const Parameters& p, const IdSeq& ids, Side side,
                   Lang language) {
  return embed_sequence(p, ids, side, language);
}

ForwardResult forward(const Parameters& p, const Batch& batch, bool want_cache,
                      std::optional<Rng> dropout_rng) {
  if (p.config.dropout == 0.0) dropout_rng.reset();
  ForwardResult res;
  if (want_cache) res.cache = std::make_shared<ActivationCache>();
  const Index b = batch.size();
  res.logits.reserve(static_cast<std::size_t>(b));
  for (Index i = 0; i < b; ++i) {
    SampleCache* sc = nullptr;
    if (want_cache) {
      res.cache->samples.emplace_back();
      sc = &res.cache->samples.back();
      sc->enc_layers.resize(p.encoder.size());
      sc->dec_layers.resize(p.decoder.size());
    }
    IdSeq src = crop_row(batch.src, i, batch.src_len[static_cast<std::size_t>(i)]);
    IdSeq tgt_in =
        crop_row(batch.tgt_in, i, batch.tgt_len[static_cast<std::size_t>(i)]);
    Rng sample_rng(0);
    Rng* rng_ptr = nullptr;
    if (dropout_rng) {
      sample_rng = dropout_rng->fork(static_cast<std::uint64_t>(i));
      rng_ptr = &sample_rng;
    }
    Matrix enc_out = encoder_forward(p, src, batch.src_lang, sc, rng_ptr);
    Matrix dec_out =
        decoder_forward(p, tgt_in, batch.tgt_lang, enc_out, sc, rng_ptr);
    Matrix logits = dec_out * output_matrix(p).transpose();
    if (sc) {
      sc->src_ids = std::move(src);
      sc->tgt_in_ids = std::move(tgt_in);
      sc->enc_out = std::move(enc_out);
      sc->dec_out = std::move(dec_out);
    }
    res.logits.push_back(std::move(logits));
  }
  return res;
}

LossInfo cross_entropy(const std::vector<Matrix>& logits, const Batch& batch) {
  LossInfo info;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const Matrix& lg = logits[i];
    int len = batch.tgt_len[i];
    for (int t = 0; t < len; ++t) {
      TokenId target = batch.tgt_out(static_cast<Index>(i), t);
      if (target == special::Pad) continue;
      Real mx = lg.row(t).maxCoeff();
      Real lse = mx + std::log((lg.row(t).array() - mx).exp().sum());
      info.total += lse - lg(t, target);
      info.tokens++;
      Index argmax;
      lg.row(t).maxCoeff(&argmax);
      if (static_cast<TokenId>(argmax) == target) info.correct++;
    }
  }
  if (info.tokens == 0)
    throw std::runtime_error("cross_entropy: no real target tokens in batch");
  info.mean = info.total / static_cast<Real>(info.tokens);
  return info;
}

BackwardResult backward(const Parameters& p, const Batch& batch,
                        std::optional<Rng> dropout_rng) {
  ForwardResult fwd = forward(p, batch, /*want_cache=*/true, dropout_rng);
  BackwardResult res{cross_entropy(fwd.logits, batch), p.zeros_like()};
  Gradients& g = res.grads;
  const Real inv_n = Real(1) / static_cast<Real>(res.loss.tokens);
  const int heads = p.config.heads;

  Matrix& d_emb =
      p.config.tie_embeddings ? g.embedding : g.out_embedding;

  for (std::size_t i = 0; i < fwd.logits.size(); ++i) {
    SampleCache& sc = fwd.cache->samples[i];
    const Matrix& lg = fwd.logits[i];
    const int t_len = batch.tgt_len[i];

    // dLogits = (softmax - onehot)/N on real rows.
    Matrix dlg = Matrix::Zero(lg.rows(), lg.cols());
    for (int t = 0; t < t_len; ++t) {
      TokenId target = batch.tgt_out(static_cast<Index>(i), t);
      if (target == special::Pad) continue;
      Eigen::RowVectorXd row = lg.row(t);
      Real mx = row.maxCoeff();
      Eigen::RowVectorXd probs = (row.array() - mx).exp();
      probs /= probs.sum();
      dlg.row(t) = probs * inv_n;
      dlg(t, target) -= inv_n;
    }

    // Output projection (tied or untied).
    Matrix d_dec_out = dlg * output_matrix(p);
    d_emb.noalias() += dlg.transpose() * sc.dec_out;

    // Decoder stack.
    Matrix dy = ln_backward(d_dec_out, p.decoder_norm, sc.dec_norm,
                            g.decoder_norm);
    Matrix d_enc_out = Matrix::Zero(sc.enc_out.rows(), sc.enc_out.cols());
    for (int l = static_cast<int>(p.decoder.size()) - 1; l >= 0; --l) {
      const DecoderLayerParams& L = p.decoder[static_cast<std::size_t>(l)];
      DecLayerCache& lc = sc.dec_layers[static_cast<std::size_t>(l)];
      auto& gl = g.decoder[static_cast<std::size_t>(l)];

      Matrix d_ff = apply_drop(dy, lc.drop3);
      Matrix d_f = ffn_backward(L.ffn, d_ff, lc.ffn, gl.ffn);
      dy += ln_backward(d_f, L.ln3, lc.ln3, gl.ln3);

      Matrix d_ca = apply_drop(dy, lc.drop2);
      Matrix d_cq = attn_backward(L.cross_attn, heads, d_ca, lc.cross_attn,
                                  gl.cross_attn, d_enc_out);
      dy += ln_backward(d_cq, L.ln2, lc.ln2, gl.ln2);

      Matrix d_sa = apply_drop(dy, lc.drop1);
      Matrix d_a = Matrix::Zero(dy.rows(), dy.cols());
      Matrix d_q = attn_backward(L.self_attn, heads, d_sa, lc.self_attn,
                                 gl.self_attn, d_a);
      d_a += d_q;
      dy += ln_backward(d_a, L.ln1, lc.ln1, gl.ln1);
    }
    Matrix d_dec_x0 = apply_drop(dy, sc.emb_drop_dec);
    for (std::size_t t = 0; t < sc.tgt_in_ids.size(); ++t)
      g.embedding.row(sc.tgt_in_ids[t]) += d_dec_x0.row(static_cast<Index>(t));
    if (p.config.use_decoder_lang_code) {
      Matrix& code_grad = batch.tgt_lang == Lang::Src ? g.lang_code_src
                                                      : g.lang_code_tgt;
      code_grad.col(0).noalias() += d_dec_x0.colwise().sum().transpose();
    }

    // Encoder stack.
    Matrix dx = ln_backward(d_enc_out, p.encoder_norm, sc.enc_norm,
                            g.encoder_norm);
    for (int l = static_cast<int>(p.encoder.size()) - 1; l >= 0; --l) {
      const EncoderLayerParams& L = p.encoder[static_cast<std::size_t>(l)];
      EncLayerCache& lc = sc.enc_layers[static_cast<std::size_t>(l)];
      auto& gl = g.encoder[static_cast<std::size_t>(l)];

      Matrix d_ff = apply_drop(dx, lc.drop2);
      Matrix d_f = ffn_backward(L.ffn, d_ff, lc.ffn, gl.ffn);
      dx += ln_backward(d_f, L.ln2, lc.ln2, gl.ln2);

      Matrix d_sa = apply_drop(dx, lc.drop1);
      Matrix d_a = Matrix::Zero(dx.rows(), dx.cols());
      Matrix d_q = attn_backward(L.attn, heads, d_sa, lc.attn, gl.attn, d_a);
      d_a += d_q;
      dx += ln_backward(d_a, L.ln1, lc.ln1, gl.ln1);
    }
    Matrix d_enc_x0 = apply_drop(dx, sc.emb_drop_enc);
    for (std::size_t t = 0; t < sc.src_ids.size(); ++t)
      g.embedding.row(sc.src_ids[t]) += d_enc_x0.row(static_cast<Index>(t));
  }

  bool finite = true;
  visit_tensors(g, [&finite](const std::string&, Matrix& t) {
    if (!t.allFinite()) finite = false;
  });
  if (!finite) throw std::runtime_error("backward: non-finite gradient");
  return res;
}

Matrix encode_sequence(const Parameters& p, const IdSeq& src_with_eos) {
  return encoder_forward(p, src_with_eos, Lang::Src, nullptr, nullptr);
}

IncrementalDecoder::IncrementalDecoder(const Parameters& p,
                                       const Matrix& enc_out, Lang tgt_lang)
    : p_(&p), tgt_lang_(tgt_lang) {
  layers_.resize(p.decoder.size());
  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const AttentionParams& ca = p.decoder[l].cross_attn;
    layers_[l].cross_k = enc_out * ca.wk;
    layers_[l].cross_k.rowwise() += ca.bk.col(0).transpose();
    layers_[l].cross_v = enc_out * ca.wv;
    layers_[l].cross_v.rowwise() += ca.bv.col(0).transpose();
    layers_[l].self_k.resize(0, p.config.dim);
    layers_[l].self_v.resize(0, p.config.dim);
  }
}

Vector IncrementalDecoder::step(TokenId token) {
  const Parameters& p = *p_;
  const Index d = p.config.dim;
  const int heads = p.config.heads;
  const Index dk = d / heads;
  const Real scale = Real(1) / std::sqrt(static_cast<Real>(dk));

  if (pos_ >= p.config.max_len)
    throw std::runtime_error("IncrementalDecoder: exceeded max_len");
  if (token < 0 || token >= p.vocab_size)
    throw std::runtime_error("IncrementalDecoder: token id out of range");

  Eigen::RowVectorXd y = p.embedding.row(token) + p.pos_encoding.row(pos_);
  if (p.config.use_decoder_lang_code) {
    const Matrix& code =
        tgt_lang_ == Lang::Src ? p.lang_code_src : p.lang_code_tgt;
    y += code.col(0).transpose();
  }

  auto ln_row = [](const Eigen::RowVectorXd& x, const LayerNormParams& lp) {
    Real mu = x.mean();
    Real var = (x.array() - mu).square().mean();
    Real istd = Real(1) / std::sqrt(var + kLnEps);
    Eigen::RowVectorXd xhat = (x.array() - mu) * istd;
    return Eigen::RowVectorXd((xhat.array() * lp.gain.col(0).transpose().array()) +
                              lp.bias.col(0).transpose().array());
  };

  auto attend = [&](const Eigen::RowVectorXd& q_row, const Matrix& k,
                    const Matrix& v) {
    Eigen::RowVectorXd out(d);
    for (int h = 0; h < heads; ++h) {
      auto qh = q_row.segment(h * dk, dk);
      auto kh = k.middleCols(h * dk, dk);
      auto vh = v.middleCols(h * dk, dk);
      Eigen::RowVectorXd scores = qh * kh.transpose() * scale;
      Real mx = scores.maxCoeff();
      Eigen::ArrayXd e = (scores.transpose().array() - mx).exp();
      e /= e.sum();
      out.segment(h * dk, dk) = (e.matrix().transpose() * vh);
    }
    return out;
  };

  for (std::size_t l = 0; l < p.decoder.size(); ++l) {
    const DecoderLayerParams& L = p.decoder[l];
    LayerState& st = layers_[l];

    Eigen::RowVectorXd a = ln_row(y, L.ln1);
    Eigen::RowVectorXd q = a * L.self_attn.wq + L.self_attn.bq.col(0).transpose();
    Eigen::RowVectorXd k = a * L.self_attn.wk + L.self_attn.bk.col(0).transpose();
    Eigen::RowVectorXd v = a * L.self_attn.wv + L.self_attn.bv.col(0).transpose();
    st.self_k.conservativeResize(st.self_k.rows() + 1, Eigen::NoChange);
    st.self_k.row(st.self_k.rows() - 1) = k;
    st.self_v.conservativeResize(st.self_v.rows() + 1, Eigen::NoChange);
    st.self_v.row(st.self_v.rows() - 1) = v;
    Eigen::RowVectorXd sa = attend(q, st.self_k, st.self_v);
    y += sa * L.self_attn.wo + L.self_attn.bo.col(0).transpose();

    Eigen::RowVectorXd cq = ln_row(y, L.ln2);
    Eigen::RowVectorXd qc =
        cq * L.cross_attn.wq + L.cross_attn.bq.col(0).transpose();
    Eigen::RowVectorXd ca = attend(qc, st.cross_k, st.cross_v);
    y += ca * L.cross_attn.wo + L.cross_attn.bo.col(0).transpose();

    Eigen::RowVectorXd f = ln_row(y, L.ln3);
    Eigen::RowVectorXd z = f * L.ffn.w1 + L.ffn.b1.col(0).transpose();
    Eigen::RowVectorXd h =
        gelu(z.transpose()).transpose();
    y += h * L.ffn.w2 + L.ffn.b2.col(0).transpose();
  }
  Eigen::RowVectorXd out = ln_row(y, p.decoder_norm);
  ++pos_;
  return output_matrix(p) * out.transpose();
}

}  // namespace unmt
