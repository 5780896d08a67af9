#pragma once

#include "unmt/rng.hpp"
#include "unmt/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace unmt {

enum class EmbeddingMode { Random, NonStatic, Static };

const char* to_string(EmbeddingMode m);
EmbeddingMode embedding_mode_from_string(const std::string& s);

struct ModelConfig {
  int layers = 2;
  int heads = 4;
  int dim = 64;
  int ffn_dim = 256;
  double dropout = 0.0;
  int max_len = 64;
  bool use_decoder_lang_code = true;
  EmbeddingMode embedding_mode = EmbeddingMode::Random;
  bool tie_embeddings = true;

  void validate() const {
    if (layers < 1) throw std::runtime_error("ModelConfig: layers < 1");
    if (dim % heads != 0)
      throw std::runtime_error("ModelConfig: dim not divisible by heads");
    if (dropout < 0.0 || dropout >= 1.0)
      throw std::runtime_error("ModelConfig: dropout outside [0,1)");
    if (max_len < 2) throw std::runtime_error("ModelConfig: max_len < 2");
  }

  // Hyperparameters of the full-scale reference setup.
  static ModelConfig paper_preset() {
    ModelConfig c;
    c.layers = 6;
    c.heads = 8;
    c.dim = 1024;
    c.ffn_dim = 4096;
    c.dropout = 0.1;
    c.max_len = 256;
    return c;
  }
};

struct LayerNormParams {
  Matrix gain;  // d x 1
  Matrix bias;  // d x 1
};

struct AttentionParams {
  Matrix wq, wk, wv, wo;  // d x d
  Matrix bq, bk, bv, bo;  // d x 1
};

struct FfnParams {
  Matrix w1;  // d x f
  Matrix b1;  // f x 1
  Matrix w2;  // f x d
  Matrix b2;  // d x 1
};

struct EncoderLayerParams {
  LayerNormParams ln1;
  AttentionParams attn;
  LayerNormParams ln2;
  FfnParams ffn;
};

struct DecoderLayerParams {
  LayerNormParams ln1;
  AttentionParams self_attn;
  LayerNormParams ln2;
  AttentionParams cross_attn;
  LayerNormParams ln3;
  FfnParams ffn;
};

// Every trainable tensor of the model, plus the fixed positional table.
// The embedding table is shared between encoder input, decoder input, and
// (when tie_embeddings) the output projection; out_embedding exists only
// when untied.
struct Parameters {
  ModelConfig config;
  Index vocab_size = 0;

  Matrix embedding;      // V x d
  Matrix out_embedding;  // V x d when untied, else 0 x 0
  Matrix lang_code_src;  // d x 1, decoder side
  Matrix lang_code_tgt;  // d x 1
  std::vector<EncoderLayerParams> encoder;
  LayerNormParams encoder_norm;
  std::vector<DecoderLayerParams> decoder;
  LayerNormParams decoder_norm;

  Matrix pos_encoding;  // max_len x d, not trainable

  static Parameters init(const ModelConfig& config, Index vocab_size,
                         Rng rng);
  // Same tree with every trainable tensor zeroed.
  Parameters zeros_like() const;
};

using Gradients = Parameters;

// Visits every trainable tensor in a fixed canonical order.
template <class Params, class F>
void visit_tensors(Params& p, F&& f) {
  f("embedding", p.embedding);
  if (!p.config.tie_embeddings) f("out_embedding", p.out_embedding);
  f("lang_code_src", p.lang_code_src);
  f("lang_code_tgt", p.lang_code_tgt);
  auto ln = [&f](const std::string& base, auto& l) {
    f(base + ".gain", l.gain);
    f(base + ".bias", l.bias);
  };
  auto attn = [&f](const std::string& base, auto& a) {
    f(base + ".wq", a.wq);
    f(base + ".wk", a.wk);
    f(base + ".wv", a.wv);
    f(base + ".wo", a.wo);
    f(base + ".bq", a.bq);
    f(base + ".bk", a.bk);
    f(base + ".bv", a.bv);
    f(base + ".bo", a.bo);
  };
  auto ffn = [&f](const std::string& base, auto& x) {
    f(base + ".w1", x.w1);
    f(base + ".b1", x.b1);
    f(base + ".w2", x.w2);
    f(base + ".b2", x.b2);
  };
  for (std::size_t i = 0; i < p.encoder.size(); ++i) {
    std::string base = "encoder." + std::to_string(i);
    auto& L = p.encoder[i];
    ln(base + ".ln1", L.ln1);
    attn(base + ".attn", L.attn);
    ln(base + ".ln2", L.ln2);
    ffn(base + ".ffn", L.ffn);
  }
  ln("encoder.norm", p.encoder_norm);
  for (std::size_t i = 0; i < p.decoder.size(); ++i) {
    std::string base = "decoder." + std::to_string(i);
    auto& L = p.decoder[i];
    ln(base + ".ln1", L.ln1);
    attn(base + ".self_attn", L.self_attn);
    ln(base + ".ln2", L.ln2);
    attn(base + ".cross_attn", L.cross_attn);
    ln(base + ".ln3", L.ln3);
    ffn(base + ".ffn", L.ffn);
  }
  ln("decoder.norm", p.decoder_norm);
}

// Collects (name, tensor pointer) pairs in visitation order.
struct NamedTensor {
  std::string name;
  Matrix* tensor;
};
std::vector<NamedTensor> named_tensors(Parameters& p);

// Training batch. Rows are right-padded with Pad; *_len give the real
// lengths. tgt_out is tgt_in shifted left by one with the terminal symbol
// appended by the batch builder.
struct Batch {
  MatX<TokenId> src;     // B x S
  MatX<TokenId> tgt_in;  // B x T
  MatX<TokenId> tgt_out; // B x T
  std::vector<int> src_len;
  std::vector<int> tgt_len;
  Lang src_lang = Lang::Src;
  Lang tgt_lang = Lang::Tgt;

  Index size() const { return src.rows(); }
};

// Pads ragged rows into a Batch. src rows should already carry their
// terminal EOS; tgt_in starts with the decoder start symbol and tgt_out
// ends with EOS (or the MASS span).
Batch make_batch(const std::vector<IdSeq>& src,
                 const std::vector<IdSeq>& tgt_in,
                 const std::vector<IdSeq>& tgt_out, Lang src_lang,
                 Lang tgt_lang);

}  // namespace unmt
