#include "unmt/model.hpp"
#include "unmt/nn_ops.hpp"
#include "unmt/transformer.hpp"

#include "testutil.hpp"

#include <doctest.h>

#include <cmath>

using namespace unmt;

namespace {

ModelConfig tiny_config(int layers = 2, int heads = 2) {
  ModelConfig c;
  c.layers = layers;
  c.heads = heads;
  c.dim = 16;
  c.ffn_dim = 32;
  c.max_len = 32;
  c.dropout = 0.0;
  return c;
}

}  // namespace

TEST_CASE("sinusoidal pe at position 0 is [0,1,0,1,...]") {
  Matrix pe = sinusoidal_positional_encoding<Real>(4, 8);
  for (Index i = 0; i < 8; i += 2) {
    CHECK(pe(0, i) == doctest::Approx(0.0));
    CHECK(pe(0, i + 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("embed_input decomposes additively at position 0") {
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, 20, Rng(1));
  p.embedding.row(special::Pad).setZero();
  Matrix x = embed_input(p, {special::Pad}, Side::Encoder, Lang::Src);
  CHECK((x.row(0) - p.pos_encoding.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("encoder embedding ignores the language tag") {
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, 20, Rng(1));
  Matrix a = embed_input(p, {8, 9}, Side::Encoder, Lang::Src);
  Matrix b = embed_input(p, {8, 9}, Side::Encoder, Lang::Tgt);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("decoder embedding adds the language code when enabled") {
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, 20, Rng(1));
  Matrix a = embed_input(p, {8}, Side::Decoder, Lang::Src);
  Matrix b = embed_input(p, {8}, Side::Decoder, Lang::Tgt);
  Matrix diff = a - b;
  Matrix expect = (p.lang_code_src - p.lang_code_tgt).transpose();
  CHECK((diff - expect).cwiseAbs().maxCoeff() < 1e-15);

  p.config.use_decoder_lang_code = false;
  Matrix c = embed_input(p, {8}, Side::Decoder, Lang::Src);
  Matrix d = embed_input(p, {8}, Side::Decoder, Lang::Tgt);
  CHECK((c - d).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("embed_input rejects sequences over max_len") {
  ModelConfig cfg = tiny_config();
  cfg.max_len = 4;
  Parameters p = Parameters::init(cfg, 20, Rng(1));
  CHECK_THROWS(embed_input(p, IdSeq(5, 8), Side::Encoder, Lang::Src));
}

TEST_CASE("per-position softmax of logits sums to 1") {
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, 30, Rng(2));
  Rng rng(3);
  Batch batch = testutil::random_batch(30, 3, 2, 6, rng);
  auto fwd = forward(p, batch);
  for (const Matrix& lg : fwd.logits) {
    for (Index t = 0; t < lg.rows(); ++t) {
      Real mx = lg.row(t).maxCoeff();
      Eigen::ArrayXd probs = (lg.row(t).array() - mx).exp();
      probs /= probs.sum();
      CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("pad positions of the source change no logit") {
  for (int layers : {1, 2}) {
    for (int heads : {1, 2}) {
      ModelConfig cfg = tiny_config(layers, heads);
      Parameters p = Parameters::init(cfg, 30, Rng(4));
      Rng rng(5);
      Batch batch = testutil::random_batch(30, 4, 2, 6, rng);
      auto base = forward(p, batch);

      Batch mutated = batch;
      bool changed_any = false;
      for (Index i = 0; i < mutated.src.rows(); ++i)
        for (Index j = mutated.src_len[static_cast<std::size_t>(i)];
             j < mutated.src.cols(); ++j) {
          mutated.src(i, j) = 9;  // arbitrary real token in a PAD slot
          changed_any = true;
        }
      if (!changed_any) continue;
      auto after = forward(p, mutated);
      for (std::size_t i = 0; i < base.logits.size(); ++i)
        CHECK((base.logits[i] - after.logits[i]).cwiseAbs().maxCoeff() <=
              1e-9);
    }
  }
}

TEST_CASE("decoder logits are causal") {
  for (int layers : {1, 2}) {
    for (int heads : {1, 2}) {
      ModelConfig cfg = tiny_config(layers, heads);
      Parameters p = Parameters::init(cfg, 30, Rng(6));
      Rng rng(7);
      Batch batch = testutil::random_batch(30, 2, 4, 6, rng);
      auto base = forward(p, batch);

      // Alter tgt_in beyond position t; logits at <= t must not move.
      Batch mutated = batch;
      const int t_cut = 2;
      for (Index i = 0; i < mutated.tgt_in.rows(); ++i)
        for (Index j = t_cut + 1; j < mutated.tgt_in.cols(); ++j)
          mutated.tgt_in(i, j) = 11;
      auto after = forward(p, mutated);
      for (std::size_t i = 0; i < base.logits.size(); ++i) {
        Matrix d = base.logits[i].topRows(t_cut + 1) -
                   after.logits[i].topRows(t_cut + 1);
        CHECK(d.cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("forward is deterministic with dropout off") {
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, 30, Rng(8));
  Rng rng(9);
  Batch batch = testutil::random_batch(30, 3, 2, 6, rng);
  auto a = forward(p, batch);
  auto b = forward(p, batch);
  for (std::size_t i = 0; i < a.logits.size(); ++i)
    CHECK((a.logits[i] - b.logits[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uniform logits give loss ln V") {
  ModelConfig cfg = tiny_config();
  const Index V = 30;
  Parameters p = Parameters::init(cfg, V, Rng(10));
  Rng rng(11);
  Batch batch = testutil::random_batch(V, 2, 3, 5, rng);
  std::vector<Matrix> logits;
  for (std::size_t i = 0; i < static_cast<std::size_t>(batch.size()); ++i)
    logits.push_back(Matrix::Zero(batch.tgt_len[i], V));
  LossInfo info = cross_entropy(logits, batch);
  CHECK(info.mean == doctest::Approx(std::log(static_cast<double>(V)))
                         .epsilon(1e-12));
}

TEST_CASE("one-hot-correct logits drive loss to zero") {
  const Index V = 20;
  Rng rng(12);
  Batch batch = testutil::random_batch(V, 1, 4, 4, rng);
  for (Real margin : {5.0, 20.0, 60.0}) {
    std::vector<Matrix> logits;
    Matrix lg = Matrix::Zero(batch.tgt_len[0], V);
    for (int t = 0; t < batch.tgt_len[0]; ++t)
      lg(t, batch.tgt_out(0, t)) = margin;
    logits.push_back(lg);
    LossInfo info = cross_entropy(logits, batch);
    if (margin == 60.0) CHECK(info.mean < 1e-15);
  }
}

TEST_CASE("duplicated sentence keeps the same mean loss") {
  const Index V = 25;
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, V, Rng(13));
  Rng rng(14);
  Batch one = testutil::random_batch(V, 1, 4, 4, rng);
  std::vector<IdSeq> src(2), tin(2), tout(2);
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < one.src_len[0]; ++j)
      src[static_cast<std::size_t>(k)].push_back(one.src(0, j));
    IdSeq ti, to;
    for (int j = 0; j < one.tgt_len[0]; ++j) {
      ti.push_back(one.tgt_in(0, j));
      to.push_back(one.tgt_out(0, j));
    }
    tin[static_cast<std::size_t>(k)] = ti;
    tout[static_cast<std::size_t>(k)] = to;
  }
  Batch two = make_batch(src, tin, tout, Lang::Src, Lang::Tgt);
  Real l1 = cross_entropy(forward(p, one).logits, one).mean;
  Real l2 = cross_entropy(forward(p, two).logits, two).mean;
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("loss rejects a batch with zero real tokens") {
  Batch b;
  b.src.setConstant(1, 2, special::Pad);
  b.tgt_in.setConstant(1, 2, special::Pad);
  b.tgt_out.setConstant(1, 2, special::Pad);
  b.src_len = {1};
  b.tgt_len = {0};
  std::vector<Matrix> logits{Matrix::Zero(0, 10)};
  CHECK_THROWS(cross_entropy(logits, b));
}

TEST_CASE("tied projection links embedding row to logit column") {
  const Index V = 25;
  ModelConfig cfg = tiny_config();
  Parameters p = Parameters::init(cfg, V, Rng(15));
  REQUIRE(p.config.tie_embeddings);
  Rng rng(16);
  Batch batch = testutil::random_batch(V, 1, 3, 5, rng);

  const TokenId probe = 9;
  auto base = forward(p, batch);
  p.embedding.row(probe).array() += 0.25;
  auto after = forward(p, batch);
  // The probe column of the logits must move even when the token never
  // occurs in the batch input (output-side tying).
  Matrix dcol = after.logits[0].col(probe) - base.logits[0].col(probe);
  CHECK(dcol.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("untied model separates input and output embeddings") {
  const Index V = 25;
  ModelConfig cfg = tiny_config();
  cfg.tie_embeddings = false;
  Parameters p = Parameters::init(cfg, V, Rng(17));
  REQUIRE(p.out_embedding.rows() == V);
  Rng rng(18);
  Batch batch = testutil::random_batch(V, 1, 3, 5, rng);
  auto base = forward(p, batch);
  p.embedding.row(9).array() += 0.25;  // 9 not used in batch? force unused:
  auto after = forward(p, batch);
  bool used = false;
  for (int j = 0; j < batch.src_len[0]; ++j)
    if (batch.src(0, j) == 9) used = true;
  for (int j = 0; j < batch.tgt_len[0]; ++j)
    if (batch.tgt_in(0, j) == 9) used = true;
  if (!used) {
    CHECK((after.logits[0] - base.logits[0]).cwiseAbs().maxCoeff() == 0.0);
  }
}
