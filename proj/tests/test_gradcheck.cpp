#include "unmt/model.hpp"
#include "unmt/transformer.hpp"

#include "testutil.hpp"

#include <doctest.h>

using namespace unmt;

namespace {

// The finite-difference check at spec scale: 2 layers, 2 heads, d=16,
// V=50, 20 random coordinates per tensor, relative error <= 1e-3.
void run_gradcheck(const ModelConfig& cfg, Index vocab, std::uint64_t seed,
                   int probes_per_tensor = 20, double tol = 1e-3) {
  Parameters p = Parameters::init(cfg, vocab, Rng(seed));
  Rng rng(seed + 1);
  Batch batch = testutil::random_batch(vocab, 2, 3, 6, rng);

  auto bwd = backward(p, batch);
  auto tensors = named_tensors(p);
  auto grads = named_tensors(bwd.grads);
  REQUIRE(tensors.size() == grads.size());

  Rng probe_rng(seed + 2);
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    REQUIRE(tensors[k].name == grads[k].name);
    Matrix& t = *tensors[k].tensor;
    const Matrix& g = *grads[k].tensor;
    REQUIRE(g.rows() == t.rows());
    REQUIRE(g.cols() == t.cols());
    for (int probe = 0; probe < probes_per_tensor; ++probe) {
      Index i = static_cast<Index>(
          probe_rng.uniform_int(static_cast<std::uint64_t>(t.rows())));
      Index j = static_cast<Index>(
          probe_rng.uniform_int(static_cast<std::uint64_t>(t.cols())));
      Real fd = testutil::fd_gradient(p, batch, t, i, j);
      Real re = testutil::rel_err(fd, g(i, j));
      CAPTURE(tensors[k].name);
      CAPTURE(i);
      CAPTURE(j);
      CHECK(re <= tol);
    }
  }
}

}  // namespace

TEST_CASE("gradients match central finite differences (tiny model)") {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  run_gradcheck(cfg, 50, /*seed=*/21, /*probes=*/6);
}

TEST_CASE("gradients match finite differences with untied output") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  cfg.tie_embeddings = false;
  run_gradcheck(cfg, 30, /*seed=*/22, /*probes=*/6);
}

TEST_CASE("gradients match finite differences without decoder lang code") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 1;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  cfg.use_decoder_lang_code = false;
  run_gradcheck(cfg, 30, /*seed=*/23, /*probes=*/6);
}

TEST_CASE("unused language code gets zero gradient") {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  cfg.use_decoder_lang_code = false;
  Parameters p = Parameters::init(cfg, 30, Rng(31));
  Rng rng(32);
  Batch batch = testutil::random_batch(30, 2, 3, 5, rng);
  auto bwd = backward(p, batch);
  CHECK(bwd.grads.lang_code_src.cwiseAbs().maxCoeff() == 0.0);
  CHECK(bwd.grads.lang_code_tgt.cwiseAbs().maxCoeff() == 0.0);

  // With codes enabled, the target-language vector receives signal.
  cfg.use_decoder_lang_code = true;
  Parameters p2 = Parameters::init(cfg, 30, Rng(31));
  auto bwd2 = backward(p2, batch);
  CHECK(bwd2.grads.lang_code_tgt.cwiseAbs().maxCoeff() > 0.0);
  CHECK(bwd2.grads.lang_code_src.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gradient shapes match parameter shapes") {
  ModelConfig cfg;
  cfg.layers = 2;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  Parameters p = Parameters::init(cfg, 40, Rng(33));
  Rng rng(34);
  Batch batch = testutil::random_batch(40, 2, 3, 5, rng);
  auto bwd = backward(p, batch);
  auto ts = named_tensors(p);
  auto gs = named_tensors(bwd.grads);
  REQUIRE(ts.size() == gs.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    CHECK(ts[i].name == gs[i].name);
    CHECK(ts[i].tensor->rows() == gs[i].tensor->rows());
    CHECK(ts[i].tensor->cols() == gs[i].tensor->cols());
  }
}

TEST_CASE("gradients are exact under seeded dropout") {
  // Dropout masks are part of the cached forward, so gradients must match
  // finite differences of the same masked network. Rebuilding the same
  // Rng replays identical masks.
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.dim = 16;
  cfg.ffn_dim = 32;
  cfg.max_len = 16;
  cfg.dropout = 0.3;
  Parameters p = Parameters::init(cfg, 30, Rng(35));
  Rng rng(36);
  Batch batch = testutil::random_batch(30, 2, 3, 5, rng);

  auto bwd = backward(p, batch, Rng(99));
  auto tensors = named_tensors(p);
  auto grads = named_tensors(bwd.grads);
  Rng probe_rng(37);
  int checked = 0;
  for (std::size_t k = 0; k < tensors.size() && checked < 40; ++k) {
    Matrix& t = *tensors[k].tensor;
    const Matrix& g = *grads[k].tensor;
    Index i = static_cast<Index>(
        probe_rng.uniform_int(static_cast<std::uint64_t>(t.rows())));
    Index j = static_cast<Index>(
        probe_rng.uniform_int(static_cast<std::uint64_t>(t.cols())));
    const Real h = 1e-5;
    const Real saved = t(i, j);
    t(i, j) = saved + h;
    Real up = cross_entropy(forward(p, batch, false, Rng(99)).logits, batch).mean;
    t(i, j) = saved - h;
    Real dn = cross_entropy(forward(p, batch, false, Rng(99)).logits, batch).mean;
    t(i, j) = saved;
    Real fd = (up - dn) / (2 * h);
    CAPTURE(tensors[k].name);
    CHECK(testutil::rel_err(fd, g(i, j)) <= 1e-3);
    ++checked;
  }
}
