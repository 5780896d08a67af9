#include "unmt/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace unmt {

Real clip_gradients(Gradients& grads, double max_norm) {
  Real sq = 0;
  visit_tensors(grads, [&sq](const std::string&, Matrix& t) {
    sq += t.squaredNorm();
  });
  Real norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    Real scale = max_norm / norm;
    visit_tensors(grads, [scale](const std::string&, Matrix& t) { t *= scale; });
  }
  return norm;
}

namespace {

bool frozen_in_static(const std::string& name) {
  return name == "embedding" || name == "out_embedding";
}

}  // namespace

void adam_step(Parameters& params, const Gradients& grads,
               OptimizerState& state, const AdamConfig& config,
               EmbeddingMode mode) {
  state.step++;
  const double bc1 = 1.0 - std::pow(config.beta1, state.step);
  const double bc2 = 1.0 - std::pow(config.beta2, state.step);

  auto p_list = named_tensors(params);
  auto g_list = named_tensors(const_cast<Gradients&>(grads));
  auto m_list = named_tensors(state.m);
  auto v_list = named_tensors(state.v);
  if (p_list.size() != g_list.size() || p_list.size() != m_list.size() ||
      p_list.size() != v_list.size())
    throw std::runtime_error("adam_step: tensor tree shape mismatch");

  for (std::size_t k = 0; k < p_list.size(); ++k) {
    if (p_list[k].name != g_list[k].name)
      throw std::runtime_error("adam_step: tensor name mismatch at " +
                               p_list[k].name);
    if (mode == EmbeddingMode::Static && frozen_in_static(p_list[k].name))
      continue;
    Matrix& w = *p_list[k].tensor;
    const Matrix& g = *g_list[k].tensor;
    Matrix& m = *m_list[k].tensor;
    Matrix& v = *v_list[k].tensor;
    if (w.rows() != g.rows() || w.cols() != g.cols())
      throw std::runtime_error("adam_step: shape mismatch at " +
                               p_list[k].name);
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    Matrix update =
        (m / bc1).array() / ((v / bc2).array().sqrt() + config.epsilon);
    w -= config.lr * update.matrix();
    if (!w.allFinite())
      throw std::runtime_error("adam_step: non-finite update at " +
                               p_list[k].name);
  }
}

int apply_embedding_mode(Parameters& params, EmbeddingMode mode,
                         const CrossLingualInit* crosslingual, Rng rng) {
  const Index v = params.vocab_size;
  const Index d = params.config.dim;
  const double sigma = 1.0 / std::sqrt(static_cast<double>(d));

  Matrix gaussian(v, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < v; ++i) gaussian(i, j) = rng.gaussian(0.0, sigma);

  if (mode == EmbeddingMode::Random) {
    params.embedding = gaussian;
    return 0;
  }
  if (!crosslingual)
    throw std::runtime_error(
        "apply_embedding_mode: cross-lingual vectors required for mode " +
        std::string(to_string(mode)));
  if (crosslingual->vectors.cols() != d)
    throw std::runtime_error(
        "apply_embedding_mode: embedding dim " +
        std::to_string(crosslingual->vectors.cols()) +
        " does not match model dim " + std::to_string(d));
  if (crosslingual->vectors.rows() != v ||
      static_cast<Index>(crosslingual->covered.size()) != v)
    throw std::runtime_error(
        "apply_embedding_mode: cross-lingual table rows do not match "
        "vocabulary size");

  int missing = 0;
  params.embedding = gaussian;
  for (Index i = 0; i < v; ++i) {
    if (crosslingual->covered[static_cast<std::size_t>(i)])
      params.embedding.row(i) = crosslingual->vectors.row(i);
    else
      ++missing;
  }
  return missing;
}

}  // namespace unmt
