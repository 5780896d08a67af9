#pragma once

#include "unmt/types.hpp"

#include <cmath>

namespace unmt {

// Numerically safe row-wise softmax, in place.
template <class Derived>
void softmax_rows_inplace(Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  for (Index i = 0; i < m.rows(); ++i) {
    Scalar mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

// Gradient of row-wise softmax: given probabilities A and upstream dA,
// returns dScores with ds = (da - <da, a>) .* a per row.
template <class DA, class DB>
MatX<typename DA::Scalar> softmax_rows_backward(
    const Eigen::MatrixBase<DA>& probs, const Eigen::MatrixBase<DB>& dprobs) {
  MatX<typename DA::Scalar> out(probs.rows(), probs.cols());
  for (Index i = 0; i < probs.rows(); ++i) {
    auto a = probs.row(i).array();
    auto da = dprobs.row(i).array();
    typename DA::Scalar dot = (da * a).sum();
    out.row(i) = ((da - dot) * a).matrix();
  }
  return out;
}

// Exact GELU and its derivative, elementwise over any Eigen expression.
template <class Derived>
MatX<typename Derived::Scalar> gelu(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) {
    return Scalar(0.5) * v * (Scalar(1) + std::erf(v / std::sqrt(Scalar(2))));
  });
}

template <class Derived>
MatX<typename Derived::Scalar> gelu_grad(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  constexpr double inv_sqrt_2pi = 0.3989422804014327;
  return x.unaryExpr([](Scalar v) {
    Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(v / std::sqrt(Scalar(2))));
    return cdf + v * Scalar(inv_sqrt_2pi) * std::exp(Scalar(-0.5) * v * v);
  });
}

// Interleaved sinusoidal positional encodings: pe(p, 2i) = sin(p / 10000^(2i/d)),
// pe(p, 2i+1) = cos(same). Row 0 is [0, 1, 0, 1, ...].
template <class Scalar = Real>
MatX<Scalar> sinusoidal_positional_encoding(Index max_len, Index dim) {
  MatX<Scalar> pe(max_len, dim);
  for (Index p = 0; p < max_len; ++p) {
    for (Index i = 0; i < dim; i += 2) {
      Scalar rate = std::pow(Scalar(10000), Scalar(i) / Scalar(dim));
      Scalar angle = Scalar(p) / rate;
      pe(p, i) = std::sin(angle);
      if (i + 1 < dim) pe(p, i + 1) = std::cos(angle);
    }
  }
  return pe;
}

// Row-normalizes to unit length; throws on a zero row via the callback.
template <class Derived, class OnZero>
void normalize_rows_inplace(Eigen::MatrixBase<Derived>& m, OnZero&& on_zero) {
  for (Index i = 0; i < m.rows(); ++i) {
    typename Derived::Scalar n = m.row(i).norm();
    if (n == 0) {
      on_zero(i);
      continue;
    }
    m.row(i) /= n;
  }
}

}  // namespace unmt
