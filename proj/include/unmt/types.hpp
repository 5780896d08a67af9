#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace unmt {

// All numeric work runs in double precision; desk-scale models are small
// enough that the extra width is free and it keeps the finite-difference
// and perplexity tolerances honest.
using Real = double;

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatX<Real>;
using Vector = VecX<Real>;
using Index = Eigen::Index;

using TokenId = std::int32_t;
using IdSeq = std::vector<TokenId>;

// Language slot of a sentence or batch side. Two-language setting throughout.
enum class Lang : std::uint8_t { Src = 0, Tgt = 1 };

inline Lang other(Lang l) { return l == Lang::Src ? Lang::Tgt : Lang::Src; }
inline const char* lang_name(Lang l) { return l == Lang::Src ? "src" : "tgt"; }

struct TokenSequence {
  IdSeq ids;
  Lang language = Lang::Src;
};

// Reserved token ids, fixed across every vocabulary.
namespace special {
inline constexpr TokenId Pad = 0;
inline constexpr TokenId Unk = 1;
inline constexpr TokenId Bos = 2;
inline constexpr TokenId Eos = 3;
inline constexpr TokenId Mask = 4;
inline constexpr TokenId LangSrc = 5;
inline constexpr TokenId LangTgt = 6;
inline constexpr TokenId Count = 7;

inline TokenId lang_token(Lang l) { return l == Lang::Src ? LangSrc : LangTgt; }
}  // namespace special

}  // namespace unmt
