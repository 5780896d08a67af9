#include "unmt/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace unmt {

MassSample mass_mask(const IdSeq& seq, double word_mass, Rng& rng) {
  if (seq.empty()) throw std::runtime_error("mass_mask: empty sequence");
  if (word_mass <= 0.0 || word_mass > 1.0)
    throw std::runtime_error("mass_mask: word_mass outside (0,1]");
  const int len = static_cast<int>(seq.size());
  const int span_len = std::max(
      1, static_cast<int>(std::lround(word_mass * static_cast<double>(len))));
  const int start = static_cast<int>(
      rng.uniform_int(static_cast<std::uint64_t>(len - span_len + 1)));

  MassSample s;
  s.span_start = start;
  s.span_len = span_len;
  s.encoder_ids = seq;
  for (int i = start; i < start + span_len; ++i)
    s.encoder_ids[static_cast<std::size_t>(i)] = special::Mask;
  s.decoder_out_ids.assign(seq.begin() + start, seq.begin() + start + span_len);
  s.decoder_in_ids.push_back(special::Bos);
  s.decoder_in_ids.insert(s.decoder_in_ids.end(), s.decoder_out_ids.begin(),
                          s.decoder_out_ids.end() - 1);
  return s;
}

IdSeq dae_noise(const IdSeq& seq, const NoiseConfig& config, Rng& rng) {
  if (seq.empty()) throw std::runtime_error("dae_noise: empty sequence");
  if (config.shuffle_window < 0)
    throw std::runtime_error("dae_noise: negative shuffle window");
  if (config.drop_prob < 0.0 || config.drop_prob >= 1.0)
    throw std::runtime_error("dae_noise: drop_prob outside [0,1)");

  // Deletion, with the keep-one guarantee.
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < seq.size(); ++i)
    if (!rng.bernoulli(config.drop_prob)) survivors.push_back(i);
  if (survivors.empty())
    survivors.push_back(rng.uniform_int(seq.size()));

  // Local shuffle: stable sort on key i + u_i, u_i in [0, k+1).
  const double k = static_cast<double>(config.shuffle_window);
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(survivors.size());
  for (std::size_t i = 0; i < survivors.size(); ++i)
    keyed.emplace_back(static_cast<double>(i) + rng.uniform(0.0, k + 1.0),
                       survivors[i]);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  IdSeq out;
  out.reserve(keyed.size());
  for (const auto& [key, idx] : keyed) out.push_back(seq[idx]);
  return out;
}

BtBatchResult make_bt_batch(const Parameters& params,
                            const std::vector<IdSeq>& tgt_mono_batch,
                            Lang tgt_lang, const DecodeOptions& decode_opt) {
  BtBatchResult res;
  const Lang src_lang = other(tgt_lang);
  for (const IdSeq& gold : tgt_mono_batch) {
    TokenSequence gold_seq{gold, tgt_lang};
    TokenSequence synthetic =
        translate(params, gold_seq, src_lang, decode_opt);
    if (synthetic.ids.empty()) {
      res.dropped++;
      continue;
    }
    res.pairs.push_back(BtPair{std::move(synthetic), std::move(gold_seq)});
  }
  return res;
}

}  // namespace unmt
