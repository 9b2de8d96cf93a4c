#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

// Stochastic corruption used by every roll-in strategy: per-token word
// drop followed by a bounded shuffle.
struct NoiseConfig {
  double drop_prob = 0.5;
  std::int32_t shuffle_k = 3;
  std::uint64_t seed = 0;

  void validate() const {
    if (drop_prob < 0.0 || drop_prob > 1.0) throw config_error("drop_prob must be in [0,1]");
    if (shuffle_k < 0) throw config_error("shuffle_k must be >= 0");
  }
};

// Each token is removed independently with probability drop_prob;
// survivors keep their relative order.
inline TokenSeq word_drop(const TokenSeq& x, double drop_prob, Rng& rng) {
  TokenSeq out;
  out.reserve(x.size());
  for (TokenId t : x)
    if (rand_unit(rng) >= drop_prob) out.push_back(t);
  return out;
}

// Adds an independent uniform offset in [0, k] to each index and stably
// sorts by the offset index. This bounds every token's displacement by
// k: a token more than k positions earlier can never overtake it, and
// one more than k later can never precede it.
inline TokenSeq word_shuffle(const TokenSeq& x, std::int32_t k, Rng& rng) {
  if (k <= 0 || x.size() < 2) return x;
  std::vector<double> key(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    key[i] = static_cast<double>(i) + rand_real(rng, static_cast<double>(k));
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  TokenSeq out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[order[i]];
  return out;
}

// Drop, then shuffle (inner-to-outer application order).
inline TokenSeq noise(const TokenSeq& x, const NoiseConfig& cfg, Rng& rng) {
  return word_shuffle(word_drop(x, cfg.drop_prob, rng), cfg.shuffle_k, rng);
}

}  // namespace seqedit
