#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

// Raw (finite) head scores for one state.
//   slot[k][j]  : score for placing input token j (1-based; j=0 deletes)
//                 at output slot k; shape [L][L+1].
//   gap[g][c]   : score for inserting c placeholders at gap g; shape
//                 [L+1][k_max+1].
//   token[p][v] : score for realizing vocabulary token v at the p-th
//                 placeholder position, rows in left-to-right order of
//                 the <plh> tokens in the state.
struct HeadScores {
  std::vector<std::vector<double>> slot;
  std::vector<std::vector<double>> gap;
  std::vector<std::vector<double>> token;
};

namespace detail {

// Argmax with ties broken toward the lowest index.
inline std::size_t argmax_low(const std::vector<double>& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] > row[best]) best = i;
  return best;
}

}  // namespace detail

class PolicyModel;

namespace detail {
inline TokenId pick_generable(const PolicyModel& model, const std::vector<double>& row);
}

// Behavior contract for a learnable editing policy: score the three
// heads for any state, and greedily decode a structurally valid action.
class PolicyModel {
public:
  virtual ~PolicyModel() = default;

  virtual HeadScores forward(const EditState& state, std::optional<int> level = {}) const = 0;

  // Largest placeholder count one gap may receive.
  virtual std::int32_t max_placeholders() const = 0;

  // Longest state the model can score; decoded insertions never grow a
  // state past this, so iterative refinement stays scoreable.
  virtual std::int32_t max_state_length() const {
    return std::numeric_limits<std::int32_t>::max();
  }

  // Whether the token head may realize this id.
  virtual bool can_generate(TokenId id) const = 0;

  // Staged greedy decode: argmax reposition on the input state, argmax
  // placeholder counts on the repositioned state (clamped to the
  // remaining length budget), then argmax tokens (restricted to
  // generable ids) on the placeholder-expanded state. The result is
  // always applicable via apply_action.
  virtual EditAction greedy_decode(const TokenSeq& state, std::optional<int> level = {}) const {
    EditAction action;
    const HeadScores rps_scores = forward({state, Phase::pre_reposition}, level);
    action.reposition.slots.reserve(state.size());
    for (const auto& row : rps_scores.slot)
      action.reposition.slots.push_back(static_cast<std::int32_t>(detail::argmax_low(row)));

    const TokenSeq z = apply_reposition(state, action.reposition);
    const HeadScores gap_scores = forward({z, Phase::post_reposition}, level);
    action.insertion.placeholder_counts.reserve(z.size() + 1);
    std::int64_t budget = std::max<std::int64_t>(
        0, max_state_length() - static_cast<std::int64_t>(z.size()));
    TokenSeq expanded;
    for (std::size_t g = 0; g <= z.size(); ++g) {
      auto c = static_cast<std::int32_t>(detail::argmax_low(gap_scores.gap[g]));
      c = static_cast<std::int32_t>(std::min<std::int64_t>(c, budget));
      budget -= c;
      action.insertion.placeholder_counts.push_back(c);
      for (std::int32_t k = 0; k < c; ++k) expanded.push_back(kPlhId);
      if (g < z.size()) expanded.push_back(z[g]);
    }
    if (contains_placeholder(expanded)) {
      const HeadScores tok_scores = forward({expanded, Phase::post_placeholder}, level);
      for (const auto& row : tok_scores.token)
        action.insertion.tokens.push_back(detail::pick_generable(*this, row));
    }
    return action;
  }
};

namespace detail {

// Argmax over the ids the model may realize, lowest index on ties.
inline TokenId pick_generable(const PolicyModel& model, const std::vector<double>& row) {
  std::int64_t best = -1;
  for (std::size_t v = 0; v < row.size(); ++v) {
    if (!model.can_generate(static_cast<TokenId>(v))) continue;
    if (best < 0 || row[v] > row[static_cast<std::size_t>(best)])
      best = static_cast<std::int64_t>(v);
  }
  return best < 0 ? kUnkId : static_cast<TokenId>(best);
}

}  // namespace detail

}  // namespace seqedit
