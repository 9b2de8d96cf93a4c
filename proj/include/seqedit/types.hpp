#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace seqedit {

using TokenId = std::int32_t;

// Content token sequence. Boundary sentinels are implicit: every
// operation in this library acts on content tokens only, and the empty
// sequence is a legal state.
using TokenSeq = std::vector<TokenId>;

// Reserved vocabulary slots. Level tags, when configured, follow
// directly after these; content tokens come last.
inline constexpr TokenId kBosId = 0;
inline constexpr TokenId kEosId = 1;
inline constexpr TokenId kPlhId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr TokenId kNumFixedReserved = 4;

// Where a sequence sits inside one refinement iteration. Placeholder
// tokens may appear only in the post_placeholder phase.
enum class Phase { pre_reposition, post_reposition, post_placeholder };

struct EditState {
  TokenSeq ids;
  Phase phase = Phase::pre_reposition;
};

// One value per output slot. A value j > 0 places the input token at
// 1-based index j into the slot; 0 marks the slot deleted/empty.
// Applying the action keeps exactly the nonzero slots, in slot order.
struct RepositionAction {
  std::vector<std::int32_t> slots;
};

// Gap-indexed insertion: placeholder_counts has one entry per gap of
// the post-reposition sequence (length + 1, both boundaries included),
// and tokens holds one realized token per placeholder, left to right.
struct InsertionAction {
  std::vector<std::int32_t> placeholder_counts;
  TokenSeq tokens;
};

// One full refinement step: reposition, then insertion. The insertion's
// gap count must match the post-reposition length + 1.
struct EditAction {
  RepositionAction reposition;
  InsertionAction insertion;
};

inline bool contains_placeholder(const TokenSeq& ids) {
  return std::find(ids.begin(), ids.end(), kPlhId) != ids.end();
}

inline std::int32_t count_kept_slots(const RepositionAction& r) {
  std::int32_t n = 0;
  for (auto s : r.slots) n += (s != 0);
  return n;
}

inline std::int32_t count_deleted_slots(const RepositionAction& r) {
  return static_cast<std::int32_t>(r.slots.size()) - count_kept_slots(r);
}

inline std::int32_t count_inserted_tokens(const InsertionAction& ins) {
  return static_cast<std::int32_t>(ins.tokens.size());
}

}  // namespace seqedit
