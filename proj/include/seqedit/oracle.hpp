#pragma once

#include <string>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

// Expert (oracle) action derivation and action application. The oracle
// decomposes the transformation y_in -> y_star into a reposition that
// keeps a matched subsequence of the target, followed by an insertion
// that fills in everything the reposition could not supply. Composing
// the two actions reconstructs y_star exactly, for any pair.

// Expert reposition: scan the target left to right and, for each target
// token, claim the leftmost not-yet-used input position holding exactly
// that token. Target positions with no available match are skipped (the
// insertion oracle supplies them later). The m matched input indices are
// emitted 1-based in target order as slots 1..m; the remaining slots are
// 0 (deleted). Each input index is used at most once.
inline RepositionAction expert_reposition(const TokenSeq& y_in, const TokenSeq& y_star) {
  RepositionAction action;
  action.slots.assign(y_in.size(), 0);
  std::vector<bool> used(y_in.size(), false);
  std::size_t out = 0;
  for (TokenId want : y_star) {
    for (std::size_t i = 0; i < y_in.size(); ++i) {
      if (!used[i] && y_in[i] == want) {
        used[i] = true;
        action.slots[out++] = static_cast<std::int32_t>(i + 1);
        break;
      }
    }
  }
  return action;
}

// Keeps exactly the nonzero slots, in slot order. Index duplication is
// legal for model-predicted actions.
inline TokenSeq apply_reposition(const TokenSeq& y_in, const RepositionAction& r) {
  TokenSeq out;
  out.reserve(r.slots.size());
  for (std::int32_t slot : r.slots) {
    if (slot == 0) continue;
    if (slot < 0 || static_cast<std::size_t>(slot) > y_in.size())
      throw malformed_action_error("reposition slot " + std::to_string(slot) +
                                   " out of range for input of length " +
                                   std::to_string(y_in.size()));
    out.push_back(y_in[static_cast<std::size_t>(slot - 1)]);
  }
  return out;
}

// Expert insertion: z must be a subsequence of y_star (always true when
// z came from expert_reposition against y_star). Uses the leftmost
// embedding of z into y_star; gap g receives the target tokens strictly
// between matched positions g-1 and g, boundaries included.
inline InsertionAction expert_insertion(const TokenSeq& z, const TokenSeq& y_star) {
  InsertionAction ins;
  ins.placeholder_counts.assign(z.size() + 1, 0);
  std::size_t zi = 0;
  for (TokenId t : y_star) {
    if (zi < z.size() && z[zi] == t) {
      ++zi;
    } else {
      ++ins.placeholder_counts[zi];
      ins.tokens.push_back(t);
    }
  }
  if (zi != z.size())
    throw oracle_precondition_error("sequence is not a subsequence of the target");
  return ins;
}

inline TokenSeq apply_insertion(const TokenSeq& z, const InsertionAction& ins) {
  if (ins.placeholder_counts.size() != z.size() + 1)
    throw malformed_action_error("insertion has " + std::to_string(ins.placeholder_counts.size()) +
                                 " gaps for a sequence of length " + std::to_string(z.size()));
  std::int64_t total = 0;
  for (std::int32_t c : ins.placeholder_counts) {
    if (c < 0) throw malformed_action_error("negative placeholder count");
    total += c;
  }
  if (total != static_cast<std::int64_t>(ins.tokens.size()))
    throw malformed_action_error("insertion token payload does not match placeholder counts");
  for (TokenId t : ins.tokens)
    if (t == kPlhId) throw malformed_action_error("placeholder token in insertion payload");

  TokenSeq out;
  out.reserve(z.size() + ins.tokens.size());
  std::size_t next = 0;
  for (std::size_t g = 0; g <= z.size(); ++g) {
    for (std::int32_t k = 0; k < ins.placeholder_counts[g]; ++k) out.push_back(ins.tokens[next++]);
    if (g < z.size()) out.push_back(z[g]);
  }
  return out;
}

// Full oracle step: apply(y_in, oracle_action(y_in, y_star)) == y_star.
inline EditAction oracle_action(const TokenSeq& y_in, const TokenSeq& y_star) {
  EditAction action;
  action.reposition = expert_reposition(y_in, y_star);
  const TokenSeq z = apply_reposition(y_in, action.reposition);
  action.insertion = expert_insertion(z, y_star);
  return action;
}

inline TokenSeq apply_action(const TokenSeq& y_in, const EditAction& action) {
  return apply_insertion(apply_reposition(y_in, action.reposition), action.insertion);
}

}  // namespace seqedit
