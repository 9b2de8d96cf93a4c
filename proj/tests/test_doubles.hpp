#pragma once

// Scripted policy doubles shared by the refinement and report tests.

#include <map>

#include "seqedit/corpus.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/policy.hpp"

namespace seqedit::testing {

// Base double with flat zero scores of the correct shapes, so the
// dual-path roll-in branches work (and decode to full deletion).
class ScriptedPolicy : public PolicyModel {
public:
  HeadScores forward(const EditState& state, std::optional<int>) const override {
    HeadScores s;
    s.slot.assign(state.ids.size(), std::vector<double>(state.ids.size() + 1, 0.0));
    s.gap.assign(state.ids.size() + 1, std::vector<double>(9, 0.0));
    for (TokenId t : state.ids)
      if (t == kPlhId) s.token.emplace_back(64, 0.0);
    return s;
  }
  std::int32_t max_placeholders() const override { return 8; }
  bool can_generate(TokenId id) const override { return id >= 4; }
};

// Replays the oracle toward the target registered for a known state;
// unknown states act as their own target (identity). Registering a
// corpus maps each source to its primary reference, and each reference
// to itself so that reached targets are fixpoints.
class LookupOraclePolicy final : public ScriptedPolicy {
public:
  explicit LookupOraclePolicy(const Corpus& corpus) {
    for (const auto& s : corpus.samples) {
      targets_.emplace(s.source, s.target());
      targets_.emplace(s.target(), s.target());
    }
  }

  EditAction greedy_decode(const TokenSeq& state, std::optional<int>) const override {
    const auto it = targets_.find(state);
    return oracle_action(state, it == targets_.end() ? state : it->second);
  }

private:
  std::map<TokenSeq, TokenSeq> targets_;
};

}  // namespace seqedit::testing
