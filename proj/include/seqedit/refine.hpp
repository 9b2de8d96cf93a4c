#pragma once

#include <optional>
#include <vector>

#include "seqedit/errors.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/policy.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

struct RefineConfig {
  std::int32_t max_iters = 10;
  bool record_trace = false;

  void validate() const {
    if (max_iters < 1) throw config_error("max_iters must be >= 1");
  }
};

struct RefineResult {
  TokenSeq output;
  std::int32_t iterations_used = 0;
  std::int64_t token_edits = 0;  // zero slots + inserted tokens, summed over iterations
  std::vector<TokenSeq> trace;   // y^0 followed by each iteration output, when recorded
};

// Iterative inference: starting from the input sequence, apply greedy
// reposition-then-insertion steps until two consecutive iterations
// return the same output, or max_iters is reached. The confirming
// change-free iteration counts toward iterations_used, so a fixpoint
// costs at least 2 iterations; 1 is possible only when max_iters == 1.
inline RefineResult refine(const PolicyModel& model, const TokenSeq& source,
                           std::optional<int> level = {}, const RefineConfig& cfg = {}) {
  cfg.validate();
  RefineResult res;
  TokenSeq state = source;
  if (cfg.record_trace) res.trace.push_back(state);
  for (std::int32_t k = 1; k <= cfg.max_iters; ++k) {
    const EditAction action = model.greedy_decode(state, level);
    TokenSeq out;
    try {
      out = apply_action(state, action);
    } catch (const malformed_action_error& e) {
      throw error(std::string("internal error: greedy decode produced an inapplicable action: ") +
                  e.what());
    }
    res.iterations_used = k;
    res.token_edits += count_deleted_slots(action.reposition);
    res.token_edits += count_inserted_tokens(action.insertion);
    if (cfg.record_trace) res.trace.push_back(out);
    if (k >= 2 && out == state) {  // two consecutive iterations agree
      state = std::move(out);
      break;
    }
    state = std::move(out);
  }
  res.output = std::move(state);
  return res;
}

}  // namespace seqedit
