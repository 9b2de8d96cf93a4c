#pragma once

#include <optional>
#include <string>
#include <vector>

#include "seqedit/corpus.hpp"
#include "seqedit/errors.hpp"
#include "seqedit/noise.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/policy.hpp"
#include "seqedit/rng.hpp"
#include "seqedit/types.hpp"

namespace seqedit {

enum class RollInStrategy { from_reference, from_input, editing };

inline const char* to_string(RollInStrategy s) {
  switch (s) {
    case RollInStrategy::from_reference: return "from-reference";
    case RollInStrategy::from_input: return "from-input";
    case RollInStrategy::editing: return "editing";
  }
  return "?";
}

inline RollInStrategy rollin_strategy_from_string(const std::string& s) {
  if (s == "from-reference" || s == "from_reference") return RollInStrategy::from_reference;
  if (s == "from-input" || s == "from_input") return RollInStrategy::from_input;
  if (s == "editing") return RollInStrategy::editing;
  throw usage_error("unknown roll-in strategy: " + s);
}

struct RollInConfig {
  RollInStrategy strategy = RollInStrategy::editing;
  double alpha = 0.5;  // mixture probability for the insertion path
  double beta = 0.5;   // mixture probability for the reposition path
  NoiseConfig noise;

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
      throw config_error("alpha and beta must be in [0,1]");
    noise.validate();
  }
};

// Training states and labels for one sample. The labels are the oracle
// actions from each state to the reference, so applying rps_labels to
// rps_state yields a subsequence of the reference, and applying
// ins_labels to ins_state reconstructs the reference exactly; ins_state
// is always the expert-repositioned image of the raw insertion roll-in
// state, which is what the insertion head sees at inference as well.
struct RollInSample {
  EditState rps_state;
  RepositionAction rps_labels;
  EditState ins_state;
  InsertionAction ins_labels;
  std::optional<int> level;
  std::string provenance;
};

using RollInBatch = std::vector<RollInSample>;

namespace detail {

inline void attach_labels(RollInSample& out, const TokenSeq& raw_ins_state,
                          const TokenSeq& y_star) {
  out.rps_labels = expert_reposition(out.rps_state.ids, y_star);
  const RepositionAction r = expert_reposition(raw_ins_state, y_star);
  out.ins_state = {apply_reposition(raw_ins_state, r), Phase::post_reposition};
  out.ins_labels = expert_insertion(out.ins_state.ids, y_star);
}

// Model's greedy reposition applied to y'; empty results fall back to y'.
inline TokenSeq model_repositioned(const PolicyModel& model, const TokenSeq& y_prime,
                                   std::optional<int> level) {
  const HeadScores scores = model.forward({y_prime, Phase::pre_reposition}, level);
  RepositionAction r;
  r.slots.reserve(y_prime.size());
  for (const auto& row : scores.slot)
    r.slots.push_back(static_cast<std::int32_t>(argmax_low(row)));
  TokenSeq out = apply_reposition(y_prime, r);
  return out.empty() ? y_prime : out;
}

// Oracle placeholders on the expert-repositioned y', realized with the
// model's token head; empty results fall back to y'.
inline TokenSeq model_filled(const PolicyModel& model, const TokenSeq& y_prime,
                             const TokenSeq& y_star, std::optional<int> level) {
  const TokenSeq z = apply_reposition(y_prime, expert_reposition(y_prime, y_star));
  const InsertionAction oracle_ins = expert_insertion(z, y_star);

  TokenSeq expanded;
  for (std::size_t g = 0; g <= z.size(); ++g) {
    for (std::int32_t k = 0; k < oracle_ins.placeholder_counts[g]; ++k)
      expanded.push_back(kPlhId);
    if (g < z.size()) expanded.push_back(z[g]);
  }

  InsertionAction filled;
  filled.placeholder_counts = oracle_ins.placeholder_counts;
  if (contains_placeholder(expanded)) {
    const HeadScores scores = model.forward({expanded, Phase::post_placeholder}, level);
    for (const auto& row : scores.token)
      filled.tokens.push_back(pick_generable(model, row));
  }
  TokenSeq out = apply_insertion(z, filled);
  return out.empty() ? y_prime : out;
}

inline RollInSample dual_path(const TrainingSample& sample, const PolicyModel& model,
                              const RollInConfig& cfg, Rng& rng, const TokenSeq& base,
                              const char* tag) {
  const TokenSeq& y_star = sample.target();
  const TokenSeq y_prime = noise(base, cfg.noise, rng);

  RollInSample out;
  out.level = sample.tgt_level;
  const bool ins_noised = rand_unit(rng) < cfg.alpha;
  const bool rps_noised = rand_unit(rng) < cfg.beta;
  const TokenSeq raw_ins =
      ins_noised ? y_prime : model_repositioned(model, y_prime, out.level);
  out.rps_state = {rps_noised ? y_prime : model_filled(model, y_prime, y_star, out.level),
                   Phase::pre_reposition};
  attach_labels(out, raw_ins, y_star);
  out.provenance = std::string(tag) + "[ins=" + (ins_noised ? "noised" : "model") +
                   ",rps=" + (rps_noised ? "noised" : "model") + "]";
  return out;
}

}  // namespace detail

// Expert roll-in aligned with inference: both heads train on states
// derived from the noised original input.
inline RollInSample rollin_editing(const TrainingSample& sample, const RollInConfig& cfg,
                                   Rng& rng) {
  RollInSample out;
  out.level = sample.tgt_level;
  out.rps_state = {noise(sample.source, cfg.noise, rng), Phase::pre_reposition};
  detail::attach_labels(out, out.rps_state.ids, sample.target());
  out.provenance = "editing";
  return out;
}

// Dual-path roll-in seeded from the noised reference.
inline RollInSample rollin_from_reference(const TrainingSample& sample, const PolicyModel& model,
                                          const RollInConfig& cfg, Rng& rng) {
  return detail::dual_path(sample, model, cfg, rng, sample.target(), "from-reference");
}

// Dual-path roll-in seeded from the noised input instead.
inline RollInSample rollin_from_input(const TrainingSample& sample, const PolicyModel& model,
                                      const RollInConfig& cfg, Rng& rng) {
  return detail::dual_path(sample, model, cfg, rng, sample.source, "from-input");
}

inline RollInSample make_rollin(const TrainingSample& sample, const PolicyModel* model,
                                const RollInConfig& cfg, Rng& rng) {
  switch (cfg.strategy) {
    case RollInStrategy::editing: return rollin_editing(sample, cfg, rng);
    case RollInStrategy::from_reference:
      if (!model) throw config_error("from-reference roll-in requires a model");
      return rollin_from_reference(sample, *model, cfg, rng);
    case RollInStrategy::from_input:
      if (!model) throw config_error("from-input roll-in requires a model");
      return rollin_from_input(sample, *model, cfg, rng);
  }
  throw config_error("unknown roll-in strategy");
}

}  // namespace seqedit
