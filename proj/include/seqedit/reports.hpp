#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seqedit/corpus.hpp"
#include "seqedit/errors.hpp"
#include "seqedit/levenshtein.hpp"
#include "seqedit/noise.hpp"
#include "seqedit/oracle.hpp"
#include "seqedit/refine.hpp"
#include "seqedit/rollin.hpp"

namespace seqedit {

// Per-sample oracle edit-operation histograms: insertions are inserted
// token counts, deletions are zero slots. One observation per sample in
// every context, so each histogram's mass equals the corpus size.
struct EditOpProfile {
  std::string context;
  std::map<std::int64_t, std::int64_t> insertions;
  std::map<std::int64_t, std::int64_t> deletions;

  std::int64_t mass() const {
    std::int64_t m = 0;
    for (const auto& [k, v] : insertions) m += v;
    return m;
  }
};

// Oracle labels observed on roll-in states: deletions from the
// reposition labels, insertions from the insertion labels.
inline EditOpProfile profile_rollin_ops(const Corpus& corpus, const PolicyModel* model,
                                        const RollInConfig& cfg, std::uint64_t seed) {
  EditOpProfile profile;
  profile.context = std::string("rollin:") + to_string(cfg.strategy);
  Rng rng = make_rng(seed, 0x0F);
  for (const auto& sample : corpus.samples) {
    const RollInSample r = make_rollin(sample, model, cfg, rng);
    ++profile.deletions[count_deleted_slots(r.rps_labels)];
    ++profile.insertions[count_inserted_tokens(r.ins_labels)];
  }
  return profile;
}

// Oracle operations still required from the states the decoder actually
// visits: for each sample, the zero-slot and inserted-token counts of
// the oracle action toward the reference are computed for every state
// the model acted on (the initial sequence and each subsequent
// iteration input) and reduced to their per-sample maximum. The maximum
// is the outstanding edit burden encountered during refinement; unlike
// a sum it does not scale with the number of iterations a slow sample
// takes, so one observation per sample remains comparable with the
// roll-in histograms.
inline EditOpProfile profile_inference_ops(const Corpus& corpus, const PolicyModel& model,
                                           const RefineConfig& cfg = {}) {
  EditOpProfile profile;
  profile.context = "inference";
  for (const auto& sample : corpus.samples) {
    RefineConfig traced = cfg;
    traced.record_trace = true;
    const RefineResult res = refine(model, sample.source, sample.tgt_level, traced);
    std::int64_t del = 0, ins = 0;
    // trace holds y^0..y^K; the decoder acted on all but the last.
    for (std::size_t i = 0; i + 1 < res.trace.size(); ++i) {
      const EditAction oracle = oracle_action(res.trace[i], sample.target());
      del = std::max<std::int64_t>(del, count_deleted_slots(oracle.reposition));
      ins = std::max<std::int64_t>(ins, count_inserted_tokens(oracle.insertion));
    }
    ++profile.deletions[del];
    ++profile.insertions[ins];
  }
  return profile;
}

inline EditOpProfile profile_edit_ops(const Corpus& corpus, const PolicyModel* model,
                                      const std::string& context, const RollInConfig& rollin_cfg,
                                      const RefineConfig& refine_cfg, std::uint64_t seed) {
  if (context == "inference") {
    if (!model) throw usage_error("inference profiling requires a model");
    return profile_inference_ops(corpus, *model, refine_cfg);
  }
  if (context.rfind("rollin:", 0) == 0) {
    RollInConfig cfg = rollin_cfg;
    cfg.strategy = rollin_strategy_from_string(context.substr(7));
    return profile_rollin_ops(corpus, model, cfg, seed);
  }
  throw usage_error("unknown profile context: " + context);
}

namespace detail {

inline double tv_one(const std::map<std::int64_t, std::int64_t>& a,
                     const std::map<std::int64_t, std::int64_t>& b) {
  double ma = 0.0, mb = 0.0;
  for (const auto& [k, v] : a) ma += static_cast<double>(v);
  for (const auto& [k, v] : b) mb += static_cast<double>(v);
  if (ma == 0.0 || mb == 0.0) return 0.0;
  std::map<std::int64_t, double> diff;
  for (const auto& [k, v] : a) diff[k] += static_cast<double>(v) / ma;
  for (const auto& [k, v] : b) diff[k] -= static_cast<double>(v) / mb;
  double tv = 0.0;
  for (const auto& [k, v] : diff) tv += std::abs(v);
  return tv / 2.0;
}

}  // namespace detail

// Mean of the per-operation-type total-variation distances between the
// normalized histograms.
inline double tv_distance(const EditOpProfile& a, const EditOpProfile& b) {
  return 0.5 * (detail::tv_one(a.insertions, b.insertions) +
                detail::tv_one(a.deletions, b.deletions));
}

// context <tab> op <tab> count <tab> frequency
inline void write_profile_tsv(std::ostream& out, const EditOpProfile& profile) {
  out << "context\top\tcount\tfrequency\n";
  const double mass = static_cast<double>(std::max<std::int64_t>(1, profile.mass()));
  for (const auto& [count, freq] : profile.insertions)
    out << profile.context << "\tins\t" << count << '\t'
        << static_cast<double>(freq) / mass << '\n';
  for (const auto& [count, freq] : profile.deletions)
    out << profile.context << "\tdel\t" << count << '\t'
        << static_cast<double>(freq) / mass << '\n';
}

// Paired edit distances before and after noising the source, one row
// per sample.
struct NoiseShiftRow {
  std::int64_t d_clean = 0;
  std::int64_t d_noised = 0;
};

inline std::vector<NoiseShiftRow> report_noise_shift(const Corpus& corpus,
                                                     const NoiseConfig& cfg,
                                                     std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x25);
  std::vector<NoiseShiftRow> rows;
  rows.reserve(corpus.samples.size());
  for (const auto& sample : corpus.samples) {
    NoiseShiftRow row;
    row.d_clean = levenshtein_distance(sample.source, sample.target());
    row.d_noised = levenshtein_distance(noise(sample.source, cfg, rng), sample.target());
    rows.push_back(row);
  }
  return rows;
}

// Rows plus quantile summary lines (commented) for plotting.
inline void write_noise_shift_tsv(std::ostream& out, const std::vector<NoiseShiftRow>& rows) {
  out << "d_clean\td_noised\n";
  for (const auto& r : rows) out << r.d_clean << '\t' << r.d_noised << '\n';
  if (rows.empty()) return;
  auto quantiles = [&](auto get) {
    std::vector<std::int64_t> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(get(r));
    std::sort(v.begin(), v.end());
    auto q = [&](double p) { return v[static_cast<std::size_t>(p * (v.size() - 1))]; };
    return std::array<std::int64_t, 5>{v.front(), q(0.25), q(0.5), q(0.75), v.back()};
  };
  const auto qc = quantiles([](const NoiseShiftRow& r) { return r.d_clean; });
  const auto qn = quantiles([](const NoiseShiftRow& r) { return r.d_noised; });
  out << "# quantiles(min,q25,median,q75,max) d_clean";
  for (auto v : qc) out << ' ' << v;
  out << "\n# quantiles(min,q25,median,q75,max) d_noised";
  for (auto v : qn) out << ' ' << v;
  out << '\n';
}

}  // namespace seqedit
