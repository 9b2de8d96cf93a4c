#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "seqedit/corpus.hpp"
#include "seqedit/errors.hpp"
#include "seqedit/levenshtein.hpp"
#include "seqedit/rng.hpp"

namespace seqedit {

enum class Criterion { edit_distance, length_ratio, level_difference, random, none };

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::edit_distance: return "edit-distance";
    case Criterion::length_ratio: return "length-ratio";
    case Criterion::level_difference: return "level-difference";
    case Criterion::random: return "random";
    case Criterion::none: return "none";
  }
  return "?";
}

inline Criterion criterion_from_string(const std::string& s) {
  if (s == "edit-distance" || s == "edit_distance") return Criterion::edit_distance;
  if (s == "length-ratio" || s == "length_ratio") return Criterion::length_ratio;
  if (s == "level-difference" || s == "level_difference") return Criterion::level_difference;
  if (s == "random") return Criterion::random;
  if (s == "none") return Criterion::none;
  throw usage_error("unknown curriculum criterion: " + s);
}

// Raw difficulty of one sample under the chosen ranking criterion.
// length_ratio folds to |1 - |y*|/|y^s|| so both compression and
// expansion count as difficulty; random draws from the provided stream.
inline double difficulty(const TrainingSample& sample, Criterion criterion, Rng* rng = nullptr) {
  switch (criterion) {
    case Criterion::edit_distance:
      return static_cast<double>(levenshtein_distance(sample.source, sample.target()));
    case Criterion::length_ratio: {
      const double ns = static_cast<double>(sample.source.size());
      const double nt = static_cast<double>(sample.target().size());
      if (ns == 0.0) return nt;  // pure expansion from an empty source
      return std::abs(1.0 - nt / ns);
    }
    case Criterion::level_difference:
      if (!sample.src_level || !sample.tgt_level)
        throw config_error("level-difference criterion requires src_level and tgt_level");
      return std::abs(static_cast<double>(*sample.src_level - *sample.tgt_level));
    case Criterion::random:
      if (!rng) throw config_error("random criterion requires a seeded stream");
      return rand_unit(*rng);
    case Criterion::none: return 0.0;
  }
  throw config_error("unknown criterion");
}

// Empirical CDF: score_i = |{j : d_j <= d_i}| / M. Ties share the upper
// rank, so identical difficulties enter the pool together.
inline std::vector<double> cdf_scores(const std::vector<double>& difficulties) {
  if (difficulties.empty()) throw config_error("cdf of an empty dataset");
  const auto m = static_cast<double>(difficulties.size());
  std::vector<double> sorted = difficulties;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(difficulties.size());
  for (std::size_t i = 0; i < difficulties.size(); ++i) {
    const auto upper = std::upper_bound(sorted.begin(), sorted.end(), difficulties[i]);
    out[i] = static_cast<double>(upper - sorted.begin()) / m;
  }
  return out;
}

// c_sqrt(t) = min(1, sqrt(t * (1 - c0^2) / lambda + c0^2)).
inline double competence(std::int64_t t, double c0, std::int64_t lambda) {
  if (lambda <= 0) throw config_error("curriculum length must be positive");
  if (t < 0) throw config_error("negative training step");
  const double v = static_cast<double>(t) * (1.0 - c0 * c0) / static_cast<double>(lambda) +
                   c0 * c0;
  return std::min(1.0, std::sqrt(v));
}

class CurriculumSchedule {
public:
  // criterion none yields an always-full pool.
  static CurriculumSchedule build(const Corpus& corpus, Criterion criterion, double c0 = 0.1,
                                  std::int64_t lambda = 5000, std::uint64_t seed = 1) {
    if (corpus.samples.empty()) throw config_error("curriculum over an empty dataset");
    if (lambda <= 0) throw config_error("curriculum length must be positive");
    CurriculumSchedule s;
    s.criterion_ = criterion;
    s.c0_ = c0;
    s.lambda_ = lambda;
    Rng rng = make_rng(seed, 0xCD);
    s.difficulty_.reserve(corpus.samples.size());
    for (const auto& sample : corpus.samples)
      s.difficulty_.push_back(difficulty(sample, criterion, &rng));
    s.cdf_ = cdf_scores(s.difficulty_);
    s.order_.resize(s.cdf_.size());
    std::iota(s.order_.begin(), s.order_.end(), std::size_t{0});
    std::stable_sort(s.order_.begin(), s.order_.end(),
                     [&](std::size_t a, std::size_t b) { return s.cdf_[a] < s.cdf_[b]; });
    s.sorted_cdf_.reserve(s.order_.size());
    for (std::size_t i : s.order_) s.sorted_cdf_.push_back(s.cdf_[i]);
    return s;
  }

  Criterion criterion() const { return criterion_; }
  double c0() const { return c0_; }
  std::int64_t lambda() const { return lambda_; }
  const std::vector<double>& difficulties() const { return difficulty_; }
  const std::vector<double>& cdf() const { return cdf_; }
  std::size_t size() const { return cdf_.size(); }

  double competence_at(std::int64_t t) const {
    return criterion_ == Criterion::none ? 1.0 : competence(t, c0_, lambda_);
  }

  // Number of eligible samples at step t: the prefix of the cdf-sorted
  // order with cdf <= c(t). An empty pool falls back to the easiest tie
  // class (possible when c0 undercuts the smallest CDF value).
  std::size_t pool_size(std::int64_t t, bool* fell_back = nullptr) const {
    if (fell_back) *fell_back = false;
    const double c = competence_at(t);
    auto end = std::upper_bound(sorted_cdf_.begin(), sorted_cdf_.end(), c);
    std::size_t n = static_cast<std::size_t>(end - sorted_cdf_.begin());
    if (n == 0) {
      if (fell_back) *fell_back = true;
      const double easiest = sorted_cdf_.front();
      n = static_cast<std::size_t>(
          std::upper_bound(sorted_cdf_.begin(), sorted_cdf_.end(), easiest) -
          sorted_cdf_.begin());
    }
    return n;
  }

  // The eligible sample indices at step t, ascending.
  std::vector<std::size_t> select_pool(std::int64_t t, bool* fell_back = nullptr) const {
    const std::size_t n = pool_size(t, fell_back);
    std::vector<std::size_t> ids(order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Index into the corpus of the i-th easiest sample; i < pool_size(t)
  // draws uniformly over the step-t pool.
  std::size_t nth_easiest(std::size_t i) const { return order_[i]; }

  // sample_id <tab> raw_difficulty <tab> cdf
  void dump_tsv(std::ostream& out, const Corpus& corpus) const {
    out << "sample_id\traw_difficulty\tcdf\n";
    for (std::size_t i = 0; i < cdf_.size(); ++i)
      out << corpus.samples[i].uid << '\t' << difficulty_[i] << '\t' << cdf_[i] << '\n';
  }

private:
  Criterion criterion_ = Criterion::none;
  double c0_ = 0.1;
  std::int64_t lambda_ = 5000;
  std::vector<double> difficulty_;
  std::vector<double> cdf_;
  std::vector<std::size_t> order_;      // sample indices sorted by cdf
  std::vector<double> sorted_cdf_;
};

}  // namespace seqedit
