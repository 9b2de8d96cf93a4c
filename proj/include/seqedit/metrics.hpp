#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "seqedit/errors.hpp"

namespace seqedit {

// Metric-side tokenization: lowercased whitespace tokens. Punctuation is
// not split here; corpus ingestion controls tokenization upstream.
inline std::vector<std::string> metric_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace detail {

using NgramCounts = std::map<std::string, double>;

inline NgramCounts ngram_counts(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) key += '\x1f' + tokens[i + k];
    counts[key] += 1.0;
  }
  return counts;
}

inline double total(const NgramCounts& c) {
  double s = 0.0;
  for (const auto& [k, v] : c) s += v;
  return s;
}

inline NgramCounts intersect(const NgramCounts& a, const NgramCounts& b) {
  NgramCounts out;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end()) {
      double m = std::min(v, it->second);
      if (m > 0.0) out[k] = m;
    }
  }
  return out;
}

inline NgramCounts subtract(const NgramCounts& a, const NgramCounts& b) {
  NgramCounts out;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    double d = v - (it == b.end() ? 0.0 : it->second);
    if (d > 0.0) out[k] = d;
  }
  return out;
}

struct Prf {
  double precision, recall, f1;
};

// Vacuous-set convention: both sides empty scores 1; one side empty
// scores 0 on the affected component.
inline Prf match_scores(const NgramCounts& predicted, const NgramCounts& gold) {
  const double np = total(predicted), ng = total(gold);
  if (np == 0.0 && ng == 0.0) return {1.0, 1.0, 1.0};
  const double matched = total(intersect(predicted, gold));
  const double p = np > 0.0 ? matched / np : 0.0;
  const double r = ng > 0.0 ? matched / ng : 0.0;
  const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

}  // namespace detail

struct SariScore {
  double keep_f1 = 0.0;
  double add_f1 = 0.0;
  double del_p = 0.0;
  double combined = 0.0;
};

// SARI over n-gram orders 1..n_max. Per order:
//   keep: F1 of (src "&" hyp) against (src "&" refs), reference-frequency
//         weighted on the gold side;
//   add:  F1 of (hyp - src) against (refs - src);
//   del:  precision of (src - hyp) against (src - refs).
// Components are averaged over orders, then combined as their mean.
inline SariScore sari(const std::string& src, const std::string& hyp,
                      const std::vector<std::string>& refs, int n_max = 4) {
  if (refs.empty()) throw usage_error("sari requires at least one reference");
  const auto s_tok = metric_tokens(src);
  const auto h_tok = metric_tokens(hyp);
  std::vector<std::vector<std::string>> r_tok;
  r_tok.reserve(refs.size());
  for (const auto& r : refs) r_tok.push_back(metric_tokens(r));

  const double nref = static_cast<double>(refs.size());
  SariScore out;
  for (int n = 1; n <= n_max; ++n) {
    const auto s = detail::ngram_counts(s_tok, n);
    const auto h = detail::ngram_counts(h_tok, n);

    detail::NgramCounts gold_keep, gold_add, gold_del;
    for (const auto& toks : r_tok) {
      const auto r = detail::ngram_counts(toks, n);
      for (const auto& [k, v] : detail::intersect(s, r)) gold_keep[k] += v / nref;
      for (const auto& [k, v] : detail::subtract(r, s)) gold_add[k] += v / nref;
      for (const auto& [k, v] : detail::subtract(s, r)) gold_del[k] += v / nref;
    }

    out.keep_f1 += detail::match_scores(detail::intersect(s, h), gold_keep).f1;
    out.add_f1 += detail::match_scores(detail::subtract(h, s), gold_add).f1;
    out.del_p += detail::match_scores(detail::subtract(s, h), gold_del).precision;
  }
  out.keep_f1 /= n_max;
  out.add_f1 /= n_max;
  out.del_p /= n_max;
  out.combined = (out.keep_f1 + out.add_f1 + out.del_p) / 3.0;
  return out;
}

// Automated Readability Index:
//   4.71 * chars/words + 0.5 * words/sentences - 21.43
// chars counts alphanumerics, words are whitespace tokens, sentences are
// terminal-punctuation segments with a floor of 1.
inline double ari(const std::string& text) {
  const auto words = metric_tokens(text);
  if (words.empty()) throw undefined_metric_error("ari requires at least one word");
  std::int64_t chars = 0;
  for (char c : text)
    if (std::isalnum(static_cast<unsigned char>(c))) ++chars;

  auto terminal = [](char c) { return c == '.' || c == '!' || c == '?'; };
  std::int64_t sentences = 0;
  bool in_run = false, tail = false;
  for (char c : text) {
    if (terminal(c)) {
      if (!in_run) ++sentences;
      in_run = true;
      tail = false;
    } else {
      in_run = false;
      if (!std::isspace(static_cast<unsigned char>(c))) tail = true;
    }
  }
  if (tail || sentences == 0) ++sentences;

  const double w = static_cast<double>(words.size());
  return 4.71 * static_cast<double>(chars) / w + 0.5 * w / static_cast<double>(sentences) - 21.43;
}

// Fraction of pairs whose ARI grades differ by at most 1 (inclusive).
inline double ari_accuracy(const std::vector<std::string>& sys,
                           const std::vector<std::string>& ref) {
  if (sys.size() != ref.size()) throw usage_error("ari_accuracy requires equal-length corpora");
  if (sys.empty()) throw usage_error("ari_accuracy requires a non-empty corpus");
  std::int64_t hits = 0;
  for (std::size_t i = 0; i < sys.size(); ++i)
    if (std::abs(ari(sys[i]) - ari(ref[i])) <= 1.0) ++hits;
  return static_cast<double>(hits) / static_cast<double>(sys.size());
}

// Pearson correlation coefficient.
inline double pcc(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw usage_error("pcc requires equal-length vectors");
  if (x.size() < 2) throw usage_error("pcc requires at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw undefined_metric_error("pcc undefined for zero variance");
  return sxy / std::sqrt(sxx * syy);
}

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool empty_hypothesis = false;
};

namespace detail {

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t prev = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = prev;
    }
  }
  return row[b.size()];
}

}  // namespace detail

// LCS-based ROUGE-L; the instance score is the arithmetic mean over the
// references. An empty hypothesis scores 0 and is flagged.
inline RougeL rouge_l(const std::string& hyp, const std::vector<std::string>& refs) {
  if (refs.empty()) throw usage_error("rouge_l requires at least one reference");
  const auto h = metric_tokens(hyp);
  RougeL out;
  if (h.empty()) {
    out.empty_hypothesis = true;
    return out;
  }
  for (const auto& ref : refs) {
    const auto r = metric_tokens(ref);
    const double lcs = static_cast<double>(detail::lcs_length(h, r));
    const double p = lcs / static_cast<double>(h.size());
    const double rec = r.empty() ? 0.0 : lcs / static_cast<double>(r.size());
    out.precision += p;
    out.recall += rec;
    out.f1 += (p + rec) > 0.0 ? 2.0 * p * rec / (p + rec) : 0.0;
  }
  const double n = static_cast<double>(refs.size());
  out.precision /= n;
  out.recall /= n;
  out.f1 /= n;
  return out;
}

// Per-instance rows plus corpus aggregates for the evaluate command.
struct InstanceScores {
  SariScore sari;
  RougeL rouge;
  double ari_sys = 0.0;
  double ari_ref = 0.0;  // mean over references
};

struct CorpusScores {
  std::vector<InstanceScores> instances;
  SariScore sari;  // means over instances
  RougeL rouge;
  double pcc = std::numeric_limits<double>::quiet_NaN();
  double ari_acc = 0.0;
};

inline CorpusScores evaluate_corpus(const std::vector<std::string>& srcs,
                                    const std::vector<std::string>& hyps,
                                    const std::vector<std::vector<std::string>>& refs) {
  if (srcs.size() != hyps.size() || srcs.size() != refs.size())
    throw usage_error("evaluate requires aligned src/hyp/ref corpora");
  if (srcs.empty()) throw usage_error("evaluate requires a non-empty corpus");

  CorpusScores out;
  std::vector<double> sys_ari, ref_ari;
  std::int64_t ari_hits = 0;
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    InstanceScores row;
    row.sari = sari(srcs[i], hyps[i], refs[i]);
    row.rouge = rouge_l(hyps[i], refs[i]);
    const bool hyp_empty = row.rouge.empty_hypothesis;
    row.ari_sys = hyp_empty ? std::numeric_limits<double>::quiet_NaN() : ari(hyps[i]);
    // grade metrics skip wordless texts; an instance with an empty
    // hypothesis or only empty references counts as an accuracy miss
    // and is excluded from the correlation
    double ra = 0.0;
    int graded_refs = 0;
    bool within = false;
    for (const auto& r : refs[i]) {
      if (metric_tokens(r).empty()) continue;
      const double g = ari(r);
      ra += g;
      ++graded_refs;
      if (!hyp_empty && std::abs(row.ari_sys - g) <= 1.0) within = true;
    }
    row.ari_ref = graded_refs > 0 ? ra / static_cast<double>(graded_refs)
                                  : std::numeric_limits<double>::quiet_NaN();
    ari_hits += within ? 1 : 0;
    if (!hyp_empty && graded_refs > 0) {
      sys_ari.push_back(row.ari_sys);
      ref_ari.push_back(row.ari_ref);
    }

    out.sari.keep_f1 += row.sari.keep_f1;
    out.sari.add_f1 += row.sari.add_f1;
    out.sari.del_p += row.sari.del_p;
    out.sari.combined += row.sari.combined;
    out.rouge.precision += row.rouge.precision;
    out.rouge.recall += row.rouge.recall;
    out.rouge.f1 += row.rouge.f1;
    out.instances.push_back(std::move(row));
  }
  const double n = static_cast<double>(srcs.size());
  out.sari.keep_f1 /= n;
  out.sari.add_f1 /= n;
  out.sari.del_p /= n;
  out.sari.combined /= n;
  out.rouge.precision /= n;
  out.rouge.recall /= n;
  out.rouge.f1 /= n;
  out.ari_acc = static_cast<double>(ari_hits) / n;
  try {
    out.pcc = pcc(sys_ari, ref_ari);
  } catch (const undefined_metric_error&) {
    // left as NaN; a constant-grade corpus has no defined correlation
  } catch (const usage_error&) {
  }
  return out;
}

}  // namespace seqedit
