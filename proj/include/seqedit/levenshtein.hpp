#pragma once

#include <cstdint>
#include <vector>

#include "seqedit/types.hpp"

namespace seqedit {

// Token-level edit distance, unit cost for insertion, deletion and
// substitution. Single-row DP, O(|a|*|b|) time, O(|b|) space.
inline std::int64_t levenshtein_distance(const TokenSeq& a, const TokenSeq& b) {
  const std::size_t n = b.size();
  std::vector<std::int64_t> row(n + 1);
  for (std::size_t j = 0; j <= n; ++j) row[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::int64_t diag = row[0];
    row[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      const std::int64_t prev = row[j];
      std::int64_t best = diag + (a[i - 1] != b[j - 1]);
      if (row[j] + 1 < best) best = row[j] + 1;
      if (row[j - 1] + 1 < best) best = row[j - 1] + 1;
      row[j] = best;
      diag = prev;
    }
  }
  return row[n];
}

}  // namespace seqedit
