#pragma once

// Longest common subsequence over interned symbol sequences.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pd::detail {

using Symbols = std::vector<std::uint32_t>;
using Matches = std::vector<std::pair<std::size_t, std::size_t>>;

inline constexpr std::size_t kMaxLcsCells = std::size_t{1} << 26;

struct NoWeight {
  std::uint32_t operator()(std::size_t, std::size_t) const { return 0; }
};

// Matched index pairs of a longest common subsequence of a[ab..ae) and
// b[bb..be). Among longest ones, the pairs with the largest total
// `weight(i, j)` (at most 2 per pair) win; remaining ties prefer consuming `a`
// first, so removals come before insertions in a change region.
template <typename Weight = NoWeight>
Matches lcs_matches(const Symbols& a, std::size_t ab, std::size_t ae, const Symbols& b, std::size_t bb,
                    std::size_t be, const Weight& weight = {}) {
  Matches out;
  while (ab < ae && bb < be && a[ab] == b[bb]) out.emplace_back(ab++, bb++);
  Matches tail;
  while (ab < ae && bb < be && a[ae - 1] == b[be - 1]) tail.emplace_back(--ae, --be);

  const std::size_t n = ae - ab;
  const std::size_t m = be - bb;
  if (n > 0 && m > 0) {
    if ((n + 1) * (m + 1) > kMaxLcsCells) throw std::length_error("region too large for LCS");
    // score = matches * unit + weights; unit exceeds any weight total.
    const auto unit = static_cast<std::uint32_t>(2 * std::min(n, m) + 1);
    const std::size_t w = m + 1;
    std::vector<std::uint32_t> score((n + 1) * w, 0);
    auto pair_score = [&](std::size_t i, std::size_t j) { return unit + weight(ab + i, bb + j); };
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = m; j-- > 0;) {
        std::uint32_t best = std::max(score[(i + 1) * w + j], score[i * w + j + 1]);
        if (a[ab + i] == b[bb + j]) best = std::max(best, score[(i + 1) * w + j + 1] + pair_score(i, j));
        score[i * w + j] = best;
      }
    }
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n && j < m) {
      if (a[ab + i] == b[bb + j] && score[i * w + j] == score[(i + 1) * w + j + 1] + pair_score(i, j)) {
        out.emplace_back(ab + i, bb + j);
        ++i;
        ++j;
      } else if (score[(i + 1) * w + j] >= score[i * w + j + 1]) {
        ++i;
      } else {
        ++j;
      }
    }
  }
  out.insert(out.end(), tail.rbegin(), tail.rend());
  return out;
}

// Length only, linear memory.
inline std::size_t lcs_length(const Symbols& a, const Symbols& b) {
  std::size_t ab = 0, ae = a.size(), bb = 0, be = b.size(), common = 0;
  while (ab < ae && bb < be && a[ab] == b[bb]) ++ab, ++bb, ++common;
  while (ab < ae && bb < be && a[ae - 1] == b[be - 1]) --ae, --be, ++common;
  const std::size_t m = be - bb;
  std::vector<std::uint32_t> prev(m + 1, 0), cur(m + 1, 0);
  for (std::size_t i = ab; i < ae; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      cur[j + 1] = a[i] == b[bb + j] ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
    }
    std::swap(prev, cur);
  }
  return common + prev[m];
}

}  // namespace pd::detail
