#ifndef TSDICT_DICT_JOIN_HPP
#define TSDICT_DICT_JOIN_HPP

// Approximate similarity join against a dictionary, and its downstream
// consumers: discord ranking with certification, per-window anomaly labels
// and ROC AUC scoring.
//
// The join is the elementwise minimum of per-segment AB-joins, so it can
// only overestimate the exact join (a dictionary window set is a subset of
// the source window set) and never by more than the dictionary's e_max.
// That gap bound also powers discord certification: when the top discord
// leads the best non-overlapping runner-up by more than e_max, no hidden
// window can outrank it in the exact join, so the approximate top discord
// is provably the exact one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "tsdict/dictionary.hpp"
#include "tsdict/errors.hpp"
#include "tsdict/profiles.hpp"

namespace tsdict {

struct Discord {
  std::size_t start = 0;
  double score = 0.0;
  bool certified = false;
};

struct AnomalyReport {
  MatrixProfile scores; // the approximate join used as per-window score
  std::vector<Discord> discords;
  double e_max_used = 0.0;
};

// Approximate AB-join of A against the windows stored in the dictionary.
// Neighbor indices are reported in source-series coordinates.
inline MatrixProfile join_dictionary(const TimeSeries& A, const Dictionary& D, std::size_t m,
                                     unsigned threads = 0) {
  if (m != D.m) {
    throw error(errc::window_mismatch, "requested window length differs from the dictionary's");
  }
  return detail::dict_min_profile(A, D, m, threads);
}

// Greedy top-k discord extraction with non-overlap suppression: each pick
// suppresses indices within floor(m/2) of it. The rank-1 discord is
// certified when its lead over the best non-overlapping runner-up exceeds
// e_max; lower ranks are never certified.
inline std::vector<Discord> find_discords(const MatrixProfile& P, double e_max, std::size_t top_k) {
  if (P.values.empty()) throw error(errc::empty_profile, "profile has no entries");
  if (e_max < 0.0) throw error(errc::invalid_argument, "e_max must be non-negative");

  const std::size_t cnt = P.values.size();
  const std::size_t excl = P.m / 2;
  std::vector<unsigned char> suppressed(cnt, 0);

  auto next_peak = [&]() -> std::ptrdiff_t {
    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < cnt; ++i) {
      if (suppressed[i] || !std::isfinite(P.values[i])) continue;
      if (best < 0 || P.values[i] > P.values[static_cast<std::size_t>(best)]) {
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    return best;
  };

  std::vector<Discord> picks;
  const std::size_t want = std::max<std::size_t>(top_k, 2); // runner-up needed for the gap test
  while (picks.size() < want) {
    const std::ptrdiff_t at = next_peak();
    if (at < 0) break;
    const auto i = static_cast<std::size_t>(at);
    picks.push_back(Discord{i, P.values[i], false});
    const std::size_t lo = i >= excl ? i - excl : 0;
    const std::size_t hi = std::min(cnt, i + excl + 1);
    std::fill(suppressed.begin() + static_cast<std::ptrdiff_t>(lo),
              suppressed.begin() + static_cast<std::ptrdiff_t>(hi), static_cast<unsigned char>(1));
  }

  if (!picks.empty()) {
    // no non-overlapping runner-up at all certifies vacuously
    picks[0].certified = picks.size() < 2 || (picks[0].score - picks[1].score > e_max);
  }
  if (picks.size() > top_k) picks.resize(top_k);
  return picks;
}

inline AnomalyReport make_anomaly_report(MatrixProfile scores, double e_max, std::size_t top_k) {
  AnomalyReport rep;
  rep.discords = find_discords(scores, e_max, top_k);
  rep.scores = std::move(scores);
  rep.e_max_used = e_max;
  return rep;
}

// Per-window boolean labels from anomalous sample regions: a window is
// positive when it overlaps some (normalized) region by at least half the
// window length.
inline std::vector<unsigned char> window_labels(const std::vector<interval>& regions, std::size_t n,
                                                std::size_t m) {
  if (m < 2 || m > n) throw error(errc::invalid_argument, "window length out of range");
  for (const auto& r : regions) {
    if (r.first >= r.second || r.second > n) {
      throw error(errc::invalid_argument, "label region out of range");
    }
  }
  const std::vector<interval> merged = merge_intervals(regions);
  const std::size_t cnt = n - m + 1;
  std::vector<unsigned char> labels(cnt, 0);
  std::size_t r = 0;
  for (std::size_t i = 0; i < cnt; ++i) {
    while (r < merged.size() && merged[r].second <= i) ++r;
    for (std::size_t q = r; q < merged.size() && merged[q].first < i + m; ++q) {
      const std::size_t lo = std::max(i, merged[q].first);
      const std::size_t hi = std::min(i + m, merged[q].second);
      if (hi > lo && 2 * (hi - lo) >= m) {
        labels[i] = 1;
        break;
      }
    }
  }
  return labels;
}

// Exact Mann-Whitney AUC with ties counted as 1/2.
inline double auc_score(const std::vector<double>& scores, const std::vector<unsigned char>& labels) {
  if (scores.size() != labels.size()) {
    throw error(errc::length_mismatch, "scores and labels differ in length");
  }
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::isnan(scores[i])) throw error(errc::invalid_argument, "scores must not contain NaN");
    if (labels[i]) ++pos; else ++neg;
  }
  if (pos == 0 || neg == 0) {
    throw error(errc::degenerate_labels, "AUC needs at least one positive and one negative label");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double wins = 0.0;
  std::size_t neg_below = 0;
  std::size_t at = 0;
  while (at < order.size()) {
    std::size_t end = at;
    std::size_t group_pos = 0, group_neg = 0;
    while (end < order.size() && scores[order[end]] == scores[order[at]]) {
      if (labels[order[end]]) ++group_pos; else ++group_neg;
      ++end;
    }
    wins += static_cast<double>(group_pos) *
            (static_cast<double>(neg_below) + 0.5 * static_cast<double>(group_neg));
    neg_below += group_neg;
    at = end;
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

} // namespace tsdict

#endif // TSDICT_DICT_JOIN_HPP
