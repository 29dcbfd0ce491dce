#ifndef TSDICT_TESTS_ORACLES_HPP
#define TSDICT_TESTS_ORACLES_HPP

// Independent reference implementations used as test oracles. These are
// deliberately written along different code paths than the library: plain
// z-normalize-then-Euclidean in long double instead of correlation
// algebra, double loops instead of streaming kernels, pair enumeration
// instead of rank statistics. Slow on purpose.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "tsdict/profiles.hpp"
#include "tsdict/series.hpp"

namespace oracle {

struct window_stats {
  std::vector<long double> mean;
  std::vector<long double> sd;
  std::vector<bool> flat;
};

// direct per-window two-pass moments; the flat rule mirrors the library's
// documented relative threshold on the series-wide magnitude
inline window_stats stats_of(const std::vector<double>& v, std::size_t m) {
  const std::size_t cnt = v.size() - m + 1;
  double max_abs = 0.0;
  for (double x : v) max_abs = std::max(max_abs, std::fabs(x));
  const long double eps = tsdict::constancy_threshold(max_abs);
  window_stats ws;
  ws.mean.resize(cnt);
  ws.sd.resize(cnt);
  ws.flat.resize(cnt);
  for (std::size_t i = 0; i < cnt; ++i) {
    long double s = 0.0L;
    for (std::size_t t = 0; t < m; ++t) s += v[i + t];
    const long double mu = s / static_cast<long double>(m);
    long double q = 0.0L;
    for (std::size_t t = 0; t < m; ++t) {
      const long double d = v[i + t] - mu;
      q += d * d;
    }
    ws.mean[i] = mu;
    ws.sd[i] = std::sqrt(q / static_cast<long double>(m));
    ws.flat[i] = ws.sd[i] < eps;
  }
  return ws;
}

// distance between window i of a and window j of b given precomputed
// moments: explicitly z-normalize both windows, then plain Euclidean
inline double pair_dist(const std::vector<double>& a, std::size_t i, const window_stats& wa,
                        const std::vector<double>& b, std::size_t j, const window_stats& wb, std::size_t m) {
  const long double cap = 2.0L * std::sqrt(static_cast<long double>(m));
  if (wa.flat[i] && wb.flat[j]) return 0.0;
  if (wa.flat[i] || wb.flat[j]) return std::sqrt(2.0 * static_cast<double>(m));
  long double acc = 0.0L;
  for (std::size_t t = 0; t < m; ++t) {
    const long double za = (a[i + t] - wa.mean[i]) / wa.sd[i];
    const long double zb = (b[j + t] - wb.mean[j]) / wb.sd[j];
    const long double d = za - zb;
    acc += d * d;
  }
  long double d = std::sqrt(acc);
  if (d > cap) d = cap;
  return static_cast<double>(d);
}

// one-shot variant for ad-hoc window pairs
inline double znorm_dist(const std::vector<double>& a, const std::vector<double>& b) {
  window_stats wa = stats_of(a, a.size());
  window_stats wb = stats_of(b, b.size());
  return pair_dist(a, 0, wa, b, 0, wb, a.size());
}

// O(n*m) distance profile of query q against every window of t
inline std::vector<double> distance_profile(const std::vector<double>& t, const std::vector<double>& q) {
  const std::size_t m = q.size();
  const window_stats wt = stats_of(t, m);
  const window_stats wq = stats_of(q, m);
  std::vector<double> out(t.size() - m + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pair_dist(t, i, wt, q, 0, wq, m);
  return out;
}

// O(n^2 m) self-join with the same exclusion and tie rules as the library:
// neighbors within floor(m/2) of the query are inadmissible, ties go to
// the lowest index (iteration order plus strict less-than)
inline tsdict::MatrixProfile self_join_brute(const std::vector<double>& t, std::size_t m) {
  const window_stats ws = stats_of(t, m);
  const std::size_t cnt = t.size() - m + 1;
  const std::size_t excl = m / 2;
  tsdict::MatrixProfile P;
  P.kind = tsdict::join_kind::self;
  P.m = m;
  P.values.assign(cnt, std::numeric_limits<double>::infinity());
  P.indices.assign(cnt, tsdict::MatrixProfile::no_neighbor);
  for (std::size_t i = 0; i < cnt; ++i) {
    for (std::size_t j = 0; j < cnt; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= excl) continue;
      const double d = pair_dist(t, i, ws, t, j, ws, m);
      if (d < P.values[i]) {
        P.values[i] = d;
        P.indices[i] = static_cast<std::int64_t>(j);
      }
    }
  }
  return P;
}

inline tsdict::MatrixProfile ab_join_brute(const std::vector<double>& a, const std::vector<double>& b,
                                           std::size_t m) {
  const window_stats wa = stats_of(a, m);
  const window_stats wb = stats_of(b, m);
  const std::size_t ca = a.size() - m + 1;
  const std::size_t cb = b.size() - m + 1;
  tsdict::MatrixProfile P;
  P.kind = tsdict::join_kind::ab;
  P.m = m;
  P.values.assign(ca, std::numeric_limits<double>::infinity());
  P.indices.assign(ca, tsdict::MatrixProfile::no_neighbor);
  for (std::size_t i = 0; i < ca; ++i) {
    for (std::size_t j = 0; j < cb; ++j) {
      const double d = pair_dist(a, i, wa, b, j, wb, m);
      if (d < P.values[i]) {
        P.values[i] = d;
        P.indices[i] = static_cast<std::int64_t>(j);
      }
    }
  }
  return P;
}

// AUC by explicit enumeration of positive/negative pairs: wins count 1,
// ties count 1/2
inline double auc_pairs(const std::vector<double>& scores, const std::vector<unsigned char>& labels) {
  long double wins = 0.0L;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++pos;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) {
        wins += 1.0L;
      } else if (scores[i] == scores[j]) {
        wins += 0.5L;
      }
    }
  }
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (!labels[j]) ++neg;
  }
  return static_cast<double>(wins / (static_cast<long double>(pos) * static_cast<long double>(neg)));
}

} // namespace oracle

#endif // TSDICT_TESTS_ORACLES_HPP
