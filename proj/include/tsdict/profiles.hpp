#ifndef TSDICT_PROFILES_HPP
#define TSDICT_PROFILES_HPP

// Distance profiles (naive oracle and FFT-accelerated) and exact matrix
// profiles (self-join with trivial-match exclusion, AB-join).
//
// The join kernels stream z-normalized correlations along diagonals of the
// pairwise window matrix:
//   cov(t, t+d) = cov(t-1, t+d-1) + df[t]*dg[t+d] + df[t+d]*dg[t]
// with df[t] = (T[t+m-1] - T[t-1]) / 2 and
//      dg[t] = (T[t+m-1] - mean[t]) + (T[t-1] - mean[t-1]),
// so each pair costs O(1) after an O(m) dot product at the head of its
// diagonal. Correlations are reduced per window with the lexicographic rule
// (higher correlation wins; ties go to the lower neighbor index), which is
// associative and commutative, so splitting whole diagonals across threads
// and merging thread-local accumulators afterwards is bit-identical to the
// sequential run for any thread count.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "tsdict/errors.hpp"
#include "tsdict/series.hpp"

namespace tsdict {

struct DistanceProfile {
  std::vector<double> values;
  std::optional<std::size_t> query_origin;
  std::size_t m = 0;
};

enum class join_kind { self, ab };

struct MatrixProfile {
  static constexpr std::int64_t no_neighbor = -1;

  std::vector<double> values;
  std::vector<std::int64_t> indices;
  join_kind kind = join_kind::self;
  std::size_t m = 0;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw != 0 ? hw : 1;
}

namespace detail {

// (correlation, neighbor) accumulator per window; -2 sits below any real
// correlation, so sentinels never survive a merge against a candidate.
struct corr_acc {
  std::vector<double> corr;
  std::vector<std::int64_t> nn;

  explicit corr_acc(std::size_t cells) : corr(cells, -2.0), nn(cells, MatrixProfile::no_neighbor) {}
};

inline void acc_update(corr_acc& a, std::size_t cell, double c, std::int64_t neighbor) {
  double& cur = a.corr[cell];
  std::int64_t& cur_nn = a.nn[cell];
  if (c > cur || (c == cur && neighbor < cur_nn)) {
    cur = c;
    cur_nn = neighbor;
  }
}

inline void acc_merge(corr_acc& into, const corr_acc& from) {
  for (std::size_t i = 0; i < into.corr.size(); ++i) {
    if (from.nn[i] != MatrixProfile::no_neighbor) {
      acc_update(into, i, from.corr[i], from.nn[i]);
    }
  }
}

// df/dg differentials with a zero first entry so the diagonal recurrence
// needs no special first-step handling.
inline void make_diffs(const std::vector<double>& v, const SubseqStats& st, std::vector<double>& df,
                       std::vector<double>& dg) {
  const std::size_t cnt = st.count();
  const std::size_t m = st.m;
  df.assign(cnt, 0.0);
  dg.assign(cnt, 0.0);
  for (std::size_t t = 1; t < cnt; ++t) {
    df[t] = 0.5 * (v[t + m - 1] - v[t - 1]);
    dg[t] = (v[t + m - 1] - st.means[t]) + (v[t - 1] - st.means[t - 1]);
  }
}

inline double window_dot(const std::vector<double>& a, std::size_t ia, double mu_a, const std::vector<double>& b,
                         std::size_t ib, double mu_b, std::size_t m) {
  double acc = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    acc += (a[ia + s] - mu_a) * (b[ib + s] - mu_b);
  }
  return acc;
}

inline double clamp_corr(double c) {
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

// Runs worker(diagonal_index, acc) over [0, ndiag) with whole diagonals
// pinned to threads, then merges into a single accumulator.
template <class Worker>
corr_acc run_diagonals(std::size_t cells, std::size_t ndiag, unsigned threads, Worker worker) {
  unsigned tcount = resolve_threads(threads);
  if (ndiag > 0 && static_cast<std::size_t>(tcount) > ndiag) tcount = static_cast<unsigned>(ndiag);
  if (tcount <= 1) {
    corr_acc acc(cells);
    for (std::size_t d = 0; d < ndiag; ++d) worker(d, acc);
    return acc;
  }
  std::vector<corr_acc> accs;
  accs.reserve(tcount);
  for (unsigned t = 0; t < tcount; ++t) accs.emplace_back(cells);
  std::vector<std::thread> pool;
  pool.reserve(tcount);
  for (unsigned t = 0; t < tcount; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t d = t; d < ndiag; d += tcount) worker(d, accs[t]);
    });
  }
  for (auto& th : pool) th.join();
  for (unsigned t = 1; t < tcount; ++t) acc_merge(accs[0], accs[t]);
  return std::move(accs[0]);
}

inline MatrixProfile finish_profile(const corr_acc& acc, std::size_t m, join_kind kind) {
  MatrixProfile mp;
  mp.kind = kind;
  mp.m = m;
  mp.values.resize(acc.corr.size());
  mp.indices.resize(acc.corr.size());
  for (std::size_t i = 0; i < acc.corr.size(); ++i) {
    if (acc.nn[i] == MatrixProfile::no_neighbor) {
      mp.values[i] = std::numeric_limits<double>::infinity();
      mp.indices[i] = MatrixProfile::no_neighbor;
    } else {
      mp.values[i] = corr_to_dist(acc.corr[i], m);
      mp.indices[i] = acc.nn[i];
    }
  }
  return mp;
}

} // namespace detail

// Brute-force distance profile: one direct z-normalized distance per window.
// O(n*m); the oracle the FFT path is checked against.
inline DistanceProfile distance_profile_naive(const TimeSeries& T, std::span<const double> Q,
                                              const SubseqStats& stats,
                                              std::optional<std::size_t> query_origin = {}) {
  if (Q.size() != stats.m) {
    throw error(errc::length_mismatch, "query length does not match stats window length");
  }
  if (stats.count() != T.n() - stats.m + 1) {
    throw error(errc::length_mismatch, "stats were computed for a different series length");
  }
  DistanceProfile dp;
  dp.m = stats.m;
  dp.query_origin = query_origin;
  dp.values.resize(stats.count());
  for (std::size_t i = 0; i < stats.count(); ++i) {
    dp.values[i] = znorm_distance(Q, std::span<const double>(T.values.data() + i, stats.m));
  }
  return dp;
}

// FFT-accelerated distance profile. Sliding dot products of the demeaned
// query against the series are taken from one circular convolution, then
// renormalized through the precomputed window stats. O(n log n).
inline DistanceProfile distance_profile_mass(const TimeSeries& T, std::span<const double> Q,
                                             const SubseqStats& stats,
                                             std::optional<std::size_t> query_origin = {}) {
  const std::size_t m = stats.m;
  if (Q.size() != m) {
    throw error(errc::length_mismatch, "query length does not match stats window length");
  }
  if (stats.count() != T.n() - m + 1) {
    throw error(errc::length_mismatch, "stats were computed for a different series length");
  }
  const std::size_t n = T.n();
  const std::size_t cnt = stats.count();
  const double md = static_cast<double>(m);

  DistanceProfile dp;
  dp.m = m;
  dp.query_origin = query_origin;
  dp.values.resize(cnt);

  // query stats, two-pass
  double max_abs = 0.0;
  detail::kahan_sum qsum;
  for (double x : Q) {
    if (!std::isfinite(x)) throw error(errc::non_finite_input, "query contains a non-finite sample");
    qsum.add(x);
    max_abs = std::max(max_abs, std::fabs(x));
  }
  const double mu_q = qsum.sum / md;
  detail::kahan_sum qvar;
  for (double x : Q) qvar.add((x - mu_q) * (x - mu_q));
  const double sd_q = std::sqrt(std::max(0.0, qvar.sum / md));

  if (sd_q < constancy_threshold(max_abs)) {
    // constant query: distance is 0 to constant windows, sqrt(2m) otherwise
    const double far = std::sqrt(2.0 * md);
    for (std::size_t i = 0; i < cnt; ++i) {
      dp.values[i] = stats.constant_mask[i] ? 0.0 : far;
    }
    return dp;
  }
  const double invn_q = 1.0 / (sd_q * std::sqrt(md));

  // sliding dots via one circular convolution at the next power of two
  std::size_t len = 1;
  while (len < n) len <<= 1;
  std::vector<double> a(len, 0.0), b(len, 0.0);
  std::copy(T.values.begin(), T.values.end(), a.begin());
  for (std::size_t t = 0; t < m; ++t) b[t] = Q[m - 1 - t] - mu_q;

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> fa, fb;
  fft.fwd(fa, a);
  fft.fwd(fb, b);
  for (std::size_t i = 0; i < len; ++i) fa[i] *= fb[i];
  std::vector<double> conv;
  fft.inv(conv, fa);

  const double far = std::sqrt(2.0 * md);
  for (std::size_t i = 0; i < cnt; ++i) {
    if (stats.constant_mask[i]) {
      dp.values[i] = far;
      continue;
    }
    const double qt = conv[i + m - 1];
    dp.values[i] = corr_to_dist(qt * stats.invn[i] * invn_q, m);
  }
  // FFT round-off near correlation 1 inflates to ~1e-5 distances through
  // sqrt(2m(1-rho)); the origin entry has a definitionally exact value, so
  // compute it directly
  if (query_origin && *query_origin < cnt && !stats.constant_mask[*query_origin]) {
    dp.values[*query_origin] =
        znorm_distance(Q, std::span<const double>(T.values.data() + *query_origin, m));
  }
  return dp;
}

// Exact self-join matrix profile. values[i] = min over j with
// |i-j| > floor(m/2) of the z-normalized distance between windows i and j;
// ties go to the lowest j. Windows with no admissible neighbor (possible
// only at the n = 2m boundary) carry the sentinel index and +inf.
inline MatrixProfile self_join(const TimeSeries& T, std::size_t m, unsigned threads = 0) {
  const std::size_t n = T.n();
  if (m >= 2 && n < 2 * m) {
    throw error(errc::series_too_short, "self-join needs n >= 2m");
  }
  const SubseqStats st = compute_stats(T, m);
  const std::size_t cnt = st.count();
  const std::size_t excl = m / 2;

  std::vector<double> df, dg;
  detail::make_diffs(T.values, st, df, dg);
  const auto& v = T.values;
  const auto& cm = st.constant_mask;
  const auto& invn = st.invn;

  // diagonal d pairs windows (t, t+d); d runs over excl+1 .. cnt-1
  const std::size_t ndiag = cnt - excl - 1;
  auto worker = [&](std::size_t di, detail::corr_acc& acc) {
    const std::size_t d = excl + 1 + di;
    double cov = detail::window_dot(v, 0, st.means[0], v, d, st.means[d], m);
    const std::size_t len = cnt - d;
    for (std::size_t t = 0; t < len; ++t) {
      if (t != 0) cov += df[t] * dg[t + d] + df[t + d] * dg[t];
      double c = cov * invn[t] * invn[t + d];
      if (cm[t] && cm[t + d]) {
        c = 1.0;
      } else {
        c = detail::clamp_corr(c);
      }
      detail::acc_update(acc, t, c, static_cast<std::int64_t>(t + d));
      detail::acc_update(acc, t + d, c, static_cast<std::int64_t>(t));
    }
  };
  detail::corr_acc acc = detail::run_diagonals(cnt, ndiag, threads, worker);
  return detail::finish_profile(acc, m, join_kind::self);
}

// Exact AB-join matrix profile: values[i] = min over all windows j of B of
// the z-normalized distance from A's window i. No exclusion zone; ties go
// to the lowest j.
inline MatrixProfile ab_join(const TimeSeries& A, const TimeSeries& B, std::size_t m, unsigned threads = 0) {
  if (m >= 2 && (A.n() < m || B.n() < m)) {
    throw error(errc::series_too_short, "ab-join needs both series at least m long");
  }
  const SubseqStats sa = compute_stats(A, m);
  const SubseqStats sb = compute_stats(B, m);
  const std::size_t ca = sa.count();
  const std::size_t cb = sb.count();

  std::vector<double> dfa, dga, dfb, dgb;
  detail::make_diffs(A.values, sa, dfa, dga);
  detail::make_diffs(B.values, sb, dfb, dgb);

  // diagonal index di maps to offset delta = i - j in [-(cb-1), ca-1]
  const std::size_t ndiag = ca + cb - 1;
  auto worker = [&](std::size_t di, detail::corr_acc& acc) {
    const std::ptrdiff_t delta = static_cast<std::ptrdiff_t>(di) - static_cast<std::ptrdiff_t>(cb - 1);
    const std::size_t i0 = delta > 0 ? static_cast<std::size_t>(delta) : 0;
    const std::size_t j0 = delta > 0 ? 0 : static_cast<std::size_t>(-delta);
    const std::size_t len = std::min(ca - i0, cb - j0);
    double cov = detail::window_dot(A.values, i0, sa.means[i0], B.values, j0, sb.means[j0], m);
    for (std::size_t s = 0; s < len; ++s) {
      const std::size_t i = i0 + s;
      const std::size_t j = j0 + s;
      if (s != 0) cov += dfa[i] * dgb[j] + dga[i] * dfb[j];
      double c = cov * sa.invn[i] * sb.invn[j];
      if (sa.constant_mask[i] && sb.constant_mask[j]) {
        c = 1.0;
      } else {
        c = detail::clamp_corr(c);
      }
      detail::acc_update(acc, i, c, static_cast<std::int64_t>(j));
    }
  };
  detail::corr_acc acc = detail::run_diagonals(ca, ndiag, threads, worker);
  return detail::finish_profile(acc, m, join_kind::ab);
}

} // namespace tsdict

#endif // TSDICT_PROFILES_HPP
