#ifndef TSDICT_DICTIONARY_HPP
#define TSDICT_DICTIONARY_HPP

// Greedy dictionary learning: repeatedly pick the window that is currently
// worst represented (largest gap between its self-join distance and its
// distance to the already-chosen cores), store it together with a context
// window of k*m surrounding samples, and stop when the configured budget or
// error target is met. Overlapping and touching stored intervals are merged.
//
// Selection details:
//  - the processed profile is P - S, where P is the exact self-join profile
//    of the source and S is the elementwise minimum of the distance profiles
//    of the cores chosen so far (S is all zeros until the first update, and
//    the first update replaces it rather than taking a minimum);
//  - ties in the argmin go to the lowest index;
//  - a chosen core start j masks indices within floor(m/2) of j (inclusive)
//    from future selection;
//  - the context window of total length floor(k*m) splits half before the
//    core and the remainder after it, clipped to the series bounds.
//
// Stop rules (exactly one must be configured):
//  - space_saving_target / sample_budget: stop after the first iteration at
//    which the merged stored-sample count reaches the budget; the element
//    that crossed the line is retained;
//  - error_target: stop once max(S) (an upper bound on the true e_max, which
//    additionally benefits from context windows) drops to the target; the
//    exact e_max is recomputed at the end either way.
//
// When every candidate index is masked before the stop rule fires, the
// dictionary built so far is returned with no_progress set.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "tsdict/errors.hpp"
#include "tsdict/profiles.hpp"
#include "tsdict/series.hpp"

namespace tsdict {

struct Segment {
  std::size_t start = 0;
  std::vector<double> values;

  std::size_t length() const noexcept { return values.size(); }
};

struct Dictionary {
  std::vector<Segment> segments;
  std::size_t m = 0;
  double k = 1.5;
  std::size_t source_length = 0;
  std::vector<std::size_t> core_starts;
  std::optional<double> e_max;
  double space_saving = 0.0;
  bool no_progress = false;

  std::size_t stored_samples() const noexcept {
    std::size_t total = 0;
    for (const auto& s : segments) total += s.length();
    return total;
  }
};

struct LearnConfig {
  std::size_t m = 0;
  double k = 1.5;
  std::optional<double> space_saving_target; // fraction in [0, 1)
  std::optional<std::size_t> sample_budget;  // max stored samples
  std::optional<double> error_target;        // e_max threshold, distance units
  std::size_t max_iterations = 1000000;      // safety cap
};

using interval = std::pair<std::size_t, std::size_t>; // [lo, hi)

// Context window around core start j per the split rule above.
inline interval context_interval(std::size_t j, std::size_t m, double k, std::size_t n) {
  const auto total = static_cast<std::size_t>(k * static_cast<double>(m) + 1e-9);
  const std::size_t before = total / 2;
  const std::size_t lo = j >= before ? j - before : 0;
  const std::size_t hi = std::min(n, j + m + (total - before));
  return {lo, hi};
}

// Interval union; overlapping and touching intervals merge.
inline std::vector<interval> merge_intervals(std::vector<interval> ivs) {
  std::sort(ivs.begin(), ivs.end());
  std::vector<interval> out;
  for (const auto& iv : ivs) {
    if (!out.empty() && iv.first <= out.back().second) {
      out.back().second = std::max(out.back().second, iv.second);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

// Interval union materialized as verbatim segments of the source series.
inline std::vector<Segment> merge_segments(const std::vector<interval>& ivs, const TimeSeries& source) {
  for (const auto& iv : ivs) {
    if (iv.first >= iv.second || iv.second > source.n()) {
      throw error(errc::invalid_argument, "interval out of range");
    }
  }
  std::vector<Segment> out;
  for (const auto& iv : merge_intervals(ivs)) {
    Segment s;
    s.start = iv.first;
    s.values.assign(source.values.begin() + static_cast<std::ptrdiff_t>(iv.first),
                    source.values.begin() + static_cast<std::ptrdiff_t>(iv.second));
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

inline void validate_learn_config(const LearnConfig& cfg) {
  if (cfg.m < 2) throw error(errc::window_too_small, "window length must be at least 2");
  if (cfg.k < 0.0) throw error(errc::invalid_argument, "context factor k must be non-negative");
  int rules = 0;
  if (cfg.space_saving_target) ++rules;
  if (cfg.sample_budget) ++rules;
  if (cfg.error_target) ++rules;
  if (rules != 1) throw error(errc::invalid_argument, "exactly one stop rule must be set");
  if (cfg.space_saving_target && (*cfg.space_saving_target < 0.0 || *cfg.space_saving_target >= 1.0)) {
    throw error(errc::invalid_argument, "space saving target must lie in [0, 1)");
  }
  if (cfg.sample_budget && *cfg.sample_budget == 0) {
    throw error(errc::invalid_argument, "sample budget must be positive");
  }
  if (cfg.error_target && *cfg.error_target < 0.0) {
    throw error(errc::invalid_argument, "error target must be non-negative");
  }
  if (cfg.max_iterations == 0) {
    throw error(errc::invalid_argument, "iteration cap must be positive");
  }
}

// Elementwise minimum over per-segment AB-joins; the engine behind both the
// dictionary join and the exact e_max computation. Neighbor indices are
// reported in source-series coordinates.
inline MatrixProfile dict_min_profile(const TimeSeries& T, const Dictionary& D, std::size_t m,
                                      unsigned threads = 0) {
  if (D.segments.empty()) throw error(errc::empty_dictionary, "dictionary has no segments");
  for (const auto& s : D.segments) {
    if (s.length() < m) {
      throw error(errc::window_mismatch, "dictionary segment shorter than the window length");
    }
  }
  if (m < 2) throw error(errc::window_too_small, "window length must be at least 2");
  if (m > T.n()) throw error(errc::window_too_large, "window length exceeds series length");

  std::vector<TimeSeries> segs;
  segs.reserve(D.segments.size());
  for (const auto& s : D.segments) segs.push_back(TimeSeries{s.values});

  const std::size_t cnt = T.n() - m + 1;
  MatrixProfile best;
  best.kind = join_kind::ab;
  best.m = m;
  best.values.assign(cnt, std::numeric_limits<double>::infinity());
  best.indices.assign(cnt, MatrixProfile::no_neighbor);

  // Process T in window blocks so the block's samples, moments and output
  // rows stay cache-resident while every segment streams past them; this
  // keeps per-window cost flat as T grows. Inputs that fit a single block
  // take the same arithmetic path as an unblocked run.
  const std::size_t block = 16384;
  for (std::size_t c0 = 0; c0 < cnt; c0 += block) {
    const std::size_t c1 = std::min(cnt, c0 + block);
    TimeSeries chunk;
    chunk.values.assign(T.values.begin() + static_cast<std::ptrdiff_t>(c0),
                        T.values.begin() + static_cast<std::ptrdiff_t>(c1 - 1 + m));
    for (std::size_t si = 0; si < segs.size(); ++si) {
      const MatrixProfile mp = ab_join(chunk, segs[si], m, threads);
      const auto offset = static_cast<std::int64_t>(D.segments[si].start);
      for (std::size_t i = 0; i < mp.values.size(); ++i) {
        if (mp.values[i] < best.values[c0 + i]) {
          best.values[c0 + i] = mp.values[i];
          best.indices[c0 + i] = mp.indices[i] + offset;
        }
      }
    }
  }
  return best;
}

// Shared state of the greedy and the random-baseline loops.
struct select_state {
  std::size_t n = 0;
  std::size_t cnt = 0;
  std::size_t excl = 0;
  std::vector<unsigned char> masked;
  std::vector<interval> chosen;
  std::vector<interval> merged;
  std::vector<std::size_t> core_starts;
  std::size_t stored = 0;

  select_state(std::size_t n_, std::size_t cnt_, std::size_t excl_)
      : n(n_), cnt(cnt_), excl(excl_), masked(cnt_, 0) {}

  void take(std::size_t j, std::size_t m, double k) {
    core_starts.push_back(j);
    chosen.push_back(context_interval(j, m, k, n));
    merged = merge_intervals(chosen);
    stored = 0;
    for (const auto& iv : merged) stored += iv.second - iv.first;
    const std::size_t lo = j >= excl ? j - excl : 0;
    const std::size_t hi = std::min(cnt, j + excl + 1);
    std::fill(masked.begin() + static_cast<std::ptrdiff_t>(lo), masked.begin() + static_cast<std::ptrdiff_t>(hi),
              static_cast<unsigned char>(1));
  }
};

inline Dictionary finish_dictionary(const select_state& st, const TimeSeries& T_B, const LearnConfig& cfg,
                                    bool no_progress) {
  Dictionary D;
  D.m = cfg.m;
  D.k = cfg.k;
  D.source_length = T_B.n();
  D.core_starts = st.core_starts;
  D.segments = merge_segments(st.chosen, T_B);
  D.space_saving = 1.0 - static_cast<double>(st.stored) / static_cast<double>(T_B.n());
  D.no_progress = no_progress;
  return D;
}

// Budget threshold in stored samples; the small slack absorbs the floating
// point representation of (1 - target) * n.
inline double budget_threshold(const LearnConfig& cfg, std::size_t n) {
  if (cfg.sample_budget) return static_cast<double>(*cfg.sample_budget);
  return (1.0 - *cfg.space_saving_target) * static_cast<double>(n) - 1e-6;
}

} // namespace detail

// Exact error bound of a dictionary against its source series: the largest
// nearest-neighbor distance from any source window into the dictionary's
// window set.
inline double compute_e_max(const Dictionary& D, const TimeSeries& T_B, unsigned threads = 0) {
  if (D.source_length != T_B.n()) {
    throw error(errc::source_mismatch, "dictionary was learned from a series of different length");
  }
  const MatrixProfile mp = detail::dict_min_profile(T_B, D, D.m, threads);
  double worst = 0.0;
  for (double v : mp.values) worst = std::max(worst, v);
  return worst;
}

// Greedy dictionary learning against a precomputed exact self-join profile
// of the source (must equal self_join(T_B, cfg.m)).
inline Dictionary learn_dictionary(const TimeSeries& T_B, const LearnConfig& cfg, const MatrixProfile& P_B,
                                   unsigned threads = 0) {
  detail::validate_learn_config(cfg);
  const std::size_t n = T_B.n();
  const std::size_t m = cfg.m;
  if (n < 2 * m) throw error(errc::series_too_short, "dictionary learning needs n >= 2m");
  const std::size_t cnt = n - m + 1;
  if (P_B.m != m || P_B.kind != join_kind::self || P_B.values.size() != cnt) {
    throw error(errc::invalid_argument, "precomputed profile does not match the series and window");
  }

  const SubseqStats stats = compute_stats(T_B, m);
  const bool budget_rule = cfg.space_saving_target.has_value() || cfg.sample_budget.has_value();
  const double need = budget_rule ? detail::budget_threshold(cfg, n) : 0.0;

  detail::select_state st(n, cnt, m / 2);
  std::vector<double> S(cnt, 0.0);
  bool s_initialized = false;
  bool no_progress = false;

  for (std::size_t iter = 0;; ++iter) {
    if (iter >= cfg.max_iterations) {
      throw error(errc::iteration_cap_exceeded, "iteration cap reached before the stop rule fired");
    }

    // argmin of the processed profile P - S over unmasked indices
    std::size_t j = cnt;
    double best = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      if (st.masked[i]) continue;
      const double v = P_B.values[i] - S[i];
      if (j == cnt || v < best) {
        j = i;
        best = v;
      }
    }
    if (j == cnt) {
      no_progress = true;
      break;
    }

    st.take(j, m, cfg.k);
    if (budget_rule && static_cast<double>(st.stored) >= need) break;

    const DistanceProfile Sp =
        distance_profile_mass(T_B, std::span<const double>(T_B.values.data() + j, m), stats, j);
    if (!s_initialized) {
      S = Sp.values;
      s_initialized = true;
    } else {
      for (std::size_t i = 0; i < cnt; ++i) S[i] = std::min(S[i], Sp.values[i]);
    }
    if (cfg.error_target) {
      double worst = 0.0;
      for (double v : S) worst = std::max(worst, v);
      if (worst <= *cfg.error_target) break;
    }
  }

  Dictionary D = detail::finish_dictionary(st, T_B, cfg, no_progress);
  D.e_max = compute_e_max(D, T_B, threads);
  return D;
}

// Convenience overload that computes the self-join profile itself.
inline Dictionary learn_dictionary(const TimeSeries& T_B, const LearnConfig& cfg, unsigned threads = 0) {
  detail::validate_learn_config(cfg);
  const MatrixProfile P_B = self_join(T_B, cfg.m, threads);
  return learn_dictionary(T_B, cfg, P_B, threads);
}

// Random-selection baseline: identical exclusion, context and merge rules,
// but each core start is drawn uniformly from the unmasked indices. Only
// budget stop rules are supported (there is no error tracking to test).
inline Dictionary learn_dictionary_random(const TimeSeries& T_B, const LearnConfig& cfg, std::uint64_t seed,
                                          unsigned threads = 0) {
  detail::validate_learn_config(cfg);
  if (cfg.error_target) {
    throw error(errc::invalid_argument, "random baseline supports budget stop rules only");
  }
  const std::size_t n = T_B.n();
  const std::size_t m = cfg.m;
  if (n < 2 * m) throw error(errc::series_too_short, "dictionary learning needs n >= 2m");
  const std::size_t cnt = n - m + 1;
  const double need = detail::budget_threshold(cfg, n);

  detail::select_state st(n, cnt, m / 2);
  std::mt19937_64 rng(seed);
  bool no_progress = false;

  for (std::size_t iter = 0;; ++iter) {
    if (iter >= cfg.max_iterations) {
      throw error(errc::iteration_cap_exceeded, "iteration cap reached before the stop rule fired");
    }
    std::size_t unmasked = 0;
    for (unsigned char f : st.masked) unmasked += f ? 0 : 1;
    if (unmasked == 0) {
      no_progress = true;
      break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, unmasked - 1);
    std::size_t rank = pick(rng);
    std::size_t j = 0;
    for (std::size_t i = 0; i < cnt; ++i) {
      if (st.masked[i]) continue;
      if (rank == 0) {
        j = i;
        break;
      }
      --rank;
    }
    st.take(j, m, cfg.k);
    if (static_cast<double>(st.stored) >= need) break;
  }

  Dictionary D = detail::finish_dictionary(st, T_B, cfg, no_progress);
  D.e_max = compute_e_max(D, T_B, threads);
  return D;
}

} // namespace tsdict

#endif // TSDICT_DICTIONARY_HPP
