#ifndef TSDICT_SERIES_HPP
#define TSDICT_SERIES_HPP

// Time-series container, rolling window statistics and the z-normalized
// Euclidean distance primitive. Everything else in the library is built on
// top of these.
//
// Conventions used throughout:
//  - population (divide-by-m) standard deviation, consistent with the
//    identity d = sqrt(2m(1-rho)) for Pearson correlation rho;
//  - a window is "constant" when its std falls below a relative threshold
//    (see constancy_threshold); constant windows get invn = 0 so that the
//    streaming kernels naturally produce correlation 0 against them;
//  - distance between two constant windows is 0, between a constant and a
//    non-constant window it is sqrt(2m) (the rho = 0 value). This keeps the
//    metric total, bounded and symmetric.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tsdict/errors.hpp"

namespace tsdict {

struct TimeSeries {
  std::vector<double> values;

  std::size_t n() const noexcept { return values.size(); }
};

// Rolling statistics for all n-m+1 windows of length m.
// invn[i] = 1 / (stds[i] * sqrt(m)) = 1 / sqrt(sum of squared deviations),
// or exactly 0 for constant windows; it is the factor the streaming join
// kernels multiply covariances by to obtain correlations.
struct SubseqStats {
  std::size_t m = 0;
  std::vector<double> means;
  std::vector<double> stds;
  std::vector<double> invn;
  std::vector<unsigned char> constant_mask;

  std::size_t count() const noexcept { return means.size(); }
};

namespace detail {

// Kahan-compensated running sum.
struct kahan_sum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept {
    double y = x - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

inline void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw error(errc::non_finite_input, std::string(what) + " contains a non-finite sample");
    }
  }
}

} // namespace detail

// Relative constancy threshold: windows with std below this count as flat.
// Relative to the sample magnitude so that rescaling the input does not flip
// the mask.
inline double constancy_threshold(double max_abs_sample) {
  return 1e-8 * std::max(1.0, max_abs_sample);
}

// Exact rolling mean/std for every length-m window, O(n). The data is
// centered on its global mean before the compensated prefix sums are taken,
// which keeps the cancellation error within 1e-9 of a naive per-window
// recomputation on well-scaled data.
inline SubseqStats compute_stats(const TimeSeries& T, std::size_t m) {
  const std::size_t n = T.n();
  if (m < 2) throw error(errc::window_too_small, "window length must be at least 2");
  if (m > n) throw error(errc::window_too_large, "window length exceeds series length");
  detail::require_finite(T.values, "series");

  detail::kahan_sum total;
  double max_abs = 0.0;
  for (double x : T.values) {
    total.add(x);
    max_abs = std::max(max_abs, std::fabs(x));
  }
  const double grand_mean = total.sum / static_cast<double>(n);

  // prefix sums of the centered samples and their squares
  std::vector<double> ps1(n + 1, 0.0), ps2(n + 1, 0.0);
  detail::kahan_sum s1, s2;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = T.values[i] - grand_mean;
    s1.add(c);
    s2.add(c * c);
    ps1[i + 1] = s1.sum;
    ps2[i + 1] = s2.sum;
  }

  const std::size_t cnt = n - m + 1;
  const double md = static_cast<double>(m);
  const double eps = constancy_threshold(max_abs);

  SubseqStats st;
  st.m = m;
  st.means.resize(cnt);
  st.stds.resize(cnt);
  st.invn.resize(cnt);
  st.constant_mask.resize(cnt);
  for (std::size_t i = 0; i < cnt; ++i) {
    const double w1 = ps1[i + m] - ps1[i];
    const double w2 = ps2[i + m] - ps2[i];
    const double mean_c = w1 / md;
    double var = (w2 - w1 * mean_c) / md;
    if (var < 0.0) var = 0.0;
    double sd = std::sqrt(var);
    double mean = grand_mean + mean_c;
    // w2 - w1*mean_c cancels against the stored prefix magnitudes, so its
    // absolute error scales with ps2[i + m] rather than with the window.
    // When that threatens the std's ninth digit (near-flat windows riding a
    // large excursion), redo just this window in two exact passes.
    const double cancel_err = 4.4e-16 * (ps2[i + m] + std::fabs(w1 * mean_c)) / md;
    if (sd * 1e-9 < cancel_err) {
      detail::kahan_sum wsum;
      for (std::size_t t = 0; t < m; ++t) wsum.add(T.values[i + t]);
      mean = wsum.sum / md;
      detail::kahan_sum wss;
      for (std::size_t t = 0; t < m; ++t) {
        const double d = T.values[i + t] - mean;
        wss.add(d * d);
      }
      var = std::max(0.0, wss.sum / md);
      sd = std::sqrt(var);
    }
    st.means[i] = mean;
    st.stds[i] = sd;
    const bool flat = sd < eps;
    st.constant_mask[i] = flat ? 1 : 0;
    st.invn[i] = flat ? 0.0 : 1.0 / (sd * std::sqrt(md));
  }
  return st;
}

// Correlation -> distance, with clamping to the representable range.
inline double corr_to_dist(double rho, std::size_t m) {
  if (rho > 1.0) rho = 1.0;
  if (rho < -1.0) rho = -1.0;
  double d = std::sqrt(2.0 * static_cast<double>(m) * (1.0 - rho));
  const double dmax = 2.0 * std::sqrt(static_cast<double>(m));
  if (d < 0.0) d = 0.0;
  if (d > dmax) d = dmax;
  return d;
}

// z-normalized Euclidean distance between two equal-length windows.
// Result lies in [0, 2*sqrt(m)]. Constant-window convention: both constant
// -> 0, exactly one constant -> sqrt(2m).
inline double znorm_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw error(errc::length_mismatch, "subsequences differ in length");
  }
  const std::size_t m = a.size();
  if (m < 2) throw error(errc::window_too_small, "window length must be at least 2");

  double max_abs = 0.0;
  detail::kahan_sum sa, sb;
  for (std::size_t i = 0; i < m; ++i) {
    sa.add(a[i]);
    sb.add(b[i]);
    max_abs = std::max({max_abs, std::fabs(a[i]), std::fabs(b[i])});
  }
  const double md = static_cast<double>(m);
  const double mu_a = sa.sum / md;
  const double mu_b = sb.sum / md;

  detail::kahan_sum va, vb, cov;
  for (std::size_t i = 0; i < m; ++i) {
    const double da = a[i] - mu_a;
    const double db = b[i] - mu_b;
    va.add(da * da);
    vb.add(db * db);
    cov.add(da * db);
  }
  const double sd_a = std::sqrt(std::max(0.0, va.sum / md));
  const double sd_b = std::sqrt(std::max(0.0, vb.sum / md));
  const double eps = constancy_threshold(max_abs);
  const bool flat_a = sd_a < eps;
  const bool flat_b = sd_b < eps;
  if (flat_a && flat_b) return 0.0;
  if (flat_a || flat_b) return std::sqrt(2.0 * md);

  // group the two stds first: IEEE multiplication commutes, so the result
  // is bitwise symmetric in the argument order
  const double rho = cov.sum / (md * (sd_a * sd_b));
  return corr_to_dist(rho, m);
}

} // namespace tsdict

#endif // TSDICT_SERIES_HPP
