#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sociodyn/common.hpp"

namespace sociodyn::stats {

inline double expit(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v, bool population) {
  if (v.size() < 2) return 0.0;
  double m = mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(population ? v.size() : v.size() - 1);
}

inline double stddev(std::span<const double> v, bool population) {
  return std::sqrt(variance(v, population));
}

// Linear interpolation between order statistics ("type 7"): h = (n-1)p.
inline double percentile_type7_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error("percentile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  double h = static_cast<double>(sorted.size() - 1) * p;
  auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double percentile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return percentile_type7_sorted(v, p);
}

inline double median(std::vector<double> v) { return percentile_type7(std::move(v), 0.5); }

// ---------------------------------------------------------------------------
// Distribution functions
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

// Acklam's rational approximation with one Halley refinement.
inline double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw Error("normal_quantile domain");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double eps = 3e-15, fpmin = 1e-300;
  double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  double lnbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double front = std::exp(lnbeta + a * std::log(x) + b * std::log(1 - x));
  if (x < (a + 1) / (a + b + 2)) return front * detail::betacf(a, b, x) / a;
  return 1 - front * detail::betacf(b, a, 1 - x) / b;
}

// Upper tail P(F >= f) for d1/d2 degrees of freedom.
inline double f_sf(double f, double d1, double d2) {
  if (f <= 0) return 1.0;
  return incomplete_beta(d2 / 2, d1 / 2, d2 / (d2 + d1 * f));
}

// Two-sided p of Student t with nu degrees of freedom.
inline double t_two_sided(double t, double nu) {
  return incomplete_beta(nu / 2, 0.5, nu / (nu + t * t));
}

// ---------------------------------------------------------------------------
// Studentized range distribution (Tukey HSD)
// ---------------------------------------------------------------------------

namespace detail {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlX[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                            0.9602898564975363};
constexpr double kGlW[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                            0.1012285362903763};

template <typename F>
double integrate_panels(F&& f, double lo, double hi, double max_panel) {
  int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
  double w = (hi - lo) / panels, total = 0;
  for (int p = 0; p < panels; ++p) {
    double c = lo + (p + 0.5) * w, h = w / 2;
    for (int i = 0; i < 4; ++i) {
      total += kGlW[i] * h * (f(c + h * kGlX[i]) + f(c - h * kGlX[i]));
    }
  }
  return total;
}

// CDF of the range of k iid standard normals.
inline double range_cdf(double w, int k) {
  if (w <= 0) return 0;
  auto f = [&](double z) {
    double band = normal_cdf(z) - normal_cdf(z - w);
    return normal_pdf(z) * std::pow(band, k - 1);
  };
  return std::min(1.0, k * integrate_panels(f, -8.0, w + 8.0, 0.25));
}

}  // namespace detail

// P(Q <= q) for the studentized range with k groups and nu error df.
inline double studentized_range_cdf(double q, int k, double nu) {
  if (q <= 0) return 0;
  if (k < 2) throw Error("studentized range requires k >= 2");
  if (nu > 1e5) return detail::range_cdf(q, k);
  // s ~ chi_nu / sqrt(nu): log-density via lgamma, integrated around s = 1.
  double spread = 12.0 / std::sqrt(2.0 * nu);
  double lo = std::max(1e-8, 1.0 - spread), hi = 1.0 + spread;
  double lognorm = std::log(2.0) + (nu / 2) * std::log(nu / 2) - std::lgamma(nu / 2);
  auto f = [&](double s) {
    double logf = lognorm + (nu - 1) * std::log(s) - nu * s * s / 2;
    return std::exp(logf) * detail::range_cdf(q * s, k);
  };
  return std::min(1.0, detail::integrate_panels(f, lo, hi, (hi - lo) / 24.0));
}

inline double studentized_range_sf(double q, int k, double nu) {
  return std::max(0.0, 1.0 - studentized_range_cdf(q, k, nu));
}

}  // namespace sociodyn::stats
