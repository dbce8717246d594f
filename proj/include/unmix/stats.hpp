#ifndef UNMIX_STATS_HPP
#define UNMIX_STATS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "error.hpp"

namespace unmix {

inline double mean(std::span<const double> xs) {
  detail::require(!xs.empty(), "mean of an empty sample");
  double acc = 0.0;
  for (double x : xs)
    acc += x;
  return acc / static_cast<double>(xs.size());
}

/// Sample variance (n - 1 denominator), two-pass.
inline double variance(std::span<const double> xs) {
  detail::require(xs.size() >= 2, "variance needs at least two values");
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs)
    acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size() - 1);
}

inline double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

namespace detail {

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny)
    d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny)
      d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny)
      c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps)
      break;
  }
  return h;
}

} // namespace detail

/// Regularised incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  detail::require(a > 0.0 && b > 0.0, "incomplete beta needs positive shape parameters");
  detail::require(x >= 0.0 && x <= 1.0, "incomplete beta argument must lie in [0, 1]");
  if (x == 0.0 || x == 1.0)
    return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast for x below the mean; use symmetry above it.
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Two-sided tail probability P(|T| >= |t|) of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  detail::require(df > 0.0, "degrees of freedom must be positive");
  if (std::isinf(t))
    return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x), 0.0, 1.0);
}

struct TTest {
  double t_statistic;
  double p_value;
  double degrees_of_freedom;
};

/// Welch's unequal-variance t-test of mean(a) - mean(b).
///
/// Both samples with zero variance give t = 0, p = 1 when the means agree
/// and t = +/-inf, p = 0 otherwise.
inline TTest welch_t(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() >= 2 && b.size() >= 2, "welch t-test needs at least two values per sample");
  for (double x : a)
    detail::require(std::isfinite(x), "welch t-test sample is not finite");
  for (double x : b)
    detail::require(std::isfinite(x), "welch t-test sample is not finite");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  const double va = variance(a) / na;
  const double vb = variance(b) / nb;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    if (diff == 0.0)
      return {0.0, 1.0, std::numeric_limits<double>::quiet_NaN()};
    return {std::copysign(std::numeric_limits<double>::infinity(), diff), 0.0,
            std::numeric_limits<double>::quiet_NaN()};
  }
  const double t = diff / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  return {t, student_t_two_sided(t, df), df};
}

/// Relative improvement of a lower-is-better candidate over a baseline, in percent.
inline double gain_percent(double baseline_mean, double candidate_mean) {
  if (!(candidate_mean > 0.0))
    throw ValidationError("gain needs a positive candidate mean");
  return 100.0 * (baseline_mean - candidate_mean) / candidate_mean;
}

} // namespace unmix

#endif // UNMIX_STATS_HPP
