#ifndef UNMIX_METRICS_HPP
#define UNMIX_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <vector>

#include "core_types.hpp"

namespace unmix {

enum class Metric { SAM, SID };

inline std::string_view to_string(Metric m) { return m == Metric::SAM ? "sam" : "sid"; }

inline Metric parse_metric(std::string_view name) {
  if (name == "sam" || name == "SAM")
    return Metric::SAM;
  if (name == "sid" || name == "SID")
    return Metric::SID;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

/// Spectral angle in radians between two spectra of equal length.
template <typename A, typename B>
double sam(const Eigen::MatrixBase<A> &t, const Eigen::MatrixBase<B> &r) {
  detail::require(t.size() == r.size(), "spectrum length mismatch");
  detail::require(t.size() >= 1, "empty spectrum");
  const double nt = t.norm();
  const double nr = r.norm();
  if (!(nt > 0.0) || !(nr > 0.0))
    throw ValidationError("degenerate spectrum");
  // Half-angle form stays accurate near 0 and pi, where acos of the cosine
  // loses about half the significant digits.
  const Vector a = t / nt;
  const Vector b = r / nr;
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

inline double sam(std::span<const double> t, std::span<const double> r) {
  using Map = Eigen::Map<const Vector>;
  return sam(Map(t.data(), static_cast<Eigen::Index>(t.size())),
             Map(r.data(), static_cast<Eigen::Index>(r.size())));
}

inline constexpr double kSidFloor = 1e-12;

namespace detail {

template <typename A>
Vector to_distribution(const Eigen::MatrixBase<A> &x) {
  if ((x.array() < 0.0).any())
    throw ValidationError("negative reflectance");
  detail::require(x.sum() > 0.0, "spectrum with zero sum");
  Vector q = x.array().max(kSidFloor).matrix();
  return q / q.sum();
}

} // namespace detail

/// Spectral information divergence: D(x||y) + D(y||x) over band-normalised
/// spectra, natural log, entries floored at 1e-12.
template <typename A, typename B>
double sid(const Eigen::MatrixBase<A> &x, const Eigen::MatrixBase<B> &y) {
  detail::require(x.size() == y.size(), "spectrum length mismatch");
  detail::require(x.size() >= 1, "empty spectrum");
  const Vector p = detail::to_distribution(x);
  const Vector q = detail::to_distribution(y);
  double total = 0.0;
  for (Eigen::Index l = 0; l < p.size(); ++l) {
    // p log(p/q) + q log(q/p); written so swapping arguments is bit-exact.
    total += (p[l] - q[l]) * (std::log(p[l]) - std::log(q[l]));
  }
  return std::max(total, 0.0);
}

inline double sid(std::span<const double> x, std::span<const double> y) {
  using Map = Eigen::Map<const Vector>;
  return sid(Map(x.data(), static_cast<Eigen::Index>(x.size())),
             Map(y.data(), static_cast<Eigen::Index>(y.size())));
}

/// SID that accepts noisy spectra: a vector with any negative entry is
/// shifted up by its minimum first. `shifted` reports whether that happened.
template <typename A, typename B>
double sid_shifted(const Eigen::MatrixBase<A> &x, const Eigen::MatrixBase<B> &y, bool *shifted = nullptr) {
  auto lift = [](const auto &v, bool &flag) -> Vector {
    const double lo = v.minCoeff();
    if (lo >= 0.0)
      return v;
    flag = true;
    return (v.array() - lo).matrix();
  };
  bool flag = false;
  const Vector xs = lift(x, flag);
  const Vector ys = lift(y, flag);
  if (shifted)
    *shifted = flag;
  return sid(xs, ys);
}

/// Metric used by the harness: SAM, or shift-tolerant SID.
template <typename A, typename B>
double score(Metric metric, const Eigen::MatrixBase<A> &extracted, const Eigen::MatrixBase<B> &reference,
             bool *shifted = nullptr) {
  if (metric == Metric::SAM)
    return sam(reference, extracted);
  return sid_shifted(reference, extracted, shifted);
}

struct MatchedPair {
  std::size_t reference;
  std::size_t extracted;
  double score;

  friend bool operator==(const MatchedPair &, const MatchedPair &) = default;
};

/// Greedy global-minimum assignment over a square cost matrix
/// (rows = reference, columns = extracted). Ties go to the lowest
/// (row, column). Result is sorted by reference index.
inline std::vector<MatchedPair> greedy_assignment(const Matrix &cost) {
  detail::require(cost.rows() == cost.cols() && cost.rows() > 0, "cost matrix must be square and non-empty");
  const auto p = static_cast<std::size_t>(cost.rows());
  std::vector<bool> row_used(p, false), col_used(p, false);
  std::vector<MatchedPair> pairs;
  pairs.reserve(p);
  for (std::size_t step = 0; step < p; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = p, bj = p;
    for (std::size_t i = 0; i < p; ++i) {
      if (row_used[i])
        continue;
      for (std::size_t j = 0; j < p; ++j) {
        if (col_used[j])
          continue;
        const double c = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (bi == p || c < best) {
          best = c;
          bi = i;
          bj = j;
        }
      }
    }
    row_used[bi] = col_used[bj] = true;
    pairs.push_back({bi, bj, best});
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto &a, const auto &b) { return a.reference < b.reference; });
  return pairs;
}

/// Metric cost matrix between reference (rows) and extracted (columns).
inline Matrix cost_matrix(const EndmemberSet &extracted, const EndmemberSet &reference, Metric metric,
                          bool *shifted = nullptr) {
  detail::require(extracted.count() == reference.count(), "endmember count mismatch");
  detail::require(extracted.bands() == reference.bands(), "band count mismatch");
  const auto p = static_cast<Eigen::Index>(reference.count());
  Matrix cost(p, p);
  bool any_shift = false;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) {
      bool s = false;
      cost(i, j) = score(metric, extracted.spectra().col(j), reference.spectra().col(i), &s);
      any_shift = any_shift || s;
    }
  if (shifted)
    *shifted = any_shift;
  return cost;
}

inline std::vector<MatchedPair> match_endmembers(const EndmemberSet &extracted, const EndmemberSet &reference,
                                                 Metric metric, bool *shifted = nullptr) {
  return greedy_assignment(cost_matrix(extracted, reference, metric, shifted));
}

/// Root mean square of a non-empty list.
inline double rms(std::span<const double> values) {
  detail::require(!values.empty(), "rms of an empty list");
  double acc = 0.0;
  for (double v : values)
    acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

inline double rms(const std::vector<MatchedPair> &pairs) {
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto &m : pairs)
    scores.push_back(m.score);
  return rms(scores);
}

} // namespace unmix

#endif // UNMIX_METRICS_HPP
