#ifndef UNMIX_CORE_TYPES_HPP
#define UNMIX_CORE_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace unmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using PixelIndex = std::size_t;

/// Observed reflectance data: one column per pixel, one row per band.
class SpectralCube {
public:
  SpectralCube() = default;

  explicit SpectralCube(Matrix data) : data_(std::move(data)) {
    detail::require(data_.rows() >= 2, "cube needs at least 2 bands");
    detail::require(data_.cols() >= 2, "cube needs at least 2 pixels");
    detail::require(data_.allFinite(), "cube contains non-finite values");
  }

  std::size_t bands() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t pixels() const { return static_cast<std::size_t>(data_.cols()); }
  const Matrix &data() const { return data_; }

  auto pixel(PixelIndex i) const { return data_.col(static_cast<Eigen::Index>(i)); }

private:
  Matrix data_;
};

/// p endmember spectra (columns), optionally remembering where in a cube
/// each one was taken from.
class EndmemberSet {
public:
  EndmemberSet() = default;

  explicit EndmemberSet(Matrix spectra, std::optional<std::vector<PixelIndex>> source = std::nullopt)
      : spectra_(std::move(spectra)), source_(std::move(source)) {
    detail::require(spectra_.cols() >= 2, "p >= 2 required");
    detail::require(spectra_.rows() >= 1, "endmember spectra need at least 1 band");
    detail::require(spectra_.allFinite(), "endmember spectra contain non-finite values");
    if (source_) {
      detail::require(source_->size() == count(), "source index count differs from endmember count");
      std::vector<PixelIndex> sorted = *source_;
      std::sort(sorted.begin(), sorted.end());
      detail::require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
                      "source indices must be distinct");
    }
  }

  /// Gathers the given pixels of a cube; indices must be distinct and in range.
  static EndmemberSet from_pixels(const SpectralCube &cube, std::vector<PixelIndex> indices) {
    Matrix spectra(cube.bands(), indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
      detail::require(indices[k] < cube.pixels(), "source index out of range");
      spectra.col(static_cast<Eigen::Index>(k)) = cube.pixel(indices[k]);
    }
    return EndmemberSet(std::move(spectra), std::move(indices));
  }

  std::size_t count() const { return static_cast<std::size_t>(spectra_.cols()); }
  std::size_t bands() const { return static_cast<std::size_t>(spectra_.rows()); }
  const Matrix &spectra() const { return spectra_; }
  auto spectrum(std::size_t k) const { return spectra_.col(static_cast<Eigen::Index>(k)); }
  const std::optional<std::vector<PixelIndex>> &source_indices() const { return source_; }

private:
  Matrix spectra_;
  std::optional<std::vector<PixelIndex>> source_;
};

/// Per-pixel abundance fractions: p rows, N columns, each column on the
/// probability simplex.
class AbundanceMap {
public:
  AbundanceMap() = default;

  explicit AbundanceMap(Matrix fractions) : fractions_(std::move(fractions)) {
    detail::require(fractions_.rows() >= 1 && fractions_.cols() >= 1, "empty abundance map");
    detail::require((fractions_.array() >= 0.0).all(), "abundance fractions must be non-negative");
    for (Eigen::Index j = 0; j < fractions_.cols(); ++j)
      detail::require(std::abs(fractions_.col(j).sum() - 1.0) <= 1e-12,
                      "abundance column " + std::to_string(j) + " does not sum to one");
  }

  std::size_t count() const { return static_cast<std::size_t>(fractions_.rows()); }
  std::size_t pixels() const { return static_cast<std::size_t>(fractions_.cols()); }
  const Matrix &fractions() const { return fractions_; }

private:
  Matrix fractions_;
};

/// One GA individual: p distinct pixel indices and, once evaluated, the
/// simplex volume they span.
struct Chromosome {
  std::vector<PixelIndex> genes;
  std::optional<double> fitness;

  std::size_t size() const { return genes.size(); }
  double fitness_or_zero() const { return fitness.value_or(0.0); }

  friend bool operator==(const Chromosome &, const Chromosome &) = default;
};

/// True when every gene is below `pixels` and no gene repeats.
inline bool is_valid(const Chromosome &c, std::size_t pixels) {
  std::vector<PixelIndex> sorted = c.genes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    return false;
  return sorted.empty() || sorted.back() < pixels;
}

} // namespace unmix

#endif // UNMIX_CORE_TYPES_HPP
