#ifndef UNMIX_GEOMETRY_HPP
#define UNMIX_GEOMETRY_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>

#include <Eigen/Dense>

#include "core_types.hpp"

namespace unmix {

/// Determinant by LU factorisation with partial pivoting. Works on a copy;
/// an exactly singular pivot column yields 0.
inline double determinant(Matrix a) {
  detail::require(a.rows() == a.cols(), "determinant of a non-square matrix");
  detail::require(a.allFinite(), "determinant of a non-finite matrix");
  const Eigen::Index n = a.rows();
  double det = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    double best = std::abs(a(k, k));
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        pivot = i;
      }
    }
    if (best == 0.0)
      return 0.0;
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      det = -det;
    }
    const double diag = a(k, k);
    det *= diag;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / diag;
      if (factor != 0.0)
        a.row(i).tail(n - k - 1) -= factor * a.row(k).tail(n - k - 1);
    }
  }
  return det;
}

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k)
    f *= static_cast<double>(k);
  return f;
}

/// Volume of the simplex whose d+1 vertices are the columns of a d x (d+1)
/// matrix: |det [1 ... 1; vertices]| / d!.
template <typename Derived>
double simplex_volume(const Eigen::MatrixBase<Derived> &vertices) {
  const Eigen::Index d = vertices.rows();
  detail::require(d >= 1 && vertices.cols() == d + 1, "simplex needs a d x (d+1) vertex matrix");
  detail::require(vertices.allFinite(), "simplex vertices contain non-finite values");
  Matrix augmented(d + 1, d + 1);
  augmented.row(0).setOnes();
  augmented.bottomRows(d) = vertices;
  return std::abs(determinant(std::move(augmented))) / factorial(static_cast<std::size_t>(d));
}

/// Principal-component projection of a cube.
struct ReducedCube {
  Matrix data;       ///< d x N projected pixels.
  Vector mean;       ///< Per-band mean removed before projection.
  Matrix basis;      ///< L x d orthonormal principal directions.
  Vector eigenvalues; ///< Top-d covariance eigenvalues, descending.

  std::size_t dim() const { return static_cast<std::size_t>(data.rows()); }
  std::size_t pixels() const { return static_cast<std::size_t>(data.cols()); }

  /// d x k matrix of the reduced coordinates of the given pixels.
  Matrix gather(std::span<const PixelIndex> indices) const {
    Matrix out(data.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k)
      out.col(static_cast<Eigen::Index>(k)) = data.col(static_cast<Eigen::Index>(indices[k]));
    return out;
  }

  /// Maps reduced coordinates back into band space.
  Matrix reconstruct() const { return (basis * data).colwise() + mean; }
};

/// Sample-covariance eigendecomposition of a cube, directions sorted by
/// descending eigenvalue. Each direction is signed so its largest-magnitude
/// entry is positive.
struct PcaModel {
  Vector mean;
  Matrix directions;  ///< L x L, column k is the k-th principal direction.
  Vector eigenvalues; ///< Descending.
};

inline PcaModel fit_pca(const SpectralCube &cube) {
  const Matrix &y = cube.data();
  const Eigen::Index n_bands = y.rows();
  PcaModel model;
  model.mean = y.rowwise().mean();
  const Matrix centered = y.colwise() - model.mean;
  Matrix cov = Matrix::Zero(n_bands, n_bands);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(y.cols() - 1));
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success)
    throw Error("covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  model.directions.resize(n_bands, n_bands);
  model.eigenvalues.resize(n_bands);
  for (Eigen::Index k = 0; k < n_bands; ++k) {
    const Eigen::Index src = n_bands - 1 - k;
    Vector v = solver.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0)
      v = -v;
    model.directions.col(k) = v;
    model.eigenvalues[k] = solver.eigenvalues()[src];
  }
  return model;
}

/// Projects a cube onto the first `target_dim` directions of a fitted model.
inline ReducedCube project(const PcaModel &model, const SpectralCube &cube, std::size_t target_dim) {
  const std::size_t limit = std::min(cube.bands(), cube.pixels());
  detail::require(target_dim >= 1 && target_dim <= limit,
                  "target dimension must lie in [1, " + std::to_string(limit) + "]");
  const auto d = static_cast<Eigen::Index>(target_dim);
  ReducedCube out;
  out.mean = model.mean;
  out.basis = model.directions.leftCols(d);
  out.eigenvalues = model.eigenvalues.head(d);
  out.data = out.basis.transpose() * (cube.data().colwise() - model.mean);
  return out;
}

/// Mean-centres the pixels and projects them onto the top `target_dim`
/// principal directions.
inline ReducedCube pca_reduce(const SpectralCube &cube, std::size_t target_dim) {
  const std::size_t limit = std::min(cube.bands(), cube.pixels());
  detail::require(target_dim >= 1 && target_dim <= limit,
                  "target dimension must lie in [1, " + std::to_string(limit) + "]");
  return project(fit_pca(cube), cube, target_dim);
}

/// Lazily computed reductions of one cube, shareable between threads.
/// The cube must outlive the cache.
class ReductionCache {
public:
  explicit ReductionCache(const SpectralCube &cube) : cube_(&cube) {}

  const SpectralCube &cube() const { return *cube_; }

  const ReducedCube &get(std::size_t target_dim) const {
    std::lock_guard lock(mutex_);
    if (auto it = reduced_.find(target_dim); it != reduced_.end())
      return *it->second;
    if (!model_)
      model_ = std::make_unique<PcaModel>(fit_pca(*cube_));
    auto [it, inserted] = reduced_.emplace(target_dim, std::make_unique<ReducedCube>(project(*model_, *cube_, target_dim)));
    return *it->second;
  }

private:
  const SpectralCube *cube_;
  mutable std::mutex mutex_;
  mutable std::unique_ptr<PcaModel> model_;
  mutable std::map<std::size_t, std::unique_ptr<ReducedCube>> reduced_;
};

/// Simplex volume spanned by the given pixels of a reduced cube whose
/// dimension is one less than the pixel count.
inline double pixel_volume(const ReducedCube &reduced, std::span<const PixelIndex> indices) {
  detail::require(indices.size() == reduced.dim() + 1, "pixel count must be reduced dimension + 1");
  return simplex_volume(reduced.gather(indices));
}

} // namespace unmix

#endif // UNMIX_GEOMETRY_HPP
