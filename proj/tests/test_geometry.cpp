#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "unmix/geometry.hpp"
#include "unmix/random.hpp"

using namespace unmix;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng &rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = 2.0 * rng.uniform() - 1.0;
  return m;
}

// Laplace expansion along the first row.
double cofactor_det(const Matrix &a) {
  const Eigen::Index n = a.rows();
  if (n == 1)
    return a(0, 0);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Matrix minor(n - 1, n - 1);
    for (Eigen::Index r = 1; r < n; ++r)
      for (Eigen::Index c = 0, k = 0; c < n; ++c)
        if (c != j)
          minor(r - 1, k++) = a(r, c);
    total += ((j % 2 == 0) ? 1.0 : -1.0) * a(0, j) * cofactor_det(minor);
  }
  return total;
}

// Cyclic Jacobi eigenvalues of a symmetric matrix.
std::vector<double> jacobi_eigenvalues(Matrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        off += a(i, j) * a(i, j);
    if (off < 1e-30)
      break;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300)
          continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

} // namespace

TEST(Determinant, KnownValues) {
  EXPECT_DOUBLE_EQ(determinant(Matrix::Identity(4, 4)), 1.0);
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_DOUBLE_EQ(determinant(m), -2.0);
  Matrix singular(3, 3);
  singular << 1, 2, 3, 2, 4, 6, 0, 1, 1;
  EXPECT_EQ(determinant(singular), 0.0);
  EXPECT_THROW(determinant(Matrix(2, 3)), ValidationError);
}

TEST(Determinant, MatchesCofactorExpansion) {
  Rng rng(5);
  for (int n = 1; n <= 7; ++n)
    for (int trial = 0; trial < 20; ++trial) {
      const Matrix a = random_matrix(n, n, rng);
      const double expect = cofactor_det(a);
      EXPECT_NEAR(determinant(a), expect, 1e-9 * std::max(1.0, std::abs(expect))) << "n=" << n;
    }
}

TEST(SimplexVolume, StandardShapes) {
  Matrix tri(2, 3);
  tri << 0, 1, 0, 0, 0, 1;
  EXPECT_DOUBLE_EQ(simplex_volume(tri), 0.5);
  Matrix tet(3, 4);
  tet << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_NEAR(simplex_volume(tet), 1.0 / 6.0, 1e-15);
  Matrix degenerate(2, 3);
  degenerate << 0.3, 1, 0.3, 0.2, 0, 0.2;
  EXPECT_EQ(simplex_volume(degenerate), 0.0);
}

TEST(SimplexVolume, RejectsBadShapeOrValues) {
  EXPECT_THROW(simplex_volume(Matrix(2, 2)), ValidationError);
  Matrix bad(1, 2);
  bad << 0, std::nan("");
  EXPECT_THROW(simplex_volume(bad), ValidationError);
}

TEST(SimplexVolume, PermutationTranslationAndScaling) {
  Rng rng(11);
  for (int d = 1; d <= 6; ++d) {
    const Matrix v = random_matrix(d, d + 1, rng);
    const double vol = simplex_volume(v);
    Matrix rev = v.rowwise().reverse();
    EXPECT_NEAR(simplex_volume(rev), vol, 1e-12 * vol);
    Matrix moved = v.colwise() + random_matrix(d, 1, rng).col(0);
    EXPECT_NEAR(simplex_volume(moved), vol, 1e-10 * vol);
    const Vector centroid = v.rowwise().mean();
    Matrix scaled = ((v.colwise() - centroid) * 1.7).colwise() + centroid;
    EXPECT_NEAR(simplex_volume(scaled), vol * std::pow(1.7, d), 1e-10 * vol * std::pow(1.7, d));
  }
}

TEST(Pca, RankOneDataReconstructsExactly) {
  Matrix y(2, 20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    y(0, i) = 0.05 * static_cast<double>(i);
    y(1, i) = 2.0 * y(0, i);
  }
  const ReducedCube r = pca_reduce(SpectralCube(y), 1);
  EXPECT_LT((r.reconstruct() - y).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pca, FullDimensionPreservesDistances) {
  Rng rng(3);
  const Matrix y = random_matrix(6, 40, rng);
  const ReducedCube r = pca_reduce(SpectralCube(y), 6);
  EXPECT_LT((r.basis.transpose() * r.basis - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index j = i + 1; j < 40; ++j)
      EXPECT_NEAR((r.data.col(i) - r.data.col(j)).norm(), (y.col(i) - y.col(j)).norm(), 1e-9);
}

TEST(Pca, CapturedVarianceMatchesJacobiEigenvalues) {
  Rng rng(17);
  Matrix y = random_matrix(10, 100, rng);
  for (Eigen::Index b = 0; b < 10; ++b)
    y.row(b) *= 1.0 + static_cast<double>(b); // spread the spectrum
  const ReducedCube r = pca_reduce(SpectralCube(y), 3);
  const Matrix centered = y.colwise() - y.rowwise().mean();
  const Matrix cov = centered * centered.transpose() / 99.0;
  const auto ev = jacobi_eigenvalues(cov);
  const double expected = ev[0] + ev[1] + ev[2];
  const Matrix centered_r = r.data.colwise() - r.data.rowwise().mean();
  const double captured = centered_r.squaredNorm() / 99.0;
  EXPECT_NEAR(captured, expected, 1e-8 * expected);
  EXPECT_NEAR(r.eigenvalues.sum(), expected, 1e-8 * expected);
}

TEST(Pca, SignConventionAndRange) {
  Rng rng(23);
  const SpectralCube cube(random_matrix(5, 30, rng));
  const ReducedCube r = pca_reduce(cube, 4);
  for (Eigen::Index k = 0; k < 4; ++k) {
    Eigen::Index arg = 0;
    r.basis.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(r.basis(arg, k), 0.0);
  }
  EXPECT_THROW(pca_reduce(cube, 0), ValidationError);
  EXPECT_THROW(pca_reduce(cube, 6), ValidationError);
}

TEST(Pca, AffinelyIndependentPixelsHavePositiveVolume) {
  Rng rng(29);
  const SpectralCube cube(random_matrix(8, 50, rng));
  const ReducedCube r = pca_reduce(cube, 3);
  const std::vector<PixelIndex> pick{0, 7, 19, 42};
  EXPECT_GT(pixel_volume(r, pick), 0.0);
}

TEST(ReductionCache, MatchesDirectReduction) {
  Rng rng(31);
  const SpectralCube cube(random_matrix(6, 25, rng));
  ReductionCache cache(cube);
  const ReducedCube &a = cache.get(3);
  const ReducedCube b = pca_reduce(cube, 3);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(&cache.get(3), &a);
}
