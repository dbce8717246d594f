#ifndef UNMIX_SYNTH_HPP
#define UNMIX_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "core_types.hpp"
#include "metrics.hpp"
#include "random.hpp"

namespace unmix {

/// SNR value meaning "do not add noise".
inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct SceneSpec {
  std::size_t endmember_count = 5;
  std::size_t bands = 431;
  std::size_t side = 128;
  double snr_db = kNoiseless;
  bool pure_pixel_guarantee = true;
  std::uint64_t seed = 1;

  std::size_t pixels() const { return side * side; }

  void validate() const {
    detail::require(endmember_count >= 2, "scene needs p >= 2");
    detail::require(bands >= endmember_count, "scene needs bands >= p");
    detail::require(side >= 2, "scene side must be >= 2");
    detail::require(!std::isnan(snr_db) && snr_db > -std::numeric_limits<double>::infinity(),
                    "snr must be finite or noiseless");
  }
};

inline constexpr int kLegendreTerms = 6;
inline constexpr double kMinEndmemberAngle = 0.1;
inline constexpr int kMaxEndmemberAttempts = 1000;

namespace detail {

/// P_0..P_{terms-1} evaluated at x in [-1, 1] (Bonnet recursion).
inline void legendre_values(double x, int terms, double *out) {
  out[0] = 1.0;
  if (terms > 1)
    out[1] = x;
  for (int n = 1; n + 1 < terms; ++n)
    out[n + 1] = ((2.0 * n + 1.0) * x * out[n] - n * out[n - 1]) / (n + 1.0);
}

inline Vector legendre_spectrum(std::size_t bands, Rng &rng) {
  double weights[kLegendreTerms];
  for (double &w : weights)
    w = rng.uniform();
  Vector s(static_cast<Eigen::Index>(bands));
  double basis[kLegendreTerms];
  for (std::size_t l = 0; l < bands; ++l) {
    const double x = bands == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(l) / static_cast<double>(bands - 1);
    legendre_values(x, kLegendreTerms, basis);
    double v = 0.0;
    for (int k = 0; k < kLegendreTerms; ++k)
      v += weights[k] * basis[k];
    s[static_cast<Eigen::Index>(l)] = v;
  }
  s.array() -= s.minCoeff();
  const double peak = s.maxCoeff();
  if (peak > 0.0)
    s /= peak;
  return s;
}

} // namespace detail

/// p smooth non-negative spectra with peak 1, pairwise SAM >= 0.1 rad.
/// Each column is a random positive mix of the first six Legendre
/// polynomials, shifted to zero minimum and scaled to unit maximum; columns
/// that sit too close to an earlier one are redrawn.
inline EndmemberSet generate_endmembers(std::size_t p, std::size_t bands, std::uint64_t seed) {
  detail::require(p >= 2 && p <= bands, "endmember generation needs 2 <= p <= bands");
  Rng rng(derive_seed({seed, 0x656e646dULL}));
  Matrix spectra(static_cast<Eigen::Index>(bands), static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxEndmemberAttempts && !placed; ++attempt) {
      Vector candidate = detail::legendre_spectrum(bands, rng);
      if (!(candidate.maxCoeff() > 0.0))
        continue;
      placed = true;
      for (std::size_t j = 0; j < k && placed; ++j)
        placed = sam(candidate, spectra.col(static_cast<Eigen::Index>(j))) >= kMinEndmemberAngle;
      if (placed)
        spectra.col(static_cast<Eigen::Index>(k)) = candidate;
    }
    if (!placed)
      throw Error("endmembers too similar");
  }
  return EndmemberSet(std::move(spectra));
}

/// Flat-Dirichlet abundances for `pixels` pixels; when `pure` is set the
/// first p pixels are the unit vectors e_0..e_{p-1}.
inline AbundanceMap generate_abundances(std::size_t p, std::size_t pixels, bool pure, std::uint64_t seed) {
  detail::require(p >= 1 && pixels >= 1, "empty abundance request");
  detail::require(!pure || pixels >= p, "pure pixels need pixels >= p");
  Rng rng(derive_seed({seed, 0x6162756eULL}));
  Matrix a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(pixels));
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    // Normalised unit exponentials are Dirichlet(1, ..., 1).
    for (Eigen::Index k = 0; k < a.rows(); ++k)
      a(k, j) = rng.exponential();
    a.col(j) /= a.col(j).sum();
  }
  if (pure) {
    a.leftCols(static_cast<Eigen::Index>(p)).setIdentity();
  }
  return AbundanceMap(std::move(a));
}

/// Linear mixture Y = M A over any pixel count (scenes use side * side).
inline std::pair<SpectralCube, AbundanceMap> generate_mixture(const EndmemberSet &endmembers, std::size_t pixels,
                                                              bool pure, std::uint64_t seed) {
  AbundanceMap abundances = generate_abundances(endmembers.count(), pixels, pure, seed);
  Matrix y = endmembers.spectra() * abundances.fractions();
  if (pure)
    for (std::size_t k = 0; k < endmembers.count(); ++k)
      y.col(static_cast<Eigen::Index>(k)) = endmembers.spectrum(k);
  return {SpectralCube(std::move(y)), std::move(abundances)};
}

/// Noiseless scene following `spec`.
inline std::pair<SpectralCube, AbundanceMap> generate_scene(const SceneSpec &spec, const EndmemberSet &endmembers) {
  spec.validate();
  detail::require(endmembers.count() == spec.endmember_count, "endmember count differs from scene spec");
  detail::require(endmembers.bands() == spec.bands, "endmember band count differs from scene spec");
  return generate_mixture(endmembers, spec.pixels(), spec.pure_pixel_guarantee, spec.seed);
}

/// Mean of squared entries.
inline double signal_power(const Matrix &m) { return m.squaredNorm() / static_cast<double>(m.size()); }

/// Adds i.i.d. Gaussian noise with variance P_signal / 10^(snr/10).
/// An infinite SNR returns the cube unchanged.
inline SpectralCube add_noise(const SpectralCube &cube, double snr_db, std::uint64_t seed) {
  detail::require(!std::isnan(snr_db), "snr must not be NaN");
  if (snr_db == kNoiseless)
    return cube;
  detail::require(std::isfinite(snr_db), "snr must be finite or noiseless");
  const double sigma = std::sqrt(signal_power(cube.data()) / std::pow(10.0, snr_db / 10.0));
  Rng rng(derive_seed({seed, 0x6e6f6973ULL}));
  Matrix noisy = cube.data();
  // Column-major walk: pixel by pixel, band by band.
  for (Eigen::Index i = 0; i < noisy.size(); ++i)
    noisy.data()[i] += sigma * rng.normal();
  return SpectralCube(std::move(noisy));
}

/// Full synthetic scene with noise: endmembers, noisy cube, abundances.
struct Scene {
  EndmemberSet endmembers;
  SpectralCube cube;
  AbundanceMap abundances;
};

inline Scene make_scene(const SceneSpec &spec) {
  spec.validate();
  EndmemberSet m = generate_endmembers(spec.endmember_count, spec.bands, spec.seed);
  auto [clean, abundances] = generate_scene(spec, m);
  SpectralCube noisy = add_noise(clean, spec.snr_db, spec.seed);
  return {std::move(m), std::move(noisy), std::move(abundances)};
}

} // namespace unmix

#endif // UNMIX_SYNTH_HPP
