#ifndef UNMIX_EXTRACTORS_HPP
#define UNMIX_EXTRACTORS_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "core_types.hpp"
#include "evolution.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace unmix {

enum class Algorithm { PPI, NFINDR, VCA, GAEE };

struct ExtractorSpec {
  Algorithm algorithm = Algorithm::VCA;
  std::size_t p = 2;
  std::optional<GaConfig> ga;
  std::size_t ppi_skewers = 10000;
  std::size_t nfindr_max_sweeps = 20;
  std::uint64_t rng_seed = 0;
  /// Seed of the VCA run that primes a VCA-seeded GA; defaults to rng_seed.
  std::optional<std::uint64_t> vca_seed;

  void validate() const {
    detail::require(p >= 2, "p >= 2 required");
    detail::require(ga.has_value() == (algorithm == Algorithm::GAEE), "GA configuration is required for GAEE only");
    if (ga)
      ga->validate();
  }
};

/// Table I parameters for the four GA variants.
struct GaVariant {
  std::string_view name;
  bool ivfm;
  bool vca_seed;
  double mutation_prob;
  double crossover_prob;
};

inline constexpr GaVariant kGaVariants[] = {
    {"gaee", false, false, 0.1, 1.0},
    {"gaee-ivfm", true, false, 0.3, 0.7},
    {"gaee-vca", false, true, 0.05, 0.5},
    {"gaee-ivfm-vca", true, true, 0.1, 1.0},
};

inline const GaVariant *find_ga_variant(std::string_view name) {
  for (const auto &v : kGaVariants)
    if (v.name == name)
      return &v;
  return nullptr;
}

/// Names accepted by make_extractor_spec, in canonical order.
inline constexpr std::string_view kAlgorithmNames[] = {"ppi",  "nfindr",    "vca",          "gaee",
                                                       "gaee-ivfm", "gaee-vca", "gaee-ivfm-vca"};

/// Spec for a named algorithm with library defaults (Table I for GA variants).
inline ExtractorSpec make_extractor_spec(std::string_view name, std::size_t p, std::uint64_t seed) {
  ExtractorSpec spec;
  spec.p = p;
  spec.rng_seed = seed;
  if (name == "ppi") {
    spec.algorithm = Algorithm::PPI;
  } else if (name == "nfindr" || name == "n-findr") {
    spec.algorithm = Algorithm::NFINDR;
  } else if (name == "vca") {
    spec.algorithm = Algorithm::VCA;
  } else if (const GaVariant *v = find_ga_variant(name)) {
    spec.algorithm = Algorithm::GAEE;
    GaConfig ga;
    ga.ivfm_enabled = v->ivfm;
    ga.vca_seed_enabled = v->vca_seed;
    ga.mutation_prob = v->mutation_prob;
    ga.crossover_prob = v->crossover_prob;
    ga.rng_seed = seed;
    spec.ga = ga;
  } else {
    throw ValidationError("unknown algorithm '" + std::string(name) + "'");
  }
  return spec;
}

namespace detail {

inline void require_extractable(const SpectralCube &cube, std::size_t p) {
  require(p >= 2, "p >= 2 required");
  require(cube.pixels() >= p, "p exceeds the number of pixels");
}

} // namespace detail

/// Pixel purity index. Every skewer (a Gaussian-drawn unit vector in band
/// space) credits the pixels with its maximum and minimum projection; the p
/// most credited pixels are returned, ties to the lower index.
inline EndmemberSet ppi(const SpectralCube &cube, std::size_t p, std::size_t num_skewers, std::uint64_t seed) {
  detail::require_extractable(cube, p);
  if (num_skewers == 0)
    throw ValidationError("no skewers");
  Rng rng(derive_seed({seed, 0x707069ULL}));
  const auto bands = static_cast<Eigen::Index>(cube.bands());
  const auto n = static_cast<Eigen::Index>(cube.pixels());
  std::vector<std::uint64_t> counts(cube.pixels(), 0);

  constexpr std::size_t kBatch = 256;
  Matrix skewers;
  Matrix projections;
  for (std::size_t done = 0; done < num_skewers; done += kBatch) {
    const auto batch = static_cast<Eigen::Index>(std::min(kBatch, num_skewers - done));
    skewers.resize(batch, bands);
    for (Eigen::Index s = 0; s < batch; ++s) {
      for (Eigen::Index l = 0; l < bands; ++l)
        skewers(s, l) = rng.normal();
      skewers.row(s).normalize();
    }
    projections.noalias() = skewers * cube.data();
    for (Eigen::Index s = 0; s < batch; ++s) {
      Eigen::Index lo = 0, hi = 0;
      for (Eigen::Index i = 1; i < n; ++i) {
        const double v = projections(s, i);
        if (v > projections(s, hi))
          hi = i;
        if (v < projections(s, lo))
          lo = i;
      }
      ++counts[static_cast<std::size_t>(hi)];
      if (lo != hi)
        ++counts[static_cast<std::size_t>(lo)];
    }
  }

  std::vector<PixelIndex> order(cube.pixels());
  std::iota(order.begin(), order.end(), PixelIndex{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p), order.end(),
                    [&](PixelIndex a, PixelIndex b) { return counts[a] > counts[b] || (counts[a] == counts[b] && a < b); });
  order.resize(p);
  return EndmemberSet::from_pixels(cube, std::move(order));
}

/// Volumes and sweep count of one N-FINDR run.
struct NfindrTrace {
  double initial_volume = 0.0;
  double final_volume = 0.0;
  std::size_t sweeps = 0;
};

/// N-FINDR over a precomputed (p-1)-dimensional reduction.
inline EndmemberSet nfindr(const ReducedCube &reduced, const SpectralCube &cube, std::size_t p,
                           std::size_t max_sweeps, std::uint64_t seed, NfindrTrace *trace = nullptr) {
  detail::require_extractable(cube, p);
  detail::require(reduced.dim() + 1 == p, "N-FINDR needs a (p-1)-dimensional reduction");
  detail::require(max_sweeps >= 1, "N-FINDR needs at least one sweep");
  Rng rng(derive_seed({seed, 0x6e66696eULL}));
  std::vector<PixelIndex> current = random_chromosome(cube.pixels(), p, rng).genes;

  const auto d = static_cast<Eigen::Index>(p - 1);
  Matrix vertices = reduced.gather(current);
  double volume = simplex_volume(vertices);
  NfindrTrace local;
  local.initial_volume = volume;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    ++local.sweeps;
    bool changed = false;
    for (std::size_t v = 0; v < p; ++v) {
      for (PixelIndex j = 0; j < cube.pixels(); ++j) {
        if (std::find(current.begin(), current.end(), j) != current.end())
          continue;
        const Vector saved = vertices.col(static_cast<Eigen::Index>(v));
        vertices.col(static_cast<Eigen::Index>(v)) = reduced.data.col(static_cast<Eigen::Index>(j)).head(d);
        const double trial = simplex_volume(vertices);
        if (trial > volume) {
          volume = trial;
          current[v] = j;
          changed = true;
        } else {
          vertices.col(static_cast<Eigen::Index>(v)) = saved;
        }
      }
    }
    if (!changed)
      break;
  }
  local.final_volume = volume;
  if (trace)
    *trace = local;
  return EndmemberSet::from_pixels(cube, std::move(current));
}

/// N-FINDR: random start, then vertex-major, pixel-ascending sweeps that
/// accept any replacement strictly growing the simplex volume, until a sweep
/// changes nothing or max_sweeps is reached.
inline EndmemberSet nfindr(const SpectralCube &cube, std::size_t p, std::size_t max_sweeps, std::uint64_t seed) {
  detail::require_extractable(cube, p);
  return nfindr(pca_reduce(cube, p - 1), cube, p, max_sweeps, seed);
}

inline constexpr int kVcaMaxRedraws = 100;

/// Vertex component analysis over a precomputed p-dimensional reduction.
inline EndmemberSet vca(const ReducedCube &reduced, const SpectralCube &cube, std::size_t p, std::uint64_t seed) {
  detail::require_extractable(cube, p);
  detail::require(reduced.dim() == p, "VCA needs a p-dimensional reduction");
  Rng rng(derive_seed({seed, 0x766361ULL}));
  const auto dim = static_cast<Eigen::Index>(p + 1);
  const auto n = static_cast<Eigen::Index>(cube.pixels());

  // Reduced pixels with an appended constant coordinate.
  Matrix y(dim, n);
  y.topRows(dim - 1) = reduced.data;
  y.row(dim - 1).setOnes();

  Matrix found(dim, 0);
  std::vector<PixelIndex> chosen;
  chosen.reserve(p);
  Vector w(dim);
  for (std::size_t k = 0; k < p; ++k) {
    bool accepted = false;
    for (int attempt = 0; attempt < kVcaMaxRedraws && !accepted; ++attempt) {
      for (Eigen::Index i = 0; i < dim; ++i)
        w[i] = rng.normal();
      Vector f = w;
      if (found.cols() > 0)
        f -= found * found.completeOrthogonalDecomposition().solve(w);
      const double norm = f.norm();
      if (!(norm > 0.0))
        continue;
      f /= norm;
      const Vector proj = (f.transpose() * y).transpose().cwiseAbs();
      Eigen::Index arg = 0;
      for (Eigen::Index i = 1; i < n; ++i)
        if (proj[i] > proj[arg])
          arg = i;
      const auto idx = static_cast<PixelIndex>(arg);
      if (std::find(chosen.begin(), chosen.end(), idx) != chosen.end())
        continue;
      chosen.push_back(idx);
      found.conservativeResize(Eigen::NoChange, found.cols() + 1);
      found.col(found.cols() - 1) = y.col(arg);
      accepted = true;
    }
    if (!accepted)
      throw Error("VCA stalled");
  }
  return EndmemberSet::from_pixels(cube, std::move(chosen));
}

/// VCA core loop: each endmember is the pixel extremising |f^T y| for a
/// random direction f orthogonal to the endmembers found so far.
inline EndmemberSet vca(const SpectralCube &cube, std::size_t p, std::uint64_t seed) {
  detail::require_extractable(cube, p);
  return vca(pca_reduce(cube, p), cube, p, seed);
}

struct GaeeResult {
  EndmemberSet endmembers;
  EvolutionResult evolution;
};

inline GaeeResult gaee_detailed(const ReductionCache &cache, std::size_t p, const GaConfig &config,
                                std::uint64_t vca_seed) {
  const SpectralCube &cube = cache.cube();
  detail::require_extractable(cube, p);
  config.validate();
  const ReducedCube &reduced = cache.get(p - 1);
  auto fitness = [&reduced](std::span<const PixelIndex> genes) { return pixel_volume(reduced, genes); };

  std::optional<Chromosome> seed_individual;
  if (config.vca_seed_enabled) {
    EndmemberSet hint = vca(cache.get(p), cube, p, vca_seed);
    seed_individual = Chromosome{*hint.source_indices(), std::nullopt};
  }
  EvolutionResult evolution = evolve(cube.pixels(), p, config, fitness, seed_individual);
  EndmemberSet endmembers = EndmemberSet::from_pixels(cube, evolution.best.genes);
  return {std::move(endmembers), std::move(evolution)};
}

/// Genetic-algorithm extractor: fitness is the simplex volume of the
/// chromosome's pixels in the (p-1)-dimensional principal subspace.
inline EndmemberSet gaee(const SpectralCube &cube, std::size_t p, const GaConfig &config) {
  ReductionCache cache(cube);
  return gaee_detailed(cache, p, config, config.rng_seed).endmembers;
}

struct Extraction {
  EndmemberSet endmembers;
  std::optional<std::vector<GenerationRecord>> convergence;
};

inline Extraction extract_detailed(const ReductionCache &cache, const ExtractorSpec &spec) {
  spec.validate();
  const SpectralCube &cube = cache.cube();
  detail::require_extractable(cube, spec.p);
  switch (spec.algorithm) {
  case Algorithm::PPI:
    return {ppi(cube, spec.p, spec.ppi_skewers, spec.rng_seed), std::nullopt};
  case Algorithm::NFINDR:
    return {nfindr(cache.get(spec.p - 1), cube, spec.p, spec.nfindr_max_sweeps, spec.rng_seed), std::nullopt};
  case Algorithm::VCA:
    return {vca(cache.get(spec.p), cube, spec.p, spec.vca_seed.value_or(spec.rng_seed)), std::nullopt};
  case Algorithm::GAEE: {
    GaeeResult r = gaee_detailed(cache, spec.p, *spec.ga, spec.vca_seed.value_or(spec.ga->rng_seed));
    return {std::move(r.endmembers), std::move(r.evolution.convergence)};
  }
  }
  throw ValidationError("unknown algorithm");
}

/// Uniform entry point over the four algorithm families.
inline EndmemberSet extract(const SpectralCube &cube, const ExtractorSpec &spec) {
  ReductionCache cache(cube);
  return extract_detailed(cache, spec).endmembers;
}

/// Simplex volume of an extraction in the cube's (p-1)-dimensional subspace.
inline double extraction_volume(const ReductionCache &cache, const EndmemberSet &result) {
  detail::require(result.source_indices().has_value(), "volume needs source indices");
  return pixel_volume(cache.get(result.count() - 1), *result.source_indices());
}

} // namespace unmix

#endif // UNMIX_EXTRACTORS_HPP
