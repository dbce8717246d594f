#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "unmix/extractors.hpp"
#include "unmix/metrics.hpp"
#include "unmix/synth.hpp"

using namespace unmix;

namespace {

struct TinyScene {
  EndmemberSet truth;
  SpectralCube cube;
};

TinyScene tiny_scene(std::size_t p, std::size_t bands, std::size_t pixels, std::uint64_t seed) {
  EndmemberSet m = generate_endmembers(p, bands, seed);
  auto [cube, abundances] = generate_mixture(m, pixels, true, seed);
  return {std::move(m), std::move(cube)};
}

double matched_rms_sam(const EndmemberSet &extracted, const EndmemberSet &truth) {
  return rms(match_endmembers(extracted, truth, Metric::SAM));
}

double exhaustive_max_volume(const ReducedCube &r, std::size_t n) {
  double best = 0.0;
  for (PixelIndex a = 0; a < n; ++a)
    for (PixelIndex b = a + 1; b < n; ++b)
      for (PixelIndex c = b + 1; c < n; ++c) {
        const std::vector<PixelIndex> pick{a, b, c};
        best = std::max(best, pixel_volume(r, pick));
      }
  return best;
}

void expect_valid_result(const EndmemberSet &e, const SpectralCube &cube, std::size_t p) {
  ASSERT_TRUE(e.source_indices().has_value());
  const auto &idx = *e.source_indices();
  ASSERT_EQ(idx.size(), p);
  std::set<PixelIndex> distinct(idx.begin(), idx.end());
  EXPECT_EQ(distinct.size(), p);
  for (std::size_t k = 0; k < p; ++k) {
    ASSERT_LT(idx[k], cube.pixels());
    EXPECT_EQ(e.spectrum(k), cube.pixel(idx[k]));
  }
}

} // namespace

TEST(Extract, EveryAlgorithmRecoversPurePixels) {
  const TinyScene s = tiny_scene(4, 30, 200, 41);
  for (auto name : kAlgorithmNames) {
    ExtractorSpec spec = make_extractor_spec(name, 4, 3);
    if (spec.ga) {
      spec.ga->population_size = 60;
      spec.ga->generations = 150;
    }
    const EndmemberSet e = extract(s.cube, spec);
    expect_valid_result(e, s.cube, 4);
    EXPECT_LT(matched_rms_sam(e, s.truth), 1e-9) << name;
    EXPECT_EQ(extract(s.cube, spec).source_indices(), e.source_indices()) << name;
    ReductionCache cache(s.cube);
    EXPECT_GT(extraction_volume(cache, e), 0.0) << name;
  }
}

TEST(Extract, RejectsPAboveN) {
  const SpectralCube cube(Matrix::Random(5, 3));
  EXPECT_THROW(extract(cube, make_extractor_spec("vca", 4, 0)), ValidationError);
  EXPECT_THROW(make_extractor_spec("sga", 4, 0), ValidationError);
  ExtractorSpec bad = make_extractor_spec("vca", 3, 0);
  bad.ga = GaConfig{};
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(TableOne, VariantParameters) {
  struct Row {
    const char *name;
    double pm, pc;
    bool ivfm, vca;
  };
  for (const Row &row : {Row{"gaee", 0.1, 1.0, false, false}, Row{"gaee-ivfm", 0.3, 0.7, true, false},
                         Row{"gaee-vca", 0.05, 0.5, false, true}, Row{"gaee-ivfm-vca", 0.1, 1.0, true, true}}) {
    const ExtractorSpec spec = make_extractor_spec(row.name, 5, 0);
    ASSERT_TRUE(spec.ga);
    EXPECT_EQ(spec.ga->mutation_prob, row.pm);
    EXPECT_EQ(spec.ga->crossover_prob, row.pc);
    EXPECT_EQ(spec.ga->ivfm_enabled, row.ivfm);
    EXPECT_EQ(spec.ga->vca_seed_enabled, row.vca);
    EXPECT_EQ(spec.ga->population_size, 100u);
    EXPECT_EQ(spec.ga->generations, 1000u);
  }
}

TEST(Ppi, CollinearCubeCreditsTheEnds) {
  Matrix y(2, 9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    const double x = 0.1 * static_cast<double>((i * 5) % 9);
    y(0, i) = x;
    y(1, i) = 0.5 * x;
  }
  const EndmemberSet e = ppi(SpectralCube(y), 2, 500, 1);
  std::vector<PixelIndex> idx = *e.source_indices();
  std::sort(idx.begin(), idx.end());
  // x = 0 at i = 0, x = 0.8 at i = 7 (5 * 7 % 9 = 8).
  EXPECT_EQ(idx, (std::vector<PixelIndex>{0, 7}));
}

TEST(Ppi, InteriorPointsNeverScore) {
  // Equivalent oracle: a pixel can only be a projection extreme if it is a
  // hull vertex, and the planted pure pixels are the only vertices.
  const TinyScene s = tiny_scene(3, 12, 14, 43);
  const EndmemberSet e = ppi(s.cube, 3, 2000, 2);
  std::vector<PixelIndex> idx = *e.source_indices();
  std::sort(idx.begin(), idx.end());
  EXPECT_EQ(idx, (std::vector<PixelIndex>{0, 1, 2}));
}

TEST(Ppi, NoSkewersIsAnError) {
  const TinyScene s = tiny_scene(3, 12, 14, 43);
  try {
    ppi(s.cube, 3, 0, 0);
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_STREQ(e.what(), "no skewers");
  }
}

TEST(Nfindr, NeverShrinksInitialVolume) {
  const TinyScene s = tiny_scene(4, 20, 60, 44);
  const ReducedCube r = pca_reduce(s.cube, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NfindrTrace trace;
    const EndmemberSet e = nfindr(r, s.cube, 4, 20, seed, &trace);
    EXPECT_GE(trace.final_volume, trace.initial_volume);
    EXPECT_DOUBLE_EQ(pixel_volume(r, *e.source_indices()), trace.final_volume);
  }
}

TEST(Nfindr, ReachesExhaustiveMaximumOnTinyCubes) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TinyScene s = tiny_scene(3, 15, 12 + seed % 4, 100 + seed);
    const ReducedCube r = pca_reduce(s.cube, 2);
    const EndmemberSet e = nfindr(r, s.cube, 3, 20, seed);
    hits += std::abs(pixel_volume(r, *e.source_indices()) - exhaustive_max_volume(r, s.cube.pixels())) <=
            1e-12 * exhaustive_max_volume(r, s.cube.pixels());
  }
  EXPECT_GE(hits, 45);
}

TEST(Nfindr, IdenticalPixelsTerminateAfterOneSweep) {
  Matrix y = Matrix::Constant(5, 20, 0.4);
  const SpectralCube cube(y);
  NfindrTrace trace;
  const EndmemberSet e = nfindr(pca_reduce(cube, 2), cube, 3, 20, 1, &trace);
  EXPECT_EQ(trace.sweeps, 1u);
  EXPECT_EQ(trace.final_volume, 0.0);
  expect_valid_result(e, cube, 3);
}

TEST(Vca, RecoversThreeTruePixels) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TinyScene s = tiny_scene(3, 25, 300, 200 + seed);
    std::vector<PixelIndex> idx = *vca(s.cube, 3, seed).source_indices();
    std::sort(idx.begin(), idx.end());
    EXPECT_EQ(idx, (std::vector<PixelIndex>{0, 1, 2})) << "seed " << seed;
  }
}

TEST(Vca, PicksOnePixelPerAntipodalCluster) {
  Rng rng(5);
  Matrix y(6, 40);
  for (Eigen::Index i = 0; i < 40; ++i)
    for (Eigen::Index l = 0; l < 6; ++l)
      y(l, i) = (i < 20 ? 1.0 : -1.0) * (1.0 + 0.01 * l) + 0.01 * rng.normal();
  const SpectralCube cube(y);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::vector<PixelIndex> idx = *vca(cube, 2, seed).source_indices();
    std::sort(idx.begin(), idx.end());
    EXPECT_LT(idx[0], 20u);
    EXPECT_GE(idx[1], 20u);
  }
}

TEST(Vca, FirstPickIsAHullVertex) {
  // On a pure-pixel scene the hull vertices are exactly the planted pixels,
  // so every pick (including the first) must land on one of them.
  const TinyScene s = tiny_scene(4, 20, 15, 300);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto idx = *vca(s.cube, 4, seed).source_indices();
    EXPECT_LT(idx.front(), 4u);
  }
}

TEST(Gaee, ExhaustiveMaximumAndVcaDomination) {
  const TinyScene s = tiny_scene(3, 15, 13, 400);
  ReductionCache cache(s.cube);
  const double best = exhaustive_max_volume(cache.get(2), 13);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExtractorSpec spec = make_extractor_spec("gaee", 3, seed);
    spec.ga->population_size = 30;
    spec.ga->generations = 50;
    const EndmemberSet e = extract(s.cube, spec);
    EXPECT_NEAR(extraction_volume(cache, e), best, 1e-12 * best);

    ExtractorSpec seeded = make_extractor_spec("gaee-vca", 3, seed);
    seeded.ga->population_size = 10;
    seeded.ga->generations = 3;
    const EndmemberSet g = extract(s.cube, seeded);
    const EndmemberSet v = vca(s.cube, 3, seed);
    EXPECT_GE(extraction_volume(cache, g), extraction_volume(cache, v));
  }
}
