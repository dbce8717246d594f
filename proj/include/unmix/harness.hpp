#ifndef UNMIX_HARNESS_HPP
#define UNMIX_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "core_types.hpp"
#include "extractors.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "stats.hpp"

namespace unmix {

struct BenchAlgorithm {
  std::string name;
  ExtractorSpec spec; ///< rng_seed / vca_seed are overwritten per run.
};

struct BenchSpec {
  std::vector<BenchAlgorithm> algorithms;
  EndmemberSet reference;
  std::size_t runs = 50;
  std::vector<Metric> metrics{Metric::SAM, Metric::SID};
  std::string baseline = "vca";
  std::uint64_t master_seed = 0;
  std::size_t jobs = 1;

  void validate(const SpectralCube &cube) const {
    detail::require(!algorithms.empty(), "bench needs at least one algorithm");
    detail::require(runs >= 2, "bench needs runs >= 2 for statistics");
    detail::require(!metrics.empty(), "bench needs at least one metric");
    detail::require(jobs >= 1, "jobs must be positive");
    detail::require(reference.bands() == cube.bands(), "reference band count differs from cube");
    bool has_baseline = false;
    for (const auto &a : algorithms) {
      detail::require(a.spec.p == reference.count(), "algorithm '" + a.name + "' p differs from reference count");
      a.spec.validate();
      has_baseline = has_baseline || a.name == baseline;
    }
    detail::require(has_baseline, "baseline '" + baseline + "' is not among the algorithms");
  }
};

/// Stable per-name ordinal used in seed derivation.
inline std::uint64_t algorithm_ordinal(std::string_view name, std::size_t position) {
  for (std::size_t k = 0; k < std::size(kAlgorithmNames); ++k)
    if (kAlgorithmNames[k] == name)
      return k;
  return 1000 + position;
}

/// Seed of run `run` of the algorithm with the given ordinal.
inline std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t ordinal, std::size_t run) {
  return derive_seed({master_seed, ordinal, static_cast<std::uint64_t>(run)});
}

struct MetricRun {
  std::vector<double> scores;               ///< indexed by reference endmember
  std::vector<std::size_t> matched_columns; ///< extracted column matched to each reference
  double rms = 0.0;
  bool sid_shifted = false;
};

struct RunResult {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<PixelIndex> indices;
  double volume = 0.0;
  std::vector<MetricRun> metrics; ///< parallel to BenchSpec::metrics
  double seconds = 0.0;
  std::vector<GenerationRecord> convergence;
};

struct MetricSummary {
  Metric metric = Metric::SAM;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
  double t_statistic = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> gain_percent;
  std::optional<std::size_t> best_run;
  std::vector<double> best_run_scores;
  std::vector<double> mean_scores;
  std::size_t sid_shift_runs = 0;
};

struct AlgorithmReport {
  std::string name;
  std::vector<RunResult> runs;
  std::size_t failures = 0;
  std::vector<MetricSummary> metrics; ///< parallel to BenchSpec::metrics
  double mean_seconds = 0.0;
  std::vector<double> convergence_best; ///< mean over runs of best fitness per generation
  std::vector<double> convergence_mean; ///< mean over runs of mean fitness per generation

  std::vector<double> rms_values(std::size_t metric_slot) const {
    std::vector<double> out;
    for (const auto &r : runs)
      if (r.ok)
        out.push_back(r.metrics[metric_slot].rms);
    return out;
  }
};

struct BenchReport {
  std::size_t runs = 0;
  std::size_t endmembers = 0;
  std::size_t bands = 0;
  std::size_t pixels = 0;
  std::uint64_t master_seed = 0;
  std::string baseline;
  std::vector<Metric> metrics;
  std::vector<AlgorithmReport> algorithms;

  const AlgorithmReport *find(std::string_view name) const {
    for (const auto &a : algorithms)
      if (a.name == name)
        return &a;
    return nullptr;
  }
};

namespace detail {

inline RunResult execute_run(const ReductionCache &cache, const BenchSpec &spec, std::size_t algo, std::size_t run) {
  const BenchAlgorithm &entry = spec.algorithms[algo];
  RunResult result;
  result.run = run;
  result.seed = run_seed(spec.master_seed, algorithm_ordinal(entry.name, algo), run);
  ExtractorSpec es = entry.spec;
  es.rng_seed = result.seed;
  // Every VCA-primed run shares the VCA baseline's seed for that run index.
  es.vca_seed = run_seed(spec.master_seed, algorithm_ordinal("vca", 0), run);
  if (es.ga)
    es.ga->rng_seed = result.seed;

  const auto start = std::chrono::steady_clock::now();
  try {
    Extraction x = extract_detailed(cache, es);
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.indices = *x.endmembers.source_indices();
    result.volume = extraction_volume(cache, x.endmembers);
    for (Metric m : spec.metrics) {
      MetricRun mr;
      const auto pairs = match_endmembers(x.endmembers, spec.reference, m, &mr.sid_shifted);
      for (const auto &pair : pairs) {
        mr.scores.push_back(pair.score);
        mr.matched_columns.push_back(pair.extracted);
      }
      mr.rms = rms(mr.scores);
      result.metrics.push_back(std::move(mr));
    }
    if (x.convergence)
      result.convergence = std::move(*x.convergence);
    result.ok = true;
  } catch (const std::exception &e) {
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.ok = false;
    result.error = e.what();
    result.metrics.clear();
  }
  return result;
}

inline void summarise(AlgorithmReport &report, const BenchSpec &spec) {
  const std::size_t p = spec.reference.count();
  double seconds = 0.0;
  std::size_t ok = 0;
  for (const auto &r : report.runs) {
    seconds += r.seconds;
    ok += r.ok ? 1 : 0;
  }
  report.failures = report.runs.size() - ok;
  report.mean_seconds = report.runs.empty() ? 0.0 : seconds / static_cast<double>(report.runs.size());

  for (std::size_t slot = 0; slot < spec.metrics.size(); ++slot) {
    MetricSummary s;
    s.metric = spec.metrics[slot];
    const std::vector<double> values = report.rms_values(slot);
    if (!values.empty())
      s.mean = mean(values);
    if (values.size() >= 2)
      s.std = stddev(values);
    s.mean_scores.assign(p, 0.0);
    for (const auto &r : report.runs) {
      if (!r.ok)
        continue;
      const MetricRun &mr = r.metrics[slot];
      s.sid_shift_runs += mr.sid_shifted ? 1 : 0;
      for (std::size_t e = 0; e < p; ++e)
        s.mean_scores[e] += mr.scores[e] / static_cast<double>(values.size());
      if (!s.best_run || mr.rms < report.runs[*s.best_run].metrics[slot].rms)
        s.best_run = r.run;
    }
    if (s.best_run)
      s.best_run_scores = report.runs[*s.best_run].metrics[slot].scores;
    else
      s.mean_scores.clear();
    report.metrics.push_back(std::move(s));
  }

  // Convergence curves averaged over successful GA runs.
  std::size_t curves = 0;
  for (const auto &r : report.runs) {
    if (!r.ok || r.convergence.empty())
      continue;
    if (report.convergence_best.empty()) {
      report.convergence_best.assign(r.convergence.size(), 0.0);
      report.convergence_mean.assign(r.convergence.size(), 0.0);
    }
    for (std::size_t g = 0; g < r.convergence.size() && g < report.convergence_best.size(); ++g) {
      report.convergence_best[g] += r.convergence[g].best_fitness;
      report.convergence_mean[g] += r.convergence[g].mean_fitness;
    }
    ++curves;
  }
  for (auto &v : report.convergence_best)
    v /= static_cast<double>(curves);
  for (auto &v : report.convergence_mean)
    v /= static_cast<double>(curves);
}

inline void compare_to_baseline(AlgorithmReport &report, const AlgorithmReport &baseline, const BenchSpec &spec) {
  for (std::size_t slot = 0; slot < spec.metrics.size(); ++slot) {
    MetricSummary &s = report.metrics[slot];
    const std::vector<double> a = report.rms_values(slot);
    const std::vector<double> b = baseline.rms_values(slot);
    if (a.size() >= 2 && b.size() >= 2) {
      const TTest test = welch_t(a, b);
      s.t_statistic = test.t_statistic;
      s.p_value = test.p_value;
    }
    const double base_mean = baseline.metrics[slot].mean;
    if (std::isfinite(s.mean) && s.mean > 0.0 && std::isfinite(base_mean))
      s.gain_percent = gain_percent(base_mean, s.mean);
  }
}

} // namespace detail

/// Monte Carlo benchmark: every algorithm runs `runs` times on one cube with
/// per-run seeds derived from the master seed, is matched against the
/// reference, and is summarised against the baseline. Output is independent
/// of `jobs`.
inline BenchReport run_bench(const BenchSpec &spec, const SpectralCube &cube) {
  spec.validate(cube);
  ReductionCache cache(cube);
  const std::size_t n_alg = spec.algorithms.size();
  const std::size_t total = n_alg * spec.runs;

  std::vector<RunResult> slots(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++)
      slots[task] = detail::execute_run(cache, spec, task / spec.runs, task % spec.runs);
  };
  const std::size_t threads = std::min(spec.jobs, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }

  BenchReport report;
  report.runs = spec.runs;
  report.endmembers = spec.reference.count();
  report.bands = cube.bands();
  report.pixels = cube.pixels();
  report.master_seed = spec.master_seed;
  report.baseline = spec.baseline;
  report.metrics = spec.metrics;
  for (std::size_t a = 0; a < n_alg; ++a) {
    AlgorithmReport ar;
    ar.name = spec.algorithms[a].name;
    for (std::size_t k = 0; k < spec.runs; ++k)
      ar.runs.push_back(std::move(slots[a * spec.runs + k]));
    detail::summarise(ar, spec);
    report.algorithms.push_back(std::move(ar));
  }
  const AlgorithmReport baseline = *report.find(spec.baseline);
  for (auto &ar : report.algorithms)
    detail::compare_to_baseline(ar, baseline, spec);
  return report;
}

} // namespace unmix

#endif // UNMIX_HARNESS_HPP
