// unmix: synthetic scene generation, endmember extraction and benchmarking.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unmix/report_io.hpp"
#include "unmix/unmix.hpp"

namespace {

using namespace unmix;

struct GaFlags {
  std::size_t npop = 100;
  std::size_t ngen = 1000;
  std::optional<double> pm;
  std::optional<double> pc;
  std::size_t tournament = 3;
  std::size_t elite = 1;
  std::size_t skewers = 10000;
  std::size_t max_sweeps = 20;

  void attach(CLI::App &cmd) {
    cmd.add_option("--npop", npop, "GA population size")->capture_default_str();
    cmd.add_option("--ngen", ngen, "GA generations")->capture_default_str();
    cmd.add_option("--pm", pm, "GA mutation probability (default: per-variant best setting)")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--pc", pc, "GA crossover probability (default: per-variant best setting)")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--tournament", tournament, "GA tournament size")->capture_default_str();
    cmd.add_option("--elite", elite, "GA elite count")->capture_default_str();
    cmd.add_option("--skewers", skewers, "PPI skewer count")->capture_default_str();
    cmd.add_option("--max-sweeps", max_sweeps, "N-FINDR sweep limit")->capture_default_str();
  }

  ExtractorSpec spec_for(const std::string &algo, std::size_t p, std::uint64_t seed) const {
    ExtractorSpec spec = make_extractor_spec(algo, p, seed);
    spec.ppi_skewers = skewers;
    spec.nfindr_max_sweeps = max_sweeps;
    if (spec.ga) {
      spec.ga->population_size = npop;
      spec.ga->generations = ngen;
      spec.ga->tournament_size = tournament;
      spec.ga->elite_count = elite;
      if (pm)
        spec.ga->mutation_prob = *pm;
      if (pc)
        spec.ga->crossover_prob = *pc;
    }
    spec.validate();
    return spec;
  }
};

std::string algorithm_help() {
  std::string names;
  for (auto n : kAlgorithmNames)
    names += (names.empty() ? "" : ", ") + std::string(n);
  return names;
}

double parse_snr(const std::string &text) {
  if (text == "inf" || text == "noiseless")
    return kNoiseless;
  double v = 0.0;
  if (!detail::parse_double(text, v) || !std::isfinite(v))
    throw ValidationError("--snr must be a number of dB or 'noiseless'");
  return v;
}

std::vector<std::string> split_list(const std::string &text) {
  std::vector<std::string> out;
  for (auto cell : detail::split(text, ','))
    if (!cell.empty())
      out.emplace_back(cell);
  return out;
}

int run(int argc, char **argv) {
  CLI::App app{"Hyperspectral endmember extraction: synthesis, extraction and Monte Carlo benchmarking"};
  app.require_subcommand(1);

  // synth
  auto *synth = app.add_subcommand("synth", "Generate a synthetic linear-mixture scene");
  SceneSpec scene;
  std::string snr_text = "noiseless";
  std::string synth_out, synth_truth;
  bool no_pure = false;
  synth->add_option("--p", scene.endmember_count, "Number of endmembers")->capture_default_str();
  synth->add_option("--bands", scene.bands, "Spectral bands")->capture_default_str();
  synth->add_option("--side", scene.side, "Image side length (pixels = side^2)")->capture_default_str();
  synth->add_option("--snr", snr_text, "Noise level in dB, or 'noiseless'")->capture_default_str();
  synth->add_option("--seed", scene.seed, "Random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "Output cube file")->required();
  synth->add_option("--truth", synth_truth, "Output endmember CSV")->required();
  synth->add_flag("--no-pure-pixels", no_pure, "Do not plant pure pixels");

  // extract
  auto *ext = app.add_subcommand("extract", "Extract endmembers from a cube");
  std::string ext_algo = "vca", ext_cube, ext_out, ext_indices;
  std::size_t ext_p = 0;
  std::uint64_t ext_seed = 0;
  GaFlags ext_ga;
  ext->add_option("--algo", ext_algo, "Algorithm: " + algorithm_help())->capture_default_str();
  ext->add_option("--cube", ext_cube, "Input cube file")->required();
  ext->add_option("--p", ext_p, "Number of endmembers")->required();
  ext->add_option("--seed", ext_seed, "Random seed")->capture_default_str();
  ext->add_option("--out", ext_out, "Output endmember CSV")->required();
  ext->add_option("--indices", ext_indices, "Optional output file of source pixel indices");
  ext_ga.attach(*ext);

  // bench
  auto *bench = app.add_subcommand("bench", "Monte Carlo comparison of extractors against a reference");
  std::string bench_cube, bench_truth, bench_algos = "ppi,nfindr,vca,gaee,gaee-ivfm,gaee-vca,gaee-ivfm-vca";
  std::string bench_metrics = "sam,sid", bench_json, bench_csv, bench_baseline = "vca";
  std::size_t bench_runs = 50, bench_jobs = 1;
  std::uint64_t bench_seed = 0;
  bool bench_timing = false;
  GaFlags bench_ga;
  bench->add_option("--cube", bench_cube, "Input cube file")->required();
  bench->add_option("--truth", bench_truth, "Reference endmember CSV")->required();
  bench->add_option("--algos", bench_algos, "Comma-separated algorithms")->capture_default_str();
  bench->add_option("--runs", bench_runs, "Monte Carlo runs per algorithm")->capture_default_str();
  bench->add_option("--metrics", bench_metrics, "Comma-separated metrics (sam, sid)")->capture_default_str();
  bench->add_option("--baseline", bench_baseline, "Baseline algorithm for t-test and gain")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Master seed")->capture_default_str();
  bench->add_option("--jobs", bench_jobs, "Worker threads (output does not depend on it)")->capture_default_str();
  bench->add_option("--json", bench_json, "Output JSON report");
  bench->add_option("--csv", bench_csv, "Output CSV prefix");
  bench->add_flag("--timing", bench_timing, "Include wall-clock times (makes output non-reproducible)");
  bench_ga.attach(*bench);

  // plot-data
  auto *plot = app.add_subcommand("plot-data", "Emit signature-comparison and convergence CSVs");
  std::string plot_algo = "gaee-ivfm", plot_cube, plot_truth, plot_out, plot_metric = "sam";
  std::uint64_t plot_seed = 0;
  GaFlags plot_ga;
  plot->add_option("--algo", plot_algo, "Algorithm: " + algorithm_help())->capture_default_str();
  plot->add_option("--cube", plot_cube, "Input cube file")->required();
  plot->add_option("--truth", plot_truth, "Reference endmember CSV")->required();
  plot->add_option("--metric", plot_metric, "Metric used to pair signatures")->capture_default_str();
  plot->add_option("--seed", plot_seed, "Random seed")->capture_default_str();
  plot->add_option("--out", plot_out, "Output prefix")->required();
  plot_ga.attach(*plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "unmix: " << e.what() << "\n";
    return 1;
  }

  if (*synth) {
    scene.snr_db = parse_snr(snr_text);
    scene.pure_pixel_guarantee = !no_pure;
    Scene s = make_scene(scene);
    save_cube(s.cube, synth_out);
    save_spectra_csv(s.endmembers, synth_truth);
    return 0;
  }
  if (*ext) {
    const ExtractorSpec spec = ext_ga.spec_for(ext_algo, ext_p, ext_seed);
    const SpectralCube cube = load_cube(ext_cube);
    const EndmemberSet result = extract(cube, spec);
    save_spectra_csv(result, ext_out);
    if (!ext_indices.empty())
      save_indices(*result.source_indices(), ext_indices);
    return 0;
  }
  if (*bench) {
    const EndmemberSet truth = load_spectra_csv(bench_truth);
    BenchSpec spec;
    spec.reference = truth;
    spec.runs = bench_runs;
    spec.baseline = bench_baseline;
    spec.master_seed = bench_seed;
    spec.jobs = bench_jobs;
    spec.metrics.clear();
    for (const auto &m : split_list(bench_metrics))
      spec.metrics.push_back(parse_metric(m));
    for (const auto &name : split_list(bench_algos))
      spec.algorithms.push_back({name, bench_ga.spec_for(name, truth.count(), 0)});
    const SpectralCube cube = load_cube(bench_cube);
    const BenchReport report = run_bench(spec, cube);
    const ReportOptions options{bench_timing};
    if (!bench_json.empty())
      write_report_json(report, bench_json, options);
    if (!bench_csv.empty())
      write_report_csv(report, bench_csv, options);
    for (const auto &a : report.algorithms)
      if (a.failures > 0)
        std::cerr << "unmix: " << a.name << ": " << a.failures << " of " << a.runs.size() << " runs failed\n";
    return 0;
  }
  if (*plot) {
    const EndmemberSet truth = load_spectra_csv(plot_truth);
    const Metric metric = parse_metric(plot_metric);
    const ExtractorSpec spec = plot_ga.spec_for(plot_algo, truth.count(), plot_seed);
    const SpectralCube cube = load_cube(plot_cube);
    detail::require(truth.bands() == cube.bands(), "reference band count differs from cube");
    ReductionCache cache(cube);
    const Extraction x = extract_detailed(cache, spec);
    detail::write_all(plot_out + "_signatures.csv", signature_pairs_csv(x.endmembers, truth, metric));
    if (x.convergence)
      detail::write_all(plot_out + "_convergence.csv", convergence_csv(*x.convergence));
    return 0;
  }
  return 1;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const unmix::IoError &e) {
    std::cerr << "unmix: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "unmix: " << e.what() << "\n";
    return 1;
  }
}
