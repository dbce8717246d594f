#ifndef UNMIX_REPORT_IO_HPP
#define UNMIX_REPORT_IO_HPP

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "harness.hpp"
#include "io.hpp"

namespace unmix {

inline constexpr int kReportSchema = 1;

struct ReportOptions {
  /// Wall-clock fields make output irreproducible, so they are opt-in.
  bool include_timing = false;
};

namespace detail {

inline nlohmann::json number_or_null(double v) {
  if (std::isfinite(v))
    return v;
  return nullptr;
}

inline nlohmann::json numbers(const std::vector<double> &values) {
  nlohmann::json out = nlohmann::json::array();
  for (double v : values)
    out.push_back(number_or_null(v));
  return out;
}

inline std::string csv_number(double v) { return std::isfinite(v) ? detail::format_double(v) : std::string("NA"); }

inline std::string csv_number(const std::optional<double> &v) { return v ? csv_number(*v) : std::string("NA"); }

} // namespace detail

inline nlohmann::json report_to_json(const BenchReport &report, const ReportOptions &options = {}) {
  using nlohmann::json;
  json root;
  root["schema"] = kReportSchema;
  root["runs"] = report.runs;
  root["endmembers"] = report.endmembers;
  root["bands"] = report.bands;
  root["pixels"] = report.pixels;
  root["master_seed"] = report.master_seed;
  root["baseline"] = report.baseline;
  root["gain_definition"] = "100 * (baseline_mean - candidate_mean) / candidate_mean";
  json metrics = json::array();
  for (Metric m : report.metrics)
    metrics.push_back(std::string(to_string(m)));
  root["metrics"] = metrics;

  json algorithms = json::array();
  for (const auto &a : report.algorithms) {
    json ja;
    ja["name"] = a.name;
    ja["failures"] = a.failures;
    if (options.include_timing)
      ja["mean_seconds"] = a.mean_seconds;
    json summaries = json::object();
    for (std::size_t slot = 0; slot < a.metrics.size(); ++slot) {
      const MetricSummary &s = a.metrics[slot];
      json js;
      js["mean"] = detail::number_or_null(s.mean);
      js["std"] = detail::number_or_null(s.std);
      js["t_statistic"] = detail::number_or_null(s.t_statistic);
      js["p_value"] = detail::number_or_null(s.p_value);
      js["gain_percent"] = s.gain_percent ? json(*s.gain_percent) : json(nullptr);
      js["best_run"] = s.best_run ? json(*s.best_run) : json(nullptr);
      js["best_run_scores"] = detail::numbers(s.best_run_scores);
      js["mean_scores"] = detail::numbers(s.mean_scores);
      js["sid_shift_runs"] = s.sid_shift_runs;
      summaries[std::string(to_string(s.metric))] = js;
    }
    ja["statistics"] = summaries;

    json runs = json::array();
    for (const auto &r : a.runs) {
      json jr;
      jr["run"] = r.run;
      jr["seed"] = r.seed;
      jr["ok"] = r.ok;
      if (!r.ok)
        jr["error"] = r.error;
      jr["indices"] = r.indices;
      jr["volume"] = detail::number_or_null(r.volume);
      if (options.include_timing)
        jr["seconds"] = r.seconds;
      json per_metric = json::object();
      for (std::size_t slot = 0; slot < r.metrics.size(); ++slot) {
        json jm;
        jm["rms"] = detail::number_or_null(r.metrics[slot].rms);
        jm["scores"] = detail::numbers(r.metrics[slot].scores);
        jm["matched_columns"] = r.metrics[slot].matched_columns;
        jm["sid_shifted"] = r.metrics[slot].sid_shifted;
        per_metric[std::string(to_string(report.metrics[slot]))] = jm;
      }
      jr["metrics"] = per_metric;
      runs.push_back(jr);
    }
    ja["runs"] = runs;
    if (!a.convergence_best.empty()) {
      ja["convergence"] = {{"best_fitness", detail::numbers(a.convergence_best)},
                           {"mean_fitness", detail::numbers(a.convergence_mean)}};
    }
    algorithms.push_back(ja);
  }
  root["algorithms"] = algorithms;
  return root;
}

/// Per-endmember table: one row per reference endmember plus an RMS row,
/// one column per algorithm. `best_run` selects the best-run scores,
/// otherwise the per-endmember mean over runs.
inline std::string endmember_table_csv(const BenchReport &report, std::size_t slot, bool best_run) {
  std::string out = "endmember";
  for (const auto &a : report.algorithms)
    out += "," + a.name;
  out += '\n';
  auto column = [&](const AlgorithmReport &a) -> const std::vector<double> & {
    return best_run ? a.metrics[slot].best_run_scores : a.metrics[slot].mean_scores;
  };
  for (std::size_t e = 0; e < report.endmembers; ++e) {
    out += "e" + std::to_string(e + 1);
    for (const auto &a : report.algorithms) {
      const auto &col = column(a);
      out += "," + (e < col.size() ? detail::csv_number(col[e]) : std::string("NA"));
    }
    out += '\n';
  }
  out += "RMS";
  for (const auto &a : report.algorithms) {
    const auto &col = column(a);
    out += "," + (col.empty() ? std::string("NA") : detail::csv_number(rms(col)));
  }
  out += '\n';
  return out;
}

/// Statistics table: Mean / Std / t / p / Gain (/ Time) rows per algorithm.
inline std::string statistics_table_csv(const BenchReport &report, std::size_t slot, const ReportOptions &options) {
  std::string out = "statistic";
  for (const auto &a : report.algorithms)
    out += "," + a.name;
  out += '\n';
  auto row = [&](const std::string &label, auto getter) {
    out += label;
    for (const auto &a : report.algorithms)
      out += "," + getter(a);
    out += '\n';
  };
  row("mean", [&](const AlgorithmReport &a) { return detail::csv_number(a.metrics[slot].mean); });
  row("std", [&](const AlgorithmReport &a) { return detail::csv_number(a.metrics[slot].std); });
  row("t_statistic", [&](const AlgorithmReport &a) { return detail::csv_number(a.metrics[slot].t_statistic); });
  row("p_value", [&](const AlgorithmReport &a) { return detail::csv_number(a.metrics[slot].p_value); });
  row("gain_percent=100*(baseline-candidate)/candidate",
      [&](const AlgorithmReport &a) { return detail::csv_number(a.metrics[slot].gain_percent); });
  if (options.include_timing)
    row("time_seconds", [&](const AlgorithmReport &a) { return detail::csv_number(a.mean_seconds); });
  row("successful_runs", [&](const AlgorithmReport &a) { return std::to_string(a.runs.size() - a.failures); });
  return out;
}

/// Raw per-run values: one row per (algorithm, run, metric).
inline std::string runs_csv(const BenchReport &report, const ReportOptions &options) {
  std::string out = "algorithm,run,seed,status,metric,rms,volume";
  if (options.include_timing)
    out += ",seconds";
  for (std::size_t e = 0; e < report.endmembers; ++e)
    out += ",e" + std::to_string(e + 1);
  out += '\n';
  for (const auto &a : report.algorithms)
    for (const auto &r : a.runs)
      for (std::size_t slot = 0; slot < report.metrics.size(); ++slot) {
        out += a.name + "," + std::to_string(r.run) + "," + std::to_string(r.seed) + "," + (r.ok ? "ok" : "failed") +
               "," + std::string(to_string(report.metrics[slot])) + ",";
        if (r.ok) {
          out += detail::csv_number(r.metrics[slot].rms) + "," + detail::csv_number(r.volume);
        } else {
          out += "NA,NA";
        }
        if (options.include_timing)
          out += "," + detail::csv_number(r.seconds);
        for (std::size_t e = 0; e < report.endmembers; ++e)
          out += "," + (r.ok ? detail::csv_number(r.metrics[slot].scores[e]) : std::string("NA"));
        out += '\n';
      }
  return out;
}

/// Generation-by-generation convergence records.
inline std::string convergence_csv(const std::vector<GenerationRecord> &records) {
  std::string out = "generation,best_fitness,mean_fitness\n";
  for (const auto &r : records)
    out += std::to_string(r.generation) + "," + detail::format_double(r.best_fitness) + "," + detail::format_double(r.mean_fitness) +
           '\n';
  return out;
}

/// Reference and matched extracted signatures side by side, per band.
inline std::string signature_pairs_csv(const EndmemberSet &extracted, const EndmemberSet &reference, Metric metric) {
  const auto pairs = match_endmembers(extracted, reference, metric);
  std::string out = "band";
  for (const auto &m : pairs)
    out += ",reference_e" + std::to_string(m.reference + 1) + ",extracted_e" + std::to_string(m.reference + 1);
  out += '\n';
  for (std::size_t l = 0; l < reference.bands(); ++l) {
    out += std::to_string(l);
    for (const auto &m : pairs) {
      out += "," + detail::format_double(reference.spectra()(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m.reference)));
      out += "," + detail::format_double(extracted.spectra()(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m.extracted)));
    }
    out += '\n';
  }
  return out;
}

/// Writes `<prefix>_<metric>_endmembers_best.csv`, `..._endmembers_mean.csv`,
/// `..._statistics.csv` per metric and `<prefix>_runs.csv`. Returns the paths.
inline std::vector<std::filesystem::path> write_report_csv(const BenchReport &report, const std::string &prefix,
                                                           const ReportOptions &options = {}) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string &suffix, const std::string &text) {
    std::filesystem::path path = prefix + suffix;
    detail::write_all(path, text);
    written.push_back(path);
  };
  for (std::size_t slot = 0; slot < report.metrics.size(); ++slot) {
    const std::string m(to_string(report.metrics[slot]));
    emit("_" + m + "_endmembers_best.csv", endmember_table_csv(report, slot, true));
    emit("_" + m + "_endmembers_mean.csv", endmember_table_csv(report, slot, false));
    emit("_" + m + "_statistics.csv", statistics_table_csv(report, slot, options));
  }
  emit("_runs.csv", runs_csv(report, options));
  return written;
}

inline void write_report_json(const BenchReport &report, const std::filesystem::path &path,
                              const ReportOptions &options = {}) {
  detail::write_all(path, report_to_json(report, options).dump(2) + "\n");
}

} // namespace unmix

#endif // UNMIX_REPORT_IO_HPP
