#ifndef CHORDLAB_EXPERIMENT_HPP
#define CHORDLAB_EXPERIMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "chordlab/engine.hpp"
#include "chordlab/observatory.hpp"
#include "chordlab/theory.hpp"

namespace chordlab {
namespace experiment {

/// Sweep description: grid of (r, alpha, N) at fixed K, S.
struct ExperimentSpec {
  std::uint64_t K = std::uint64_t{1} << 20;
  int S = 6;
  std::vector<double> N_values{1000};
  std::vector<double> r_values{200, 500, 1000, 2000};
  std::vector<double> alpha_values{0.25, 0.5, 0.75};
  int trials = 100;
  double lambda_f = 1.0;  // 0 selects the zero-churn probe path
  long warmup_events = 0;      // 0: auto (finger relaxation scale)
  long measure_events = 0;     // 0: auto (20 * N)
  long snapshot_interval = 0;  // 0: auto (N)
  int probes_per_snapshot = 10;
  std::uint64_t seed_base = 1;

  static ExperimentSpec from_json_file(const std::string& path);
  static ExperimentSpec from_json_text(const std::string& text);
  void validate() const;

  /// Events until pointer-error fractions relax to steady state; the
  /// finger tables are the slow mode (rate (1-alpha) lambda_s / M).
  static long auto_warmup(double N, double r, double alpha, int M);
};

/// One flat record: a measured/predicted quantity at one grid point.
struct ResultRecord {
  std::string quantity;  // w, d, f, pbu, inconsistency, lookup_cost, ...
  int index = 0;
  std::uint64_t K = 0;
  double N = 0.0;
  int S = 0;
  double r = 0.0;
  double alpha = 0.0;
  double lambda_f = 1.0;
  int trials = 0;
  std::uint64_t seed_base = 0;
  double theory = 0.0;
  double sim_mean = 0.0;
  double sim_stderr = 0.0;
  long raw_count = 0;
};

/// Runs the full sweep; trials are independent and dispatched to an
/// OpenMP worker pool when jobs > 1 (results merged in trial order, so
/// output is identical to the serial path).
std::vector<ResultRecord> run_sweep(const ExperimentSpec& spec, int jobs = 1);

/// Serial reference for the sweep; also the jobs == 1 path.
std::vector<ResultRecord> run_sweep_serial(const ExperimentSpec& spec);

/// Runs the trials of a single grid point. Exposed for benchmarks.
std::vector<engine::TrialResult> run_point(const engine::ChurnConfig& base,
                                           int trials,
                                           std::uint64_t seed_base, int jobs);

/// One file per quantity, tab-separated with a header row.
void write_records(const std::vector<ResultRecord>& records,
                   const std::string& out_dir);
std::vector<ResultRecord> read_records(const std::string& dir);

struct ComparisonRow {
  ResultRecord record;
  double z = 0.0;
  double rel_err = 0.0;
  std::string verdict;  // PASS / FAIL / INFO
  std::string rule;
};

/// Theory-vs-simulation verdict per record, using the per-quantity
/// tolerances of the validation suite.
std::vector<ComparisonRow> compare_records(
    const std::vector<ResultRecord>& records);

/// Column-oriented plot series for one quantity: one series per
/// (alpha, index), x = r. Returns series name -> lines.
std::map<std::string, std::string> plot_series(
    const std::vector<ResultRecord>& records, const std::string& quantity);

}  // namespace experiment
}  // namespace chordlab

#endif  // CHORDLAB_EXPERIMENT_HPP
