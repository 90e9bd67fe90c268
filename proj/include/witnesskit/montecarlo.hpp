#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "witnesskit/experiment.hpp"

namespace wkit {

// Batched repetitions of one experiment. Repetition r always draws from
// RNG stream (master_seed, r), so the summary is identical for any thread
// count; the serial runner is the reference the parallel one is tested
// against.
struct McConfig {
  int64_t repetitions = 1;
  int64_t rounds = 1;
  double alpha = 0.05;
  double gamma = 0.0;
  SimulatedBias bias;
  uint64_t master_seed = 0;
  int threads = 0;  // 0: library default; 1: serial; n: capped at n
  int histogram_bins = 0;  // 0: Freedman-Diaconis

  const CompiledGame* game = nullptr;
  std::string config_json;  // embedded into every repetition's run record
  std::function<std::unique_ptr<StateSource>(uint64_t repetition)> source_factory;
};

struct McRow {
  int64_t repetition = 0;
  bool failed = false;
  std::string error;
  double w_hat = 0.0;
  double t_n = 0.0;
  double p_bound = 0.0;
  double log10_p_bound = 0.0;
  bool rejected = false;
  double epsilon = 0.0;
  double true_witness_mean = 0.0;
  bool covered = false;  // |true - w_hat| <= epsilon
};

struct McAggregates {
  int64_t completed = 0;
  int64_t failures = 0;
  double mean_w_hat = 0.0;
  double std_w_hat = 0.0;
  double skewness_w_hat = 0.0;  // g1 = m3 / m2^{3/2}
  double quantiles_w_hat[5] = {0, 0, 0, 0, 0};  // 5%, 25%, 50%, 75%, 95%
  double rejection_rate = 0.0;
  double coverage_rate = 0.0;
  double mean_true_witness = 0.0;
};

struct GaussianReference {
  double mean;         // the witness estimate of the run
  double std_of_mean;  // sample std of the scores / sqrt(n)
};

struct McSummary {
  std::vector<McRow> rows;
  McAggregates aggregates;
  int64_t median_repetition = -1;  // repetition realizing the median w_hat
  GaussianReference median_run_gaussian{0.0, 0.0};
};

McSummary run_monte_carlo(const McConfig& cfg);

// Plain-loop reference implementation; must produce the identical summary.
McSummary run_monte_carlo_serial(const McConfig& cfg);

// Reproduce one repetition's full run record.
RunRecord rerun_repetition(const McConfig& cfg, int64_t repetition);

GaussianReference gaussian_reference(const RunRecord& run);

// Interpolated empirical quantile (q in [0,1]) of an unsorted sample.
double quantile(std::vector<double> xs, double q);

double skewness(const std::vector<double>& xs);

struct SweepRow {
  double t_n;
  int64_t n;
  double beta;
  double p_bound;
  double log10_p_bound;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  int64_t skipped = 0;  // grid points outside the kernel domain
};

// Cartesian product of the three grids; one row per valid point.
SweepResult scaling_sweep(const std::vector<double>& t_n_grid,
                          const std::vector<int64_t>& n_grid,
                          const std::vector<double>& beta_grid);

void write_sweep_csv(const SweepResult& sweep, const std::string& path);

struct Histogram {
  double lo = 0.0;
  double bin_width = 0.0;
  std::vector<int64_t> counts;

  int64_t total() const;
};

// Freedman-Diaconis binning unless bins_override > 0.
Histogram make_histogram(const std::vector<double>& xs, int bins_override = 0);

// Minimal self-contained SVG bar chart.
void write_histogram_svg(const Histogram& h, const std::string& title, const std::string& path);

void write_mc_csv(const McSummary& summary, const std::string& path);

}  // namespace wkit
