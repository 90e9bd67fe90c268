#include "witnesskit/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "witnesskit/errors.hpp"

namespace wkit {

namespace {

void validate_config(const McConfig& cfg) {
  if (cfg.repetitions < 1) throw ValidationError("monte carlo: repetitions must be >= 1");
  if (cfg.rounds < 1) throw ValidationError("monte carlo: rounds must be >= 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
    throw ValidationError("monte carlo: alpha outside (0, 1]");
  if (!(cfg.gamma >= 0.0)) throw ValidationError("monte carlo: gamma must be >= 0");
  if (cfg.game == nullptr) throw ValidationError("monte carlo: no game");
  if (!cfg.source_factory) throw ValidationError("monte carlo: no source factory");
}

McRow run_one(const McConfig& cfg, int64_t rep) {
  McRow row;
  row.repetition = rep;
  try {
    Rng rng = Rng::stream(cfg.master_seed, static_cast<uint64_t>(rep));
    auto source = cfg.source_factory(static_cast<uint64_t>(rep));
    const RunRecord run = run_experiment(*source, *cfg.game, cfg.rounds, cfg.bias, rng,
                                         cfg.master_seed, static_cast<uint64_t>(rep),
                                         cfg.config_json);
    const RejectionResult rej = analyze_rejection(run, cfg.gamma, cfg.alpha);
    const EstimationResult est = analyze_estimation(run, cfg.gamma, cfg.alpha);
    row.w_hat = est.w_hat;
    row.t_n = rej.t_n;
    row.p_bound = rej.p_bound;
    row.log10_p_bound = rej.log10_p_bound;
    row.rejected = rej.rejected;
    row.epsilon = est.epsilon;
    row.true_witness_mean = run.true_witness_mean;
    row.covered = std::isfinite(run.true_witness_mean) &&
                  std::abs(run.true_witness_mean - est.w_hat) <= est.epsilon;
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

McSummary summarize(std::vector<McRow> rows) {
  McSummary s;
  s.rows = std::move(rows);
  std::vector<double> w_hats;
  std::vector<std::pair<double, int64_t>> w_by_rep;
  int64_t rejections = 0, covered = 0, with_truth = 0;
  double truth_sum = 0.0;
  for (const auto& r : s.rows) {
    if (r.failed) {
      ++s.aggregates.failures;
      continue;
    }
    ++s.aggregates.completed;
    w_hats.push_back(r.w_hat);
    w_by_rep.emplace_back(r.w_hat, r.repetition);
    if (r.rejected) ++rejections;
    if (std::isfinite(r.true_witness_mean)) {
      ++with_truth;
      truth_sum += r.true_witness_mean;
      if (r.covered) ++covered;
    }
  }
  if (s.aggregates.completed == 0) return s;

  const double n = static_cast<double>(w_hats.size());
  double mean = 0.0;
  for (double w : w_hats) mean += w;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double w : w_hats) {
    const double d = w - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  s.aggregates.mean_w_hat = mean;
  s.aggregates.std_w_hat = std::sqrt(m2 * n / std::max(n - 1.0, 1.0));
  s.aggregates.skewness_w_hat = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  const double qs[5] = {0.05, 0.25, 0.5, 0.75, 0.95};
  for (int i = 0; i < 5; ++i) s.aggregates.quantiles_w_hat[i] = quantile(w_hats, qs[i]);
  s.aggregates.rejection_rate = static_cast<double>(rejections) / n;
  s.aggregates.coverage_rate =
      with_truth > 0 ? static_cast<double>(covered) / static_cast<double>(with_truth) : 0.0;
  s.aggregates.mean_true_witness = with_truth > 0 ? truth_sum / with_truth : 0.0;

  // Median repetition: completed run whose estimate is closest to the median
  // from above the sorted midpoint (ties broken by repetition id).
  std::sort(w_by_rep.begin(), w_by_rep.end());
  s.median_repetition = w_by_rep[w_by_rep.size() / 2].second;
  return s;
}

void finalize(const McConfig& cfg, McSummary& s) {
  if (s.median_repetition >= 0 && cfg.rounds >= 2) {
    const RunRecord median_run = rerun_repetition(cfg, s.median_repetition);
    s.median_run_gaussian = gaussian_reference(median_run);
  }
}

}  // namespace

McSummary run_monte_carlo_serial(const McConfig& cfg) {
  validate_config(cfg);
  std::vector<McRow> rows(static_cast<size_t>(cfg.repetitions));
  for (int64_t rep = 0; rep < cfg.repetitions; ++rep) rows[static_cast<size_t>(rep)] = run_one(cfg, rep);
  McSummary s = summarize(std::move(rows));
  finalize(cfg, s);
  return s;
}

McSummary run_monte_carlo(const McConfig& cfg) {
  validate_config(cfg);
  if (cfg.threads == 1) return run_monte_carlo_serial(cfg);
  std::vector<McRow> rows(static_cast<size_t>(cfg.repetitions));
#ifdef _OPENMP
  const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int64_t rep = 0; rep < cfg.repetitions; ++rep)
    rows[static_cast<size_t>(rep)] = run_one(cfg, rep);
#else
  for (int64_t rep = 0; rep < cfg.repetitions; ++rep)
    rows[static_cast<size_t>(rep)] = run_one(cfg, rep);
#endif
  McSummary s = summarize(std::move(rows));
  finalize(cfg, s);
  return s;
}

RunRecord rerun_repetition(const McConfig& cfg, int64_t repetition) {
  validate_config(cfg);
  Rng rng = Rng::stream(cfg.master_seed, static_cast<uint64_t>(repetition));
  auto source = cfg.source_factory(static_cast<uint64_t>(repetition));
  return run_experiment(*source, *cfg.game, cfg.rounds, cfg.bias, rng, cfg.master_seed,
                        static_cast<uint64_t>(repetition), cfg.config_json);
}

GaussianReference gaussian_reference(const RunRecord& run) {
  if (run.n() < 2) throw DomainError("gaussian_reference: needs at least 2 rounds");
  const std::vector<double> scores = run.scores();
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size() - 1);
  GaussianReference g;
  g.mean = run.game.constant - mean;
  g.std_of_mean = std::sqrt(var / static_cast<double>(scores.size()));
  return g;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= xs.size()) return xs.back();
  return xs[lo] * (1.0 - frac) + xs[lo + 1] * frac;
}

double skewness(const std::vector<double>& xs) {
  if (xs.size() < 3) throw DomainError("skewness: needs at least 3 samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double m2 = 0.0, m3 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(xs.size());
  m3 /= static_cast<double>(xs.size());
  if (m2 <= 0.0) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

SweepResult scaling_sweep(const std::vector<double>& t_n_grid, const std::vector<int64_t>& n_grid,
                          const std::vector<double>& beta_grid) {
  SweepResult out;
  for (int64_t n : n_grid)
    for (double beta : beta_grid)
      for (double t : t_n_grid) {
        if (n < 1 || !(beta >= 0.0 && beta <= 1.0) || !(t >= 0.0 && t <= static_cast<double>(n))) {
          ++out.skipped;
          continue;
        }
        SweepRow row;
        row.t_n = t;
        row.n = n;
        row.beta = beta;
        const double log_p = log_p_value_bound(t, n, beta);
        row.p_bound = std::exp(log_p);
        row.log10_p_bound = log_p / std::log(10.0);
        out.rows.push_back(row);
      }
  return out;
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path);
  out << "t_n,n,beta,p_bound\n";
  out.precision(12);
  for (const auto& r : sweep.rows)
    out << r.t_n << ',' << r.n << ',' << r.beta << ',' << r.p_bound << '\n';
}

int64_t Histogram::total() const {
  int64_t t = 0;
  for (int64_t c : counts) t += c;
  return t;
}

Histogram make_histogram(const std::vector<double>& xs, int bins_override) {
  if (xs.empty()) throw DomainError("histogram: empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (hi <= lo) {
    h.lo = lo;
    h.bin_width = 1.0;
    h.counts = {static_cast<int64_t>(xs.size())};
    return h;
  }
  int bins = bins_override;
  if (bins <= 0) {
    std::vector<double> sorted = xs;
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(xs.size()));
    bins = width > 0.0 ? static_cast<int>(std::ceil((hi - lo) / width)) : 32;
    bins = std::clamp(bins, 1, 2048);
  }
  h.lo = lo;
  h.bin_width = (hi - lo) / bins;
  h.counts.assign(static_cast<size_t>(bins), 0);
  for (double x : xs) {
    int b = static_cast<int>((x - lo) / h.bin_width);
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<size_t>(b)];
  }
  return h;
}

void write_histogram_svg(const Histogram& h, const std::string& title, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path);
  const int width = 640, height = 400, margin = 48;
  int64_t peak = 1;
  for (int64_t c : h.counts) peak = std::max(peak, c);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  const double plot_w = width - 2.0 * margin;
  const double plot_h = height - 2.0 * margin;
  const double bar_w = plot_w / static_cast<double>(h.counts.size());
  for (size_t i = 0; i < h.counts.size(); ++i) {
    const double frac = static_cast<double>(h.counts[i]) / static_cast<double>(peak);
    const double bh = frac * plot_h;
    out << "<rect x=\"" << margin + bar_w * static_cast<double>(i) << "\" y=\""
        << height - margin - bh << "\" width=\"" << bar_w << "\" height=\"" << bh
        << "\" fill=\"steelblue\"/>\n";
  }
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out.precision(6);
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16
      << "\" font-size=\"11\">" << h.lo << "</text>\n";
  out << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 16
      << "\" text-anchor=\"end\" font-size=\"11\">"
      << h.lo + h.bin_width * static_cast<double>(h.counts.size()) << "</text>\n";
  out << "</svg>\n";
}

void write_mc_csv(const McSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path);
  out << "repetition,failed,w_hat,t_n,p_bound,log10_p_bound,rejected,epsilon,true_witness_mean,"
         "covered\n";
  out.precision(12);
  for (const auto& r : summary.rows) {
    out << r.repetition << ',' << (r.failed ? 1 : 0) << ',';
    if (r.failed) {
      out << ",,,,,,,\n";
      continue;
    }
    out << r.w_hat << ',' << r.t_n << ',' << r.p_bound << ',' << r.log10_p_bound << ','
        << (r.rejected ? 1 : 0) << ',' << r.epsilon << ',';
    if (std::isfinite(r.true_witness_mean))
      out << r.true_witness_mean << ',' << (r.covered ? 1 : 0);
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace wkit
