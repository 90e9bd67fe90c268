#pragma once

#include <cstdint>
#include <vector>

namespace wkit {

// All tail computations run in log space: the sweep outputs span p-values far
// below anything representable as a linear product of doubles.

// log of the binomial survival function  F(k) = sum_{l=k}^n C(n,l) p^l (1-p)^(n-l),
// with F(k) = 1 for k <= 0 and F(n+1) = 0. Accurate for n up to ~1e6 and tail
// values down past 1e-300. Throws DomainError for k outside [0, n+1].
double log_binom_survival(int64_t n, double beta, int64_t k);

double binom_survival(int64_t n, double beta, int64_t k);

// Log-linear interpolation of the survival function:
// F(floor(x))^(1-frac) * F(floor(x)+1)^frac with 0^0 = 1, so integer x
// reproduces F(x) exactly. Domain [0, n+1].
double log_f_circ(int64_t n, double beta, double x);

double f_circ(int64_t n, double beta, double x);

// beta = min(1, (c + gamma - s_min) / delta_s). A negative value cannot occur
// for a valid witness model and raises ValidationError.
double beta_param(double c, double gamma, double s_min, double delta_s);

// e * F_circ(t_n); nonincreasing in t_n, at most e.
double p_value_bound(double t_n, int64_t n, double beta);
double log_p_value_bound(double t_n, int64_t n, double beta);

// sum_i (s_i - s_min) / delta_s, in [0, n]. Scores outside [s_min, s_max]
// (with 1e-12 slack) raise DataIntegrityError.
double total_normalized_score(const std::vector<double>& scores, double s_min, double delta_s);

// c - mean(scores)
double witness_estimate(const std::vector<double>& scores, double c);

// Confidence radius: alpha < e*2^-n returns delta_s; otherwise the unique
// eps in [gamma, gamma + delta_s] with alpha = e * F_circ_{n,1/2}(n/2 * (1 + (eps-gamma)/delta_s)),
// found by bisection (the interpolated survival function is strictly
// decreasing and continuous there). The bracket is narrowed below
// 1e-12 * delta_s.
double confidence_radius(int64_t n, double alpha, double gamma, double delta_s);

// Looser closed-form alternatives.
double hoeffding_p_bound(double t_n, int64_t n, double beta);
double hoeffding_radius(int64_t n, double alpha, double gamma, double delta_s);

// Bound after each prefix of the score sequence, with n fixed at the full
// (committed) run length: unplayed rounds can only raise the total normalized
// score, so e*F_circ(t_i) already bounds the final p-value. Diagnostic only:
// the test parameters must be fixed before the experiment, so these values
// must not drive a stopping rule.
std::vector<double> running_p_bounds(const std::vector<double>& scores, double c, double gamma,
                                     double s_min, double delta_s);

struct RejectionResult {
  double t_n;
  double beta;
  double p_bound;
  double log10_p_bound;
  int64_t n;
  bool rejected;
  double alpha;
};

struct EstimationResult {
  double w_hat;
  double epsilon;
  double two_sided_lo;
  double two_sided_hi;
  double one_sided_upper;
  double alpha;
};

RejectionResult make_rejection_result(const std::vector<double>& scores, double c, double gamma,
                                      double s_min, double delta_s, double alpha);

EstimationResult make_estimation_result(const std::vector<double>& scores, double c, double gamma,
                                        double delta_s, double alpha);

}  // namespace wkit
