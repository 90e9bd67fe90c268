#include "witnesskit/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "witnesskit/errors.hpp"

namespace wkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_choose(int64_t n, int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

double log_binom_survival(int64_t n, double beta, int64_t k) {
  if (n < 0) throw DomainError("binom_survival: n must be >= 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("binom_survival: beta must lie in [0, 1]");
  if (k < 0 || k > n + 1) throw DomainError("binom_survival: k outside [0, n+1]");
  if (k <= 0) return 0.0;
  if (k == n + 1) return kNegInf;
  if (beta == 0.0) return kNegInf;  // k >= 1 here
  if (beta == 1.0) return 0.0;

  const double log_beta = std::log(beta);
  const double log_1mb = std::log1p(-beta);
  double term = log_choose(n, k) + k * log_beta + (n - k) * log_1mb;
  double acc = term;
  for (int64_t l = k + 1; l <= n; ++l) {
    // ratio pmf(l)/pmf(l-1)
    const double log_ratio =
        std::log(static_cast<double>(n - l + 1) / static_cast<double>(l)) + log_beta - log_1mb;
    term += log_ratio;
    acc = log_add(acc, term);
    // Past the mode the terms decay geometrically; once the full remaining
    // tail is negligible against the accumulated sum, stop.
    if (log_ratio < 0.0 && term - acc < -40.0) {
      const double log_tail_bound = term - std::log1p(-std::exp(log_ratio));
      if (log_tail_bound - acc < -40.0) break;
    }
  }
  return std::min(acc, 0.0);
}

double binom_survival(int64_t n, double beta, int64_t k) {
  return std::exp(log_binom_survival(n, beta, k));
}

double log_f_circ(int64_t n, double beta, double x) {
  if (!(x >= 0.0 && x <= static_cast<double>(n) + 1.0))
    throw DomainError("f_circ: x outside [0, n+1]");
  const double fl = std::floor(x);
  const double frac = x - fl;
  const int64_t k = static_cast<int64_t>(fl);
  if (frac == 0.0) return log_binom_survival(n, beta, k);
  const double lo = log_binom_survival(n, beta, k);
  const double hi = log_binom_survival(n, beta, k + 1);
  if (lo == kNegInf || hi == kNegInf) return kNegInf;  // frac > 0, so the zero factor wins
  return (1.0 - frac) * lo + frac * hi;
}

double f_circ(int64_t n, double beta, double x) { return std::exp(log_f_circ(n, beta, x)); }

double beta_param(double c, double gamma, double s_min, double delta_s) {
  if (!(delta_s > 0.0)) throw DomainError("beta_param: delta_s must be positive");
  if (!(gamma >= 0.0)) throw DomainError("beta_param: gamma must be >= 0");
  const double raw = (c + gamma - s_min) / delta_s;
  if (raw < 0.0)
    throw ValidationError("beta_param: c + gamma < s_min, not a valid witness model");
  return std::min(1.0, raw);
}

double log_p_value_bound(double t_n, int64_t n, double beta) {
  if (!(t_n >= 0.0 && t_n <= static_cast<double>(n)))
    throw DomainError("p_value_bound: t_n outside [0, n]");
  return 1.0 + log_f_circ(n, beta, t_n);
}

double p_value_bound(double t_n, int64_t n, double beta) {
  return std::exp(log_p_value_bound(t_n, n, beta));
}

double total_normalized_score(const std::vector<double>& scores, double s_min, double delta_s) {
  if (!(delta_s > 0.0)) throw DomainError("total_normalized_score: delta_s must be positive");
  const double s_max = s_min + delta_s;
  double sum = 0.0, comp = 0.0;
  for (double s : scores) {
    if (s < s_min - 1e-12 || s > s_max + 1e-12)
      throw DataIntegrityError("score " + std::to_string(s) + " outside [s_min, s_max]");
    const double y = (s - s_min) / delta_s - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

double witness_estimate(const std::vector<double>& scores, double c) {
  if (scores.empty()) throw DomainError("witness_estimate: empty score list");
  double sum = 0.0, comp = 0.0;
  for (double s : scores) {
    const double y = s - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return c - sum / static_cast<double>(scores.size());
}

double confidence_radius(int64_t n, double alpha, double gamma, double delta_s) {
  if (n < 1) throw DomainError("confidence_radius: n must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("confidence_radius: alpha outside (0, 1]");
  if (!(gamma >= 0.0)) throw DomainError("confidence_radius: gamma must be >= 0");
  if (!(delta_s > 0.0)) throw DomainError("confidence_radius: delta_s must be positive");

  // alpha below e*2^-n cannot be met by the interpolated tail; fall back to
  // the almost-sure bound.
  const double log_alpha = std::log(alpha);
  if (log_alpha < 1.0 - static_cast<double>(n) * std::log(2.0)) return delta_s;

  const double nd = static_cast<double>(n);
  auto log_bound_at = [&](double eps) {
    const double x = 0.5 * nd * (1.0 + (eps - gamma) / delta_s);
    return 1.0 + log_f_circ(n, 0.5, std::min(x, nd));
  };

  double lo = gamma, hi = gamma + delta_s;
  // log_bound_at is strictly decreasing: >= log(alpha) at lo, <= at hi.
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * delta_s; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (log_bound_at(mid) > log_alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double hoeffding_p_bound(double t_n, int64_t n, double beta) {
  if (!(t_n >= 0.0 && t_n <= static_cast<double>(n)))
    throw DomainError("hoeffding_p_bound: t_n outside [0, n]");
  const double excess = std::max(t_n - static_cast<double>(n) * beta, 0.0);
  return std::exp(-2.0 * excess * excess / static_cast<double>(n));
}

double hoeffding_radius(int64_t n, double alpha, double gamma, double delta_s) {
  if (n < 1) throw DomainError("hoeffding_radius: n must be >= 1");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("hoeffding_radius: alpha outside (0, 1]");
  return gamma + delta_s * std::sqrt(2.0 * std::log(1.0 / alpha) / static_cast<double>(n));
}

std::vector<double> running_p_bounds(const std::vector<double>& scores, double c, double gamma,
                                     double s_min, double delta_s) {
  const double beta = beta_param(c, gamma, s_min, delta_s);
  // n stays fixed at the committed run length; the prefix score t_i is a
  // lower bound on the final t_n since normalized increments are nonnegative,
  // so e*F(t_i) already bounds the full experiment's p-value. The bound sits
  // at its cap e until t_i clears the binomial bulk.
  const auto n = static_cast<int64_t>(scores.size());
  std::vector<double> bounds;
  bounds.reserve(scores.size());
  double t = 0.0;
  for (double s : scores) {
    if (s < s_min - 1e-12 || s > s_min + delta_s + 1e-12)
      throw DataIntegrityError("running_p_bounds: score outside [s_min, s_max]");
    t += (s - s_min) / delta_s;
    bounds.push_back(p_value_bound(std::min(t, static_cast<double>(n)), n, beta));
  }
  return bounds;
}

RejectionResult make_rejection_result(const std::vector<double>& scores, double c, double gamma,
                                      double s_min, double delta_s, double alpha) {
  RejectionResult r;
  r.n = static_cast<int64_t>(scores.size());
  r.t_n = total_normalized_score(scores, s_min, delta_s);
  // Rounding slack in the per-score clamp can push the sum a hair past n.
  r.t_n = std::min(std::max(r.t_n, 0.0), static_cast<double>(r.n));
  r.beta = beta_param(c, gamma, s_min, delta_s);
  const double log_p = log_p_value_bound(r.t_n, r.n, r.beta);
  r.p_bound = std::exp(log_p);
  r.log10_p_bound = log_p / std::log(10.0);
  r.alpha = alpha;
  r.rejected = r.p_bound <= alpha;
  return r;
}

EstimationResult make_estimation_result(const std::vector<double>& scores, double c, double gamma,
                                        double delta_s, double alpha) {
  EstimationResult e;
  e.w_hat = witness_estimate(scores, c);
  e.epsilon = confidence_radius(static_cast<int64_t>(scores.size()), alpha, gamma, delta_s);
  e.two_sided_lo = e.w_hat - e.epsilon;
  e.two_sided_hi = e.w_hat + e.epsilon;
  e.one_sided_upper = e.w_hat + e.epsilon;
  e.alpha = alpha;
  return e;
}

}  // namespace wkit
