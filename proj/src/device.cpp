#include "witnesskit/device.hpp"

#include <cmath>

#include "witnesskit/errors.hpp"

namespace wkit {

void DeviceNoise::validate(const WitnessDecomposition& decomp,
                           const SettingDistribution& dist) const {
  if (!(tau >= 0.0)) throw ValidationError("device noise: tau must be >= 0");
  if (tau >= dist.min_probability())
    throw ValidationError("device noise: tau must stay below every setting probability");
  if (static_cast<int>(delta.size()) != decomp.num_subsystems)
    throw ValidationError("device noise: one delta per subsystem required");
  for (double d : delta)
    if (!(d >= 0.0)) throw ValidationError("device noise: delta entries must be >= 0");
}

double gamma1(const WitnessDecomposition& decomp, const SettingDistribution& dist,
              const PovmModel& povm, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("gamma1: tau must be >= 0");
  double total = 0.0;
  std::vector<double> outcome(decomp.num_subsystems);
  for (size_t x = 0; x < povm.outcomes.size(); ++x) {
    double best = 0.0;
    std::vector<size_t> idx(decomp.num_subsystems, 0);
    while (true) {
      for (int j = 0; j < decomp.num_subsystems; ++j)
        outcome[j] = povm.outcomes[x][j][idx[j]].value;
      best = std::max(best, std::abs(score(decomp, dist, static_cast<int>(x), outcome)));
      size_t j = outcome.size();
      bool done = true;
      while (j > 0) {
        --j;
        if (++idx[j] < povm.outcomes[x][j].size()) {
          done = false;
          break;
        }
        idx[j] = 0;
      }
      if (done) break;
    }
    total += best;
  }
  return tau * total;
}

namespace {

// eps_xi^(j): zero where the bitmask masks the subsystem out, otherwise
// delta_j times the summed |outcome values| of the term's setting.
double term_eps(const WitnessDecomposition& decomp, const PovmModel& povm,
                const std::vector<double>& delta, size_t xi, int j) {
  const ObservableTerm& t = decomp.terms[xi];
  if (!t.bitmask[j]) return 0.0;
  double abs_sum = 0.0;
  for (const auto& out : povm.outcomes[t.setting][j]) abs_sum += std::abs(out.value);
  return delta[j] * abs_sum;
}

double term_lambda(const WitnessDecomposition& decomp, size_t xi, int j) {
  if (!decomp.terms[xi].bitmask[j]) return 1.0;  // identity factor
  return operator_norm(decomp.settings[decomp.terms[xi].setting].observables[j].matrix);
}

}  // namespace

double gamma2(const WitnessDecomposition& decomp, const PovmModel& povm,
              const std::vector<double>& delta) {
  if (static_cast<int>(delta.size()) != decomp.num_subsystems)
    throw ValidationError("gamma2: one delta per subsystem required");
  const int m = decomp.num_subsystems;
  double total = 0.0;
  for (size_t xi = 0; xi < decomp.terms.size(); ++xi) {
    std::vector<double> eps(m), lambda(m);
    for (int j = 0; j < m; ++j) {
      eps[j] = term_eps(decomp, povm, delta, xi, j);
      lambda[j] = term_lambda(decomp, xi, j);
    }
    double per_term = 0.0;
    for (int j = 0; j < m; ++j) {
      double factor = eps[j];
      for (int k = 0; k < j; ++k) factor *= lambda[k] + eps[k];
      for (int k = j + 1; k < m; ++k) factor *= lambda[k];
      per_term += factor;
    }
    total += std::abs(decomp.terms[xi].weight) * per_term;
  }
  return total;
}

double gamma2_first_order(const WitnessDecomposition& decomp, const PovmModel& povm,
                          const std::vector<double>& delta) {
  if (static_cast<int>(delta.size()) != decomp.num_subsystems)
    throw ValidationError("gamma2_first_order: one delta per subsystem required");
  double total = 0.0;
  for (size_t xi = 0; xi < decomp.terms.size(); ++xi) {
    double eps_sum = 0.0;
    for (int j = 0; j < decomp.num_subsystems; ++j)
      eps_sum += term_eps(decomp, povm, delta, xi, j);
    total += std::abs(decomp.terms[xi].weight) * eps_sum;
  }
  return total;
}

WitnessCorrection witness_correction(const WitnessDecomposition& decomp,
                                     const SettingDistribution& dist, const PovmModel& povm,
                                     const DeviceNoise& noise) {
  noise.validate(decomp, dist);
  WitnessCorrection c;
  c.gamma1 = gamma1(decomp, dist, povm, noise.tau);
  c.gamma2 = gamma2(decomp, povm, noise.delta);
  c.gamma2_first_order = gamma2_first_order(decomp, povm, noise.delta);
  c.gamma = c.gamma1 + c.gamma2;
  return c;
}

CMat effective_operator(const WitnessDecomposition& decomp, const SettingDistribution& ideal_dist,
                        const std::vector<double>& perturbed_probabilities,
                        const PovmModel& perturbed_povm) {
  if (perturbed_probabilities.size() != ideal_dist.p.size())
    throw ValidationError("effective_operator: probability vector size mismatch");
  double sum = 0.0;
  for (double p : perturbed_probabilities) {
    if (!(p > 0.0)) throw ValidationError("effective_operator: probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw ValidationError("effective_operator: perturbed probabilities do not sum to 1");
  perturbed_povm.validate_elements(decomp);

  const int dim = decomp.joint_dim();
  CMat w = CMat::identity(dim);
  w *= cplx(decomp.constant, 0.0);
  std::vector<double> outcome(decomp.num_subsystems);
  for (size_t x = 0; x < perturbed_povm.outcomes.size(); ++x) {
    std::vector<size_t> idx(decomp.num_subsystems, 0);
    while (true) {
      std::vector<CMat> factors;
      for (int j = 0; j < decomp.num_subsystems; ++j) {
        factors.push_back(perturbed_povm.outcomes[x][j][idx[j]].element);
        outcome[j] = perturbed_povm.outcomes[x][j][idx[j]].value;
      }
      // Score keeps the ideal outcome values and ideal p_x; only the
      // implemented elements and realized probabilities move.
      const double s = score(decomp, ideal_dist, static_cast<int>(x), outcome);
      w -= (perturbed_probabilities[x] * s) * kron(factors);
      size_t j = outcome.size();
      bool done = true;
      while (j > 0) {
        --j;
        if (++idx[j] < perturbed_povm.outcomes[x][j].size()) {
          done = false;
          break;
        }
        idx[j] = 0;
      }
      if (done) break;
    }
  }
  return w;
}

PerturbedModel random_admissible_perturbation(const WitnessDecomposition& decomp,
                                              const SettingDistribution& dist,
                                              const PovmModel& povm, const DeviceNoise& noise,
                                              Rng& rng) {
  PerturbedModel out;

  // Zero-sum probability shift with every entry bounded by tau.
  const size_t ns = dist.p.size();
  std::vector<double> shift(ns, 0.0);
  if (noise.tau > 0.0 && ns > 1) {
    double mean = 0.0;
    for (auto& v : shift) {
      v = rng.uniform(-0.5 * noise.tau, 0.5 * noise.tau);
      mean += v;
    }
    mean /= static_cast<double>(ns);
    for (auto& v : shift) v -= mean;
  }
  out.probabilities.resize(ns);
  for (size_t x = 0; x < ns; ++x) out.probabilities[x] = dist.p[x] + shift[x];

  // Hermitian element noise, applied as +E to one element and -E to another
  // so completeness is exact; rescaled until both elements stay PSD.
  out.povm = povm;
  for (size_t x = 0; x < povm.outcomes.size(); ++x) {
    for (int j = 0; j < decomp.num_subsystems; ++j) {
      const double delta_j = noise.delta[j];
      if (delta_j <= 0.0) continue;
      auto& set = out.povm.outcomes[x][j];
      const int d = set[0].element.rows();
      CMat e(d, d);
      for (int r = 0; r < d; ++r) {
        e(r, r) = rng.uniform(-1.0, 1.0);
        for (int c = r + 1; c < d; ++c) {
          e(r, c) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
          e(c, r) = std::conj(e(r, c));
        }
      }
      const double norm = operator_norm(e);
      if (norm == 0.0) continue;
      double scale = rng.uniform() * delta_j / norm;
      const size_t add_to = rng.next() % set.size();
      const size_t sub_from = (add_to + 1) % set.size();
      for (int attempt = 0; attempt < 60; ++attempt) {
        CMat ep = e;
        ep *= cplx(scale, 0.0);
        const CMat a = set[add_to].element + ep;
        const CMat b = set[sub_from].element - ep;
        if (min_eigenvalue(a) >= 0.0 && min_eigenvalue(b) >= 0.0) {
          set[add_to].element = a;
          set[sub_from].element = b;
          break;
        }
        scale *= 0.5;
      }
    }
  }
  return out;
}

}  // namespace wkit
