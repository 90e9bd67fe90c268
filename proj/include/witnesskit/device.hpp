#pragma once

#include <vector>

#include "witnesskit/rng.hpp"
#include "witnesskit/witness.hpp"

namespace wkit {

// Characterized device imperfections: tau bounds the per-round deviation of
// each setting probability, delta[j] bounds the operator-norm deviation of
// every POVM element on subsystem j.
struct DeviceNoise {
  double tau = 0.0;
  std::vector<double> delta;

  // tau >= 0 and tau < min_x p_x; all delta_j >= 0; one delta per subsystem
  void validate(const WitnessDecomposition& decomp, const SettingDistribution& dist) const;
};

struct WitnessCorrection {
  double gamma1;               // setting-probability part
  double gamma2;               // measurement part, exact product form
  double gamma2_first_order;   // sum_xi |w_xi| sum_j eps_xi^(j)
  double gamma;                // gamma1 + gamma2
};

// tau * sum_x max_a |s(x,a)|, by exhaustive outcome enumeration.
double gamma1(const WitnessDecomposition& decomp, const SettingDistribution& dist,
              const PovmModel& povm, double tau);

// sum_xi |w_xi| sum_j (prod_{k<j} (lambda_xi^(k) + eps_xi^(k))) eps_xi^(j) prod_{k>j} lambda_xi^(k)
// with eps_xi^(j) = b_j(xi) delta_j sum_{a in outcome set} |a| and
// lambda_xi^(j) the operator norm of the term's local observable.
double gamma2(const WitnessDecomposition& decomp, const PovmModel& povm,
              const std::vector<double>& delta);

double gamma2_first_order(const WitnessDecomposition& decomp, const PovmModel& povm,
                          const std::vector<double>& delta);

WitnessCorrection witness_correction(const WitnessDecomposition& decomp,
                                     const SettingDistribution& dist, const PovmModel& povm,
                                     const DeviceNoise& noise);

// c*I - sum_x p~_x sum_a s(x,a) (perturbed joint element); the operator the
// game effectively measures when the setting distribution and POVMs deviate
// from their ideal models. The perturbed POVMs must keep the ideal outcome
// sets (only the elements change).
CMat effective_operator(const WitnessDecomposition& decomp, const SettingDistribution& ideal_dist,
                        const std::vector<double>& perturbed_probabilities,
                        const PovmModel& perturbed_povm);

// Random admissible perturbation of a model within (tau, delta): a zero-sum
// probability shift bounded by tau per setting, and Hermitian element noise
// of operator norm at most delta_j that keeps every POVM complete and PSD.
struct PerturbedModel {
  std::vector<double> probabilities;
  PovmModel povm;
};
PerturbedModel random_admissible_perturbation(const WitnessDecomposition& decomp,
                                              const SettingDistribution& dist,
                                              const PovmModel& povm, const DeviceNoise& noise,
                                              Rng& rng);

}  // namespace wkit
