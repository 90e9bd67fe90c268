#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "witnesskit/cmatrix.hpp"
#include "witnesskit/quantum.hpp"

namespace wkit {

// A non-identity observable measured on one subsystem.
struct LocalObservable {
  std::string label;  // symbolic tag for tables ("Z", "X", or a custom id)
  CMat matrix;        // dense Hermitian

  int dim() const { return matrix.rows(); }
  void validate() const;  // Hermitian within 1e-12, square
};

// The tuple of non-identity local observables jointly measured in a round.
struct MeasurementSetting {
  std::vector<LocalObservable> observables;  // exactly one per subsystem

  std::string label() const;
};

// One weighted product term of the witness decomposition. The term's local
// observables are the setting's observables where the bitmask is 1 and the
// identity elsewhere, so only the reference is stored.
struct ObservableTerm {
  double weight;
  int setting;                  // index into WitnessDecomposition::settings
  std::vector<uint8_t> bitmask; // length m, at least one nonzero entry
};

// W = c*I + sum_xi w_xi (X)_j O_xi^(j), with every term tied to the setting
// it is inferred from.
struct WitnessDecomposition {
  int num_subsystems = 0;
  double constant = 0.0;
  std::vector<ObservableTerm> terms;
  std::vector<MeasurementSetting> settings;

  void validate() const;

  // Local observable of term `xi` on subsystem `j` (identity when masked out).
  CMat term_observable(size_t xi, int j) const;

  int joint_dim() const;
};

// Outcome-labeled POVM per (setting, subsystem): outcomes[x][j] lists the
// (value, element) pairs realizing the setting observable.
struct PovmModel {
  std::vector<std::vector<std::vector<PovmOutcome>>> outcomes;

  // elements PSD (min eig >= -1e-10) and complete within 1e-10; values
  // pairwise distinct. Deliberately does not tie elements to the setting
  // observables, so it also covers perturbed models.
  void validate_elements(const WitnessDecomposition& decomp) const;

  // validate_elements plus: the value-weighted element sum reproduces each
  // setting observable within 1e-10.
  void validate(const WitnessDecomposition& decomp) const;
};

struct SettingDistribution {
  std::vector<double> p;

  void validate() const;  // strictly positive, sums to 1 within 1e-12
  double min_probability() const;
};

// p_x proportional to the summed |weights| of the terms inferred from x.
SettingDistribution recommended_setting_distribution(const WitnessDecomposition& decomp);

// Round score -(1/p_x) sum_{xi: f(xi)=x} w_xi prod_j a_j^(b_j(xi)).
// Outcome values are taken as given; membership in the POVM outcome sets is
// checked by the overload below and by CompiledGame.
double score(const WitnessDecomposition& decomp, const SettingDistribution& dist, int setting,
             const std::vector<double>& outcome);

// Same, after validating each outcome value against the POVM's outcome set
// (absolute tolerance 1e-9). Throws DomainError on an unknown outcome.
double score(const WitnessDecomposition& decomp, const SettingDistribution& dist,
             const PovmModel& povm, int setting, const std::vector<double>& outcome);

struct ScoreExtrema {
  double s_min;
  double s_max;
  double delta;  // s_max - s_min, always > 0
};

// Exact extrema of the score over all settings and outcome tuples, by
// exhaustive enumeration. Throws ValidationError when the score is constant.
ScoreExtrema score_extrema(const WitnessDecomposition& decomp, const SettingDistribution& dist,
                           const PovmModel& povm);

// c*I - sum_x p_x sum_a s(x,a) (Pi_a1 (X) ... (X) Pi_am); equals the direct
// term expansion for any valid model.
CMat reconstruct_witness(const WitnessDecomposition& decomp, const SettingDistribution& dist,
                         const PovmModel& povm);

// Direct expansion c*I + sum_xi w_xi (X)_j O_xi^(j).
CMat expand_witness(const WitnessDecomposition& decomp);

// Two-outcome POVM implementing a single-qubit Pauli with readout fidelities
// u (for the +1 eigenstate) and v (for the -1 eigenstate); the calibrated
// outcome values (v-u+1)/(u+v-1) and (v-u-1)/(u+v-1) make the weighted
// element sum reproduce the Pauli exactly. Requires u+v > 1.
struct ReadoutPovm {
  PovmOutcome plus;
  PovmOutcome minus;
  double a_plus;
  double a_minus;
};
ReadoutPovm readout_povm(double u, double v, char pauli_label);

struct GhzWitness {
  WitnessDecomposition decomposition;
  CMat reference;  // I/2 - |GHZ><GHZ|
};

// Three-qubit GHZ projection witness in its five-setting Pauli decomposition
// (c = 3/8; settings ZZZ, XXX, XYY, YXY, YYX).
GhzWitness ghz_projection_witness();

// POVM model assigning the (u, v) readout POVM to every Pauli observable of
// every setting. Requires all setting observables to be single-qubit Paulis.
PovmModel readout_povm_model(const WitnessDecomposition& decomp, double u, double v);

// Projective POVM model from the spectral decomposition of each setting
// observable (outcomes are the eigenvalues, merged when degenerate).
PovmModel projective_povm_model(const WitnessDecomposition& decomp);

// Precomputed per-setting joint POVM elements, outcome tuples and scores;
// the hot path for simulation and for outcome-set enumeration.
class CompiledGame {
 public:
  CompiledGame(WitnessDecomposition decomp, SettingDistribution dist, PovmModel povm);

  const WitnessDecomposition& decomposition() const { return decomp_; }
  const SettingDistribution& distribution() const { return dist_; }
  const PovmModel& povm() const { return povm_; }

  int num_settings() const { return static_cast<int>(dist_.p.size()); }
  int num_joint_outcomes(int setting) const { return static_cast<int>(scores_[setting].size()); }

  double score_value(int setting, int joint_outcome) const { return scores_[setting][joint_outcome]; }
  const std::vector<double>& outcome_values(int setting, int joint_outcome) const {
    return outcome_tuples_[setting][joint_outcome];
  }
  const CMat& joint_element(int setting, int joint_outcome) const {
    return joint_elements_[setting][joint_outcome];
  }

  const ScoreExtrema& extrema() const { return extrema_; }
  double constant() const { return decomp_.constant; }

  // Outcome probabilities for one setting (Born's rule), in joint-outcome order.
  std::vector<double> outcome_probabilities(const DensityMatrix& rho, int setting) const;
  // Same but with caller-supplied joint elements (e.g. per-round noisy POVMs).
  std::vector<double> outcome_probabilities(const DensityMatrix& rho,
                                            const std::vector<CMat>& joint_elements) const;

  // Locate a recorded outcome tuple (absolute tolerance 1e-9 per entry);
  // throws DomainError when no joint outcome matches.
  int find_outcome_index(int setting, const std::vector<double>& outcome) const;

 private:
  WitnessDecomposition decomp_;
  SettingDistribution dist_;
  PovmModel povm_;
  std::vector<std::vector<CMat>> joint_elements_;
  std::vector<std::vector<std::vector<double>>> outcome_tuples_;
  std::vector<std::vector<double>> scores_;
  ScoreExtrema extrema_;
};

}  // namespace wkit
