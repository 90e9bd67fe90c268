#pragma once

#include <string>
#include <vector>

#include "witnesskit/cmatrix.hpp"
#include "witnesskit/rng.hpp"

namespace wkit {

class Rng;

// Single-qubit Pauli matrix for label 'I', 'X', 'Y' or 'Z'.
CMat pauli(char label);

// Tensor product of single-qubit Paulis, e.g. "XYZ".
CMat pauli_string(const std::string& labels);

struct DensityMatrix {
  CMat matrix;

  int dim() const { return matrix.rows(); }

  // trace 1 within 1e-10, Hermitian within 1e-12, min eigenvalue >= -1e-9
  void validate() const;
  // cheap subset of validate() without the eigendecomposition
  void validate_fast() const;
};

// Tr[rho O], asserting the imaginary residue is below 1e-10.
double expectation(const DensityMatrix& rho, const CMat& observable);

struct OutcomeDistribution {
  // entries.first: one outcome value per subsystem; entries.second: probability
  std::vector<std::pair<std::vector<double>, double>> entries;
};

struct PovmOutcome {
  double value;
  CMat element;
};

// Born-rule distribution of joint outcomes for one measurement setting,
// given the per-subsystem POVMs of that setting.
OutcomeDistribution born_distribution(const DensityMatrix& rho,
                                      const std::vector<std::vector<PovmOutcome>>& per_subsystem);

// Inverse-CDF draw; identical rng state gives the identical outcome.
std::vector<double> sample_outcome(const OutcomeDistribution& dist, Rng& rng);

struct PauliComponent {
  std::string pauli;
  double value;
};

struct StateBuildResult {
  DensityMatrix state;
  double min_eigenvalue_raw;  // before any projection
  bool projected;             // true if negative eigenvalues were clipped
};

// Reconstruct rho = 2^-m * sum_M v_M M from listed Pauli components
// (unlisted components are zero). Component tables are usually rounded, so a
// min eigenvalue down to -1e-6 is tolerated and repaired by clipping the
// negative eigenvalues and renormalizing; anything below that is rejected.
StateBuildResult state_from_pauli_components(const std::vector<PauliComponent>& components);

}  // namespace wkit
