#include "witnesskit/quantum.hpp"

#include <cmath>

#include "witnesskit/errors.hpp"
#include "witnesskit/rng.hpp"

namespace wkit {

CMat pauli(char label) {
  CMat m(2, 2);
  switch (label) {
    case 'I':
      m(0, 0) = 1.0;
      m(1, 1) = 1.0;
      break;
    case 'X':
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      break;
    case 'Y':
      m(0, 1) = cplx(0.0, -1.0);
      m(1, 0) = cplx(0.0, 1.0);
      break;
    case 'Z':
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      break;
    default:
      throw ValidationError(std::string("pauli: unknown label '") + label + "'");
  }
  return m;
}

CMat pauli_string(const std::string& labels) {
  if (labels.empty()) throw ValidationError("pauli_string: empty label");
  CMat acc = pauli(labels[0]);
  for (size_t i = 1; i < labels.size(); ++i) acc = kron(acc, pauli(labels[i]));
  return acc;
}

void DensityMatrix::validate_fast() const {
  if (matrix.rows() != matrix.cols()) throw ValidationError("density matrix not square");
  if (std::abs(matrix.trace().real() - 1.0) > 1e-10 || std::abs(matrix.trace().imag()) > 1e-10)
    throw ValidationError("density matrix trace differs from 1 by more than 1e-10");
  if (matrix.hermiticity_defect() > 1e-12)
    throw ValidationError("density matrix not Hermitian within 1e-12");
}

void DensityMatrix::validate() const {
  validate_fast();
  if (min_eigenvalue(matrix) < -1e-9)
    throw ValidationError("density matrix has eigenvalue below -1e-9");
}

double expectation(const DensityMatrix& rho, const CMat& observable) {
  if (rho.dim() != observable.rows()) throw ValidationError("expectation: dimension mismatch");
  cplx t = 0.0;
  for (int i = 0; i < rho.dim(); ++i)
    for (int j = 0; j < rho.dim(); ++j) t += rho.matrix(i, j) * observable(j, i);
  if (std::abs(t.imag()) > 1e-10)
    throw ValidationError("expectation: imaginary residue above 1e-10 (non-Hermitian input?)");
  return t.real();
}

OutcomeDistribution born_distribution(const DensityMatrix& rho,
                                      const std::vector<std::vector<PovmOutcome>>& per_subsystem) {
  if (per_subsystem.empty()) throw ValidationError("born_distribution: no subsystems");
  int joint_dim = 1;
  for (const auto& povm : per_subsystem) {
    if (povm.empty()) throw ValidationError("born_distribution: empty outcome set");
    joint_dim *= povm[0].element.rows();
  }
  if (joint_dim != rho.dim())
    throw ValidationError("born_distribution: joint POVM dimension does not match state");

  const size_t m = per_subsystem.size();
  std::vector<size_t> idx(m, 0);
  OutcomeDistribution dist;
  double total = 0.0;
  while (true) {
    std::vector<CMat> factors;
    factors.reserve(m);
    std::vector<double> values(m);
    for (size_t j = 0; j < m; ++j) {
      factors.push_back(per_subsystem[j][idx[j]].element);
      values[j] = per_subsystem[j][idx[j]].value;
    }
    double p = real_trace_product(rho.matrix, kron(factors));
    if (p < -1e-12) throw ValidationError("born_distribution: negative probability (invalid POVM)");
    if (p < 0.0) p = 0.0;
    total += p;
    dist.entries.emplace_back(std::move(values), p);

    size_t j = m;
    while (j > 0) {
      --j;
      if (++idx[j] < per_subsystem[j].size()) break;
      idx[j] = 0;
      if (j == 0) {
        if (std::abs(total - 1.0) > 1e-10)
          throw ValidationError("born_distribution: probabilities sum to " + std::to_string(total));
        return dist;
      }
    }
  }
}

std::vector<double> sample_outcome(const OutcomeDistribution& dist, Rng& rng) {
  if (dist.entries.empty()) throw ValidationError("sample_outcome: empty distribution");
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [values, p] : dist.entries) {
    acc += p;
    if (u < acc) return values;
  }
  return dist.entries.back().first;
}

StateBuildResult state_from_pauli_components(const std::vector<PauliComponent>& components) {
  if (components.empty()) throw ValidationError("state components: empty list");
  const size_t m = components[0].pauli.size();
  const std::string identity_label(m, 'I');
  bool has_identity = false;
  for (const auto& c : components) {
    if (c.pauli.size() != m)
      throw ValidationError("state components: inconsistent Pauli string lengths");
    if (std::abs(c.value) > 1.0 + 1e-12)
      throw ValidationError("state components: |value| > 1 for " + c.pauli);
    if (c.pauli == identity_label) {
      has_identity = true;
      if (std::abs(c.value - 1.0) > 1e-12)
        throw ValidationError("state components: identity component must be 1");
    }
  }
  if (!has_identity) throw ValidationError("state components: identity component missing");

  const int dim = 1 << m;
  CMat rho(dim, dim);
  for (const auto& c : components) rho += (c.value / dim) * pauli_string(c.pauli);

  StateBuildResult result;
  const auto eig = eig_hermitian(rho);
  result.min_eigenvalue_raw = eig.values.front();
  if (result.min_eigenvalue_raw < -1e-6)
    throw ValidationError("state components give min eigenvalue " +
                          std::to_string(result.min_eigenvalue_raw) + ", below -1e-6");
  result.projected = result.min_eigenvalue_raw < 0.0;
  if (result.projected) {
    // Clip negative eigenvalues and renormalize the trace back to 1.
    CMat fixed(dim, dim);
    double tr = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double lam = std::max(eig.values[k], 0.0);
      if (lam == 0.0) continue;
      tr += lam;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          fixed(i, j) += lam * eig.vectors(i, k) * std::conj(eig.vectors(j, k));
    }
    fixed *= cplx(1.0 / tr, 0.0);
    result.state.matrix = std::move(fixed);
  } else {
    result.state.matrix = std::move(rho);
  }
  result.state.validate();
  return result;
}

}  // namespace wkit
