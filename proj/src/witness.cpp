#include "witnesskit/witness.hpp"

#include <cmath>
#include <limits>

#include "witnesskit/errors.hpp"

namespace wkit {

void LocalObservable::validate() const {
  if (matrix.rows() != matrix.cols()) throw ValidationError("observable matrix not square");
  if (matrix.hermiticity_defect() > 1e-12)
    throw ValidationError("observable '" + label + "' not Hermitian within 1e-12");
}

std::string MeasurementSetting::label() const {
  std::string s;
  for (const auto& o : observables) s += o.label;
  return s;
}

namespace {

bool proportional_to_identity(const CMat& m, double tol) {
  const cplx scale = m.trace() / static_cast<double>(m.rows());
  CMat d = m;
  for (int i = 0; i < m.rows(); ++i) d(i, i) -= scale;
  return d.max_abs() <= tol;
}

}  // namespace

void WitnessDecomposition::validate() const {
  if (num_subsystems <= 0) throw ValidationError("decomposition: num_subsystems must be positive");
  if (!std::isfinite(constant)) throw ValidationError("decomposition: constant not finite");
  if (settings.empty()) throw ValidationError("decomposition: no measurement settings");
  for (const auto& s : settings) {
    if (static_cast<int>(s.observables.size()) != num_subsystems)
      throw ValidationError("setting '" + s.label() + "' does not cover all subsystems");
    for (const auto& o : s.observables) {
      o.validate();
      if (proportional_to_identity(o.matrix, 1e-10))
        throw ValidationError("setting observable '" + o.label + "' is proportional to identity");
    }
  }
  if (terms.empty()) throw ValidationError("decomposition: no terms");
  for (const auto& t : terms) {
    if (!std::isfinite(t.weight) || t.weight == 0.0)
      throw ValidationError("term weight must be finite and nonzero");
    if (t.setting < 0 || t.setting >= static_cast<int>(settings.size()))
      throw ValidationError("term references unknown setting");
    if (static_cast<int>(t.bitmask.size()) != num_subsystems)
      throw ValidationError("term bitmask length differs from subsystem count");
    bool any = false;
    for (uint8_t b : t.bitmask) {
      if (b > 1) throw ValidationError("term bitmask entries must be 0 or 1");
      any = any || (b == 1);
    }
    if (!any) throw ValidationError("term with all-zero bitmask (fold it into the constant)");
  }
}

CMat WitnessDecomposition::term_observable(size_t xi, int j) const {
  const ObservableTerm& t = terms[xi];
  const CMat& m = settings[t.setting].observables[j].matrix;
  if (t.bitmask[j]) return m;
  return CMat::identity(m.rows());
}

int WitnessDecomposition::joint_dim() const {
  int d = 1;
  for (const auto& o : settings[0].observables) d *= o.dim();
  return d;
}

void PovmModel::validate_elements(const WitnessDecomposition& decomp) const {
  if (outcomes.size() != decomp.settings.size())
    throw ValidationError("POVM model: setting count mismatch");
  for (size_t x = 0; x < outcomes.size(); ++x) {
    if (static_cast<int>(outcomes[x].size()) != decomp.num_subsystems)
      throw ValidationError("POVM model: subsystem count mismatch at setting " + std::to_string(x));
    for (int j = 0; j < decomp.num_subsystems; ++j) {
      const auto& set = outcomes[x][j];
      if (set.empty()) throw ValidationError("POVM model: empty outcome set");
      const int d = decomp.settings[x].observables[j].dim();
      CMat sum(d, d);
      for (size_t k = 0; k < set.size(); ++k) {
        const auto& out = set[k];
        if (out.element.rows() != d || out.element.cols() != d)
          throw ValidationError("POVM element dimension mismatch");
        if (min_eigenvalue(out.element) < -1e-10)
          throw ValidationError("POVM element not positive semidefinite");
        sum += out.element;
        for (size_t l = 0; l < k; ++l)
          if (out.value == set[l].value)
            throw ValidationError("POVM outcome values not pairwise distinct");
      }
      if ((sum - CMat::identity(d)).max_abs() > 1e-10)
        throw ValidationError("POVM elements do not sum to identity within 1e-10");
    }
  }
}

void PovmModel::validate(const WitnessDecomposition& decomp) const {
  validate_elements(decomp);
  for (size_t x = 0; x < outcomes.size(); ++x) {
    for (int j = 0; j < decomp.num_subsystems; ++j) {
      const int d = decomp.settings[x].observables[j].dim();
      CMat weighted(d, d);
      for (const auto& out : outcomes[x][j]) weighted += out.value * out.element;
      if ((weighted - decomp.settings[x].observables[j].matrix).max_abs() > 1e-10)
        throw ValidationError("POVM does not realize the setting observable within 1e-10");
    }
  }
}

void SettingDistribution::validate() const {
  if (p.empty()) throw ValidationError("setting distribution: empty");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0)) throw ValidationError("setting distribution: probabilities must be positive");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw ValidationError("setting distribution sums to " + std::to_string(sum));
}

double SettingDistribution::min_probability() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : p) m = std::min(m, v);
  return m;
}

SettingDistribution recommended_setting_distribution(const WitnessDecomposition& decomp) {
  decomp.validate();
  SettingDistribution dist;
  dist.p.assign(decomp.settings.size(), 0.0);
  double total = 0.0;
  for (const auto& t : decomp.terms) {
    dist.p[t.setting] += std::abs(t.weight);
    total += std::abs(t.weight);
  }
  if (total <= 0.0) throw ValidationError("recommended distribution: all weights vanish");
  for (double& v : dist.p) v /= total;
  dist.validate();
  return dist;
}

double score(const WitnessDecomposition& decomp, const SettingDistribution& dist, int setting,
             const std::vector<double>& outcome) {
  if (setting < 0 || setting >= static_cast<int>(dist.p.size()))
    throw DomainError("score: setting index out of range");
  if (static_cast<int>(outcome.size()) != decomp.num_subsystems)
    throw DomainError("score: outcome vector length differs from subsystem count");
  double s = 0.0;
  for (const auto& t : decomp.terms) {
    if (t.setting != setting) continue;
    double prod = t.weight;
    for (int j = 0; j < decomp.num_subsystems; ++j)
      if (t.bitmask[j]) prod *= outcome[j];
    s += prod;
  }
  return -s / dist.p[setting];
}

namespace {

void check_outcome_membership(const PovmModel& povm, int setting,
                              const std::vector<double>& outcome) {
  for (size_t j = 0; j < outcome.size(); ++j) {
    bool found = false;
    for (const auto& out : povm.outcomes[setting][j])
      if (std::abs(out.value - outcome[j]) <= 1e-9) {
        found = true;
        break;
      }
    if (!found)
      throw DomainError("score: outcome " + std::to_string(outcome[j]) +
                        " not in the outcome set of setting " + std::to_string(setting) +
                        ", subsystem " + std::to_string(j));
  }
}

}  // namespace

double score(const WitnessDecomposition& decomp, const SettingDistribution& dist,
             const PovmModel& povm, int setting, const std::vector<double>& outcome) {
  if (setting < 0 || setting >= static_cast<int>(dist.p.size()))
    throw DomainError("score: setting index out of range");
  check_outcome_membership(povm, setting, outcome);
  return score(decomp, dist, setting, outcome);
}

namespace {

// Visit every joint outcome tuple of one setting.
template <typename Fn>
void for_each_joint_outcome(const std::vector<std::vector<PovmOutcome>>& per_subsystem, Fn&& fn) {
  const size_t m = per_subsystem.size();
  std::vector<size_t> idx(m, 0);
  while (true) {
    fn(idx);
    size_t j = m;
    bool done = true;
    while (j > 0) {
      --j;
      if (++idx[j] < per_subsystem[j].size()) {
        done = false;
        break;
      }
      idx[j] = 0;
    }
    if (done) return;
  }
}

}  // namespace

ScoreExtrema score_extrema(const WitnessDecomposition& decomp, const SettingDistribution& dist,
                           const PovmModel& povm) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> outcome(decomp.num_subsystems);
  for (size_t x = 0; x < povm.outcomes.size(); ++x) {
    if (povm.outcomes[x].empty()) throw ValidationError("score_extrema: empty outcome set");
    for_each_joint_outcome(povm.outcomes[x], [&](const std::vector<size_t>& idx) {
      for (int j = 0; j < decomp.num_subsystems; ++j)
        outcome[j] = povm.outcomes[x][j][idx[j]].value;
      const double s = score(decomp, dist, static_cast<int>(x), outcome);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    });
  }
  if (!(hi - lo > 1e-12))
    throw ValidationError("score function is constant (degenerate game)");
  return ScoreExtrema{lo, hi, hi - lo};
}

CMat reconstruct_witness(const WitnessDecomposition& decomp, const SettingDistribution& dist,
                         const PovmModel& povm) {
  const int dim = decomp.joint_dim();
  CMat w = CMat::identity(dim);
  w *= cplx(decomp.constant, 0.0);
  std::vector<double> outcome(decomp.num_subsystems);
  for (size_t x = 0; x < povm.outcomes.size(); ++x) {
    for_each_joint_outcome(povm.outcomes[x], [&](const std::vector<size_t>& idx) {
      std::vector<CMat> factors;
      factors.reserve(decomp.num_subsystems);
      for (int j = 0; j < decomp.num_subsystems; ++j) {
        factors.push_back(povm.outcomes[x][j][idx[j]].element);
        outcome[j] = povm.outcomes[x][j][idx[j]].value;
      }
      const double s = score(decomp, dist, static_cast<int>(x), outcome);
      w -= (dist.p[x] * s) * kron(factors);
    });
  }
  if (w.rows() != dim) throw ValidationError("reconstruct_witness: dimension mismatch");
  return w;
}

CMat expand_witness(const WitnessDecomposition& decomp) {
  const int dim = decomp.joint_dim();
  CMat w = CMat::identity(dim);
  w *= cplx(decomp.constant, 0.0);
  for (size_t xi = 0; xi < decomp.terms.size(); ++xi) {
    std::vector<CMat> factors;
    factors.reserve(decomp.num_subsystems);
    for (int j = 0; j < decomp.num_subsystems; ++j) factors.push_back(decomp.term_observable(xi, j));
    w += decomp.terms[xi].weight * kron(factors);
  }
  return w;
}

ReadoutPovm readout_povm(double u, double v, char pauli_label) {
  if (!(u > 0.0 && u <= 1.0 && v > 0.0 && v <= 1.0))
    throw ValidationError("readout_povm: u, v must lie in (0, 1]");
  if (!(u + v > 1.0))
    throw ValidationError("readout_povm: u + v <= 1, outcome calibration is undefined");

  CMat plus(2, 2), minus(2, 2);
  plus(0, 0) = u;
  plus(1, 1) = 1.0 - v;
  minus(0, 0) = 1.0 - u;
  minus(1, 1) = v;

  // Basis change from Z to the requested Pauli.
  CMat rot = CMat::identity(2);
  if (pauli_label == 'X') {
    const double r = 1.0 / std::sqrt(2.0);
    rot = CMat(2, 2);
    rot(0, 0) = r;
    rot(0, 1) = r;
    rot(1, 0) = r;
    rot(1, 1) = -r;
  } else if (pauli_label == 'Y') {
    const double r = 1.0 / std::sqrt(2.0);
    rot = CMat(2, 2);
    rot(0, 0) = r;
    rot(0, 1) = r;
    rot(1, 0) = cplx(0.0, r);
    rot(1, 1) = cplx(0.0, -r);
  } else if (pauli_label != 'Z') {
    throw ValidationError(std::string("readout_povm: unsupported basis '") + pauli_label + "'");
  }
  if (pauli_label != 'Z') {
    plus = matmul(matmul(rot, plus), rot.dagger());
    minus = matmul(matmul(rot, minus), rot.dagger());
  }

  ReadoutPovm r;
  r.a_plus = (v - u + 1.0) / (u + v - 1.0);
  r.a_minus = (v - u - 1.0) / (u + v - 1.0);
  r.plus = PovmOutcome{r.a_plus, std::move(plus)};
  r.minus = PovmOutcome{r.a_minus, std::move(minus)};
  return r;
}

GhzWitness ghz_projection_witness() {
  GhzWitness g;
  WitnessDecomposition& d = g.decomposition;
  d.num_subsystems = 3;
  d.constant = 3.0 / 8.0;

  auto make_setting = [](const std::string& labels) {
    MeasurementSetting s;
    for (char ch : labels) s.observables.push_back(LocalObservable{std::string(1, ch), pauli(ch)});
    return s;
  };
  d.settings = {make_setting("ZZZ"), make_setting("XXX"), make_setting("XYY"),
                make_setting("YXY"), make_setting("YYX")};

  const double w = 1.0 / 8.0;
  d.terms = {
      ObservableTerm{-w, 0, {0, 1, 1}},  // IZZ
      ObservableTerm{-w, 0, {1, 0, 1}},  // ZIZ
      ObservableTerm{-w, 0, {1, 1, 0}},  // ZZI
      ObservableTerm{-w, 1, {1, 1, 1}},  // XXX
      ObservableTerm{+w, 2, {1, 1, 1}},  // XYY
      ObservableTerm{+w, 3, {1, 1, 1}},  // YXY
      ObservableTerm{+w, 4, {1, 1, 1}},  // YYX
  };
  d.validate();

  CMat ghz(8, 8);
  const double half = 0.5;
  ghz(0, 0) = half;
  ghz(0, 7) = half;
  ghz(7, 0) = half;
  ghz(7, 7) = half;
  g.reference = CMat::identity(8);
  g.reference *= cplx(0.5, 0.0);
  g.reference -= ghz;
  return g;
}

PovmModel readout_povm_model(const WitnessDecomposition& decomp, double u, double v) {
  PovmModel povm;
  povm.outcomes.resize(decomp.settings.size());
  for (size_t x = 0; x < decomp.settings.size(); ++x) {
    for (const auto& obs : decomp.settings[x].observables) {
      if (obs.label.size() != 1)
        throw ValidationError("readout POVM model requires Pauli-labeled observables");
      const ReadoutPovm r = readout_povm(u, v, obs.label[0]);
      povm.outcomes[x].push_back({r.plus, r.minus});
    }
  }
  povm.validate(decomp);
  return povm;
}

PovmModel projective_povm_model(const WitnessDecomposition& decomp) {
  PovmModel povm;
  povm.outcomes.resize(decomp.settings.size());
  for (size_t x = 0; x < decomp.settings.size(); ++x) {
    for (const auto& obs : decomp.settings[x].observables) {
      const auto eig = eig_hermitian(obs.matrix);
      const int d = obs.dim();
      std::vector<PovmOutcome> set;
      for (int k = 0; k < d; ++k) {
        // Merge eigenprojections of (numerically) equal eigenvalues.
        PovmOutcome* existing = nullptr;
        for (auto& out : set)
          if (std::abs(out.value - eig.values[k]) <= 1e-9) existing = &out;
        CMat proj(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            proj(i, j) = eig.vectors(i, k) * std::conj(eig.vectors(j, k));
        if (existing) {
          existing->element += proj;
        } else {
          set.push_back(PovmOutcome{eig.values[k], std::move(proj)});
        }
      }
      povm.outcomes[x].push_back(std::move(set));
    }
  }
  povm.validate(decomp);
  return povm;
}

CompiledGame::CompiledGame(WitnessDecomposition decomp, SettingDistribution dist, PovmModel povm)
    : decomp_(std::move(decomp)), dist_(std::move(dist)), povm_(std::move(povm)) {
  decomp_.validate();
  dist_.validate();
  if (dist_.p.size() != decomp_.settings.size())
    throw ValidationError("setting distribution size differs from setting count");
  povm_.validate(decomp_);

  const int num_settings = static_cast<int>(decomp_.settings.size());
  joint_elements_.resize(num_settings);
  outcome_tuples_.resize(num_settings);
  scores_.resize(num_settings);
  for (int x = 0; x < num_settings; ++x) {
    for_each_joint_outcome(povm_.outcomes[x], [&](const std::vector<size_t>& idx) {
      std::vector<CMat> factors;
      std::vector<double> values(decomp_.num_subsystems);
      for (int j = 0; j < decomp_.num_subsystems; ++j) {
        factors.push_back(povm_.outcomes[x][j][idx[j]].element);
        values[j] = povm_.outcomes[x][j][idx[j]].value;
      }
      joint_elements_[x].push_back(kron(factors));
      scores_[x].push_back(score(decomp_, dist_, x, values));
      outcome_tuples_[x].push_back(std::move(values));
    });
  }
  extrema_ = score_extrema(decomp_, dist_, povm_);
}

std::vector<double> CompiledGame::outcome_probabilities(const DensityMatrix& rho,
                                                        int setting) const {
  return outcome_probabilities(rho, joint_elements_[setting]);
}

std::vector<double> CompiledGame::outcome_probabilities(
    const DensityMatrix& rho, const std::vector<CMat>& joint_elements) const {
  std::vector<double> probs(joint_elements.size());
  double total = 0.0;
  for (size_t k = 0; k < joint_elements.size(); ++k) {
    double p = real_trace_product(rho.matrix, joint_elements[k]);
    if (p < -1e-12) throw ValidationError("outcome probability below -1e-12");
    if (p < 0.0) p = 0.0;
    probs[k] = p;
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw ValidationError("outcome probabilities sum to " + std::to_string(total));
  return probs;
}

int CompiledGame::find_outcome_index(int setting, const std::vector<double>& outcome) const {
  const auto& tuples = outcome_tuples_[setting];
  for (size_t k = 0; k < tuples.size(); ++k) {
    bool match = true;
    for (size_t j = 0; j < outcome.size(); ++j)
      if (std::abs(tuples[k][j] - outcome[j]) > 1e-9) {
        match = false;
        break;
      }
    if (match) return static_cast<int>(k);
  }
  throw DomainError("outcome tuple not found in the outcome set of setting " +
                    std::to_string(setting));
}

}  // namespace wkit
