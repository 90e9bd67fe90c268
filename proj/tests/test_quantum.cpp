#include <doctest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "witnesskit/errors.hpp"
#include "witnesskit/quantum.hpp"
#include "witnesskit/witness.hpp"

using namespace wkit;

namespace {

DensityMatrix ghz_state() {
  CMat m(8, 8);
  m(0, 0) = 0.5;
  m(0, 7) = 0.5;
  m(7, 0) = 0.5;
  m(7, 7) = 0.5;
  return DensityMatrix{std::move(m)};
}

std::vector<PauliComponent> table4_components() {
  return {{"III", 1.0},   {"IZZ", 0.787},  {"ZIZ", 0.478},  {"ZZI", 0.608},
          {"XXX", 0.782}, {"XYY", -0.737}, {"YXY", -0.478}, {"YYX", -0.507},
          {"IIX", -0.077}, {"XXI", 0.072},  {"YYI", -0.047}, {"ZZX", -0.047}};
}

}  // namespace

TEST_CASE("expectation basics") {
  DensityMatrix mixed{CMat::identity(8)};
  mixed.matrix *= cplx(1.0 / 8.0, 0.0);
  CHECK(expectation(mixed, pauli_string("III")) == doctest::Approx(1.0));
  CHECK(expectation(ghz_state(), pauli_string("XXX")) == doctest::Approx(1.0));
  CHECK(expectation(ghz_state(), pauli_string("ZZZ")) == doctest::Approx(0.0));
}

TEST_CASE("table 4 state reproduces the published witness value") {
  const StateBuildResult built = state_from_pauli_components(table4_components());
  const GhzWitness ghz = ghz_projection_witness();
  const double w = expectation(built.state, ghz.reference);
  CHECK(std::abs(w - (-0.172)) < 5e-4);
  CHECK(expectation(built.state, pauli_string("XYY")) == doctest::Approx(-0.737).epsilon(1e-9));
  // the published components happen to form a PSD matrix already
  CHECK(built.min_eigenvalue_raw > 0.0);
  CHECK_FALSE(built.projected);
}

TEST_CASE("component list round-trips through expectation") {
  const auto comps = table4_components();
  const StateBuildResult built = state_from_pauli_components(comps);
  for (const auto& c : comps)
    CHECK(expectation(built.state, pauli_string(c.pauli)) == doctest::Approx(c.value).epsilon(1e-12));
}

TEST_CASE("identity-only component list gives the maximally mixed state") {
  const StateBuildResult built = state_from_pauli_components({{"II", 1.0}});
  for (int i = 0; i < 4; ++i)
    CHECK(built.state.matrix(i, i).real() == doctest::Approx(0.25));
}

TEST_CASE("unphysical component lists are rejected") {
  CHECK_THROWS_AS(state_from_pauli_components({{"I", 1.0}, {"Z", 1.5}}), ValidationError);
  // pure Z=1 plus X=1 is far outside the Bloch ball
  CHECK_THROWS_AS(state_from_pauli_components({{"I", 1.0}, {"Z", 1.0}, {"X", 1.0}}),
                  ValidationError);
  // identity component must be present and equal 1
  CHECK_THROWS_AS(state_from_pauli_components({{"Z", 0.3}}), ValidationError);
}

TEST_CASE("slightly negative spectra are projected back to the PSD cone") {
  // Bloch vector of length 1.0000008 -> min eigenvalue -4e-7
  const double r = (1.0 + 8e-7) / std::sqrt(2.0);
  const StateBuildResult built =
      state_from_pauli_components({{"I", 1.0}, {"Z", r}, {"X", r}});
  CHECK(built.projected);
  CHECK(built.min_eigenvalue_raw < 0.0);
  CHECK(built.min_eigenvalue_raw > -1e-6);
  built.state.validate();
  CHECK(min_eigenvalue(built.state.matrix) >= -1e-12);
}

TEST_CASE("born distribution: maximally mixed state is uniform") {
  DensityMatrix mixed{CMat::identity(8)};
  mixed.matrix *= cplx(1.0 / 8.0, 0.0);
  const GhzWitness ghz = ghz_projection_witness();
  const PovmModel povm = projective_povm_model(ghz.decomposition);
  const OutcomeDistribution dist = born_distribution(mixed, povm.outcomes[0]);
  CHECK(dist.entries.size() == 8);
  for (const auto& [a, p] : dist.entries) CHECK(p == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("born distribution: GHZ under the ZZZ setting") {
  const GhzWitness ghz = ghz_projection_witness();
  const PovmModel povm = projective_povm_model(ghz.decomposition);
  const OutcomeDistribution dist = born_distribution(ghz_state(), povm.outcomes[0]);
  std::map<double, double> by_product;
  for (const auto& [a, p] : dist.entries) {
    if (p < 1e-14) continue;
    by_product[a[0]] += p;
    // only the all-up and all-down outcomes survive
    CHECK(a[0] == doctest::Approx(a[1]));
    CHECK(a[1] == doctest::Approx(a[2]));
    CHECK(p == doctest::Approx(0.5));
  }
  CHECK(by_product.size() == 2);
}

TEST_CASE("born distribution sums to one for random states and readout noise") {
  const GhzWitness ghz = ghz_projection_witness();
  const PovmModel povm = readout_povm_model(ghz.decomposition, 0.95, 0.99);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = oracle::random_density(8, rng);
    for (size_t x = 0; x < povm.outcomes.size(); ++x) {
      const OutcomeDistribution dist = born_distribution(rho, povm.outcomes[x]);
      double total = 0.0;
      for (const auto& [a, p] : dist.entries) total += p;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("sampling is deterministic and matches frequencies") {
  OutcomeDistribution dist;
  dist.entries = {{{1.0}, 0.2}, {{2.0}, 0.5}, {{3.0}, 0.3}};

  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(sample_outcome(dist, a)[0] == sample_outcome(dist, b)[0]);

  Rng rng(7);
  std::map<double, int> counts;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) ++counts[sample_outcome(dist, rng)[0]];
  for (const auto& [value, prob] : std::map<double, double>{{1.0, 0.2}, {2.0, 0.5}, {3.0, 0.3}}) {
    const double sigma = std::sqrt(n * prob * (1.0 - prob));
    CHECK(std::abs(counts[value] - n * prob) < 4.0 * sigma);
  }
}

TEST_CASE("point mass sampling always returns the single outcome") {
  OutcomeDistribution dist;
  dist.entries = {{{-1.0, 1.0}, 1.0}};
  Rng rng(1);
  for (int i = 0; i < 32; ++i) {
    const auto a = sample_outcome(dist, rng);
    CHECK(a[0] == -1.0);
    CHECK(a[1] == 1.0);
  }
}
