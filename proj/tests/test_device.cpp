#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "witnesskit/device.hpp"
#include "witnesskit/errors.hpp"

using namespace wkit;

namespace {

struct GhzModel {
  GhzWitness g = ghz_projection_witness();
  SettingDistribution p = recommended_setting_distribution(g.decomposition);
  PovmModel povm = readout_povm_model(g.decomposition, 0.95, 0.99);
};

}  // namespace

TEST_CASE("gamma1") {
  GhzModel m;
  SUBCASE("paper value at tau = 1e-6") {
    const double g1 = gamma1(m.g.decomposition, m.p, m.povm, 1e-6);
    CHECK(std::abs(g1 / 5.8e-6 - 1.0) < 0.02);
    CHECK(g1 == doctest::Approx(5.811e-6).epsilon(1e-3));
  }
  SUBCASE("tau = 0 vanishes") {
    CHECK(gamma1(m.g.decomposition, m.p, m.povm, 0.0) == 0.0);
  }
  SUBCASE("matches the per-setting maxima sum") {
    // max |s| is 7/8 a+^2 for the ZZZ setting and 7/8 a+^3 for the others
    const double ap = (0.99 - 0.95 + 1.0) / (0.95 + 0.99 - 1.0);
    const double expected = 1e-6 * (7.0 / 8.0 * ap * ap + 4.0 * 7.0 / 8.0 * ap * ap * ap);
    CHECK(gamma1(m.g.decomposition, m.p, m.povm, 1e-6) == doctest::Approx(expected));
  }
  SUBCASE("linear in tau") {
    const double g1 = gamma1(m.g.decomposition, m.p, m.povm, 1e-6);
    const double g5 = gamma1(m.g.decomposition, m.p, m.povm, 5e-6);
    CHECK(g5 == doctest::Approx(5.0 * g1));
  }
}

TEST_CASE("gamma2") {
  GhzModel m;
  const std::vector<double> delta(3, 2e-3);
  SUBCASE("paper value at delta = 2e-3") {
    const double g2 = gamma2(m.g.decomposition, m.povm, delta);
    CHECK(std::abs(g2 / 9.6e-3 - 1.0) < 0.02);
  }
  SUBCASE("zero deltas vanish") {
    CHECK(gamma2(m.g.decomposition, m.povm, {0.0, 0.0, 0.0}) == 0.0);
    CHECK(gamma2_first_order(m.g.decomposition, m.povm, {0.0, 0.0, 0.0}) == 0.0);
  }
  SUBCASE("first-order value and ordering") {
    const double ap = (0.99 - 0.95 + 1.0) / (0.95 + 0.99 - 1.0);
    const double am = (0.99 - 0.95 - 1.0) / (0.95 + 0.99 - 1.0);
    const double eps = 2e-3 * (std::abs(ap) + std::abs(am));
    CHECK(eps == doctest::Approx(4.26e-3).epsilon(2e-3));
    const double fo = gamma2_first_order(m.g.decomposition, m.povm, delta);
    CHECK(fo == doctest::Approx(2.25 * eps));
    // the exact form keeps the higher-order cross terms
    CHECK(gamma2(m.g.decomposition, m.povm, delta) >= fo);
  }
  SUBCASE("two-subsystem hand expansion |w|(2e + e^2)") {
    oracle::ToyGame toy = oracle::toy_two_qubit(0.5, -0.25, -0.2);
    toy.decomp.terms.resize(1);  // single ZZ term, weight -0.25
    toy.decomp.settings.resize(1);
    toy.dist = recommended_setting_distribution(toy.decomp);
    toy.povm = projective_povm_model(toy.decomp);
    const double d = 1e-2;
    const double e = d * 2.0;  // |+1| + |-1| outcomes
    const double expected = 0.25 * (2.0 * e + e * e);
    CHECK(gamma2(toy.decomp, toy.povm, {d, d}) == doctest::Approx(expected));
    CHECK(gamma2_first_order(toy.decomp, toy.povm, {d, d}) == doctest::Approx(0.25 * 2.0 * e));
  }
  SUBCASE("nondecreasing in every delta") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> d1(3), d2(3);
      for (int j = 0; j < 3; ++j) {
        d1[j] = rng.uniform(0.0, 5e-3);
        d2[j] = d1[j] + rng.uniform(0.0, 5e-3);
      }
      CHECK(gamma2(m.g.decomposition, m.povm, d2) >=
            gamma2(m.g.decomposition, m.povm, d1) - 1e-15);
    }
  }
  SUBCASE("monotonicity holds on random decompositions too") {
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const double w1 = rng.uniform(0.05, 0.4) * (rng.coin() ? 1.0 : -1.0);
      const double w2 = rng.uniform(0.05, 0.4) * (rng.coin() ? 1.0 : -1.0);
      oracle::ToyGame toy = oracle::toy_two_qubit(1.0, w1, w2);
      std::vector<double> d1(2), d2(2);
      for (int j = 0; j < 2; ++j) {
        d1[j] = rng.uniform(0.0, 0.05);
        d2[j] = d1[j] + rng.uniform(0.0, 0.05);
      }
      CHECK(gamma2(toy.decomp, toy.povm, d2) >= gamma2(toy.decomp, toy.povm, d1) - 1e-15);
      const double tau1 = rng.uniform(0.0, 0.2);
      CHECK(gamma1(toy.decomp, toy.dist, toy.povm, 2.0 * tau1) ==
            doctest::Approx(2.0 * gamma1(toy.decomp, toy.dist, toy.povm, tau1)));
    }
  }
}

TEST_CASE("witness_correction bundles the parts") {
  GhzModel m;
  DeviceNoise noise;
  noise.tau = 1e-6;
  noise.delta = {2e-3, 2e-3, 2e-3};
  const WitnessCorrection c = witness_correction(m.g.decomposition, m.p, m.povm, noise);
  CHECK(c.gamma == doctest::Approx(c.gamma1 + c.gamma2));
  CHECK(std::abs(c.gamma / 9.614e-3 - 1.0) < 1e-3);

  // gamma vanishes exactly for perfect devices
  DeviceNoise perfect;
  perfect.delta = {0.0, 0.0, 0.0};
  const WitnessCorrection zero = witness_correction(m.g.decomposition, m.p, m.povm, perfect);
  CHECK(zero.gamma == 0.0);
}

TEST_CASE("device noise validation") {
  GhzModel m;
  DeviceNoise noise;
  noise.delta = {0.0, 0.0, 0.0};
  SUBCASE("tau above the smallest setting probability is rejected") {
    noise.tau = 0.2;  // min p_x = 1/7
    CHECK_THROWS_AS(noise.validate(m.g.decomposition, m.p), ValidationError);
  }
  SUBCASE("negative delta is rejected") {
    noise.tau = 0.0;
    noise.delta[1] = -1e-3;
    CHECK_THROWS_AS(noise.validate(m.g.decomposition, m.p), ValidationError);
  }
  SUBCASE("wrong delta count is rejected") {
    noise.delta = {0.0};
    CHECK_THROWS_AS(noise.validate(m.g.decomposition, m.p), ValidationError);
  }
}

TEST_CASE("effective operator") {
  GhzModel m;
  SUBCASE("unperturbed inputs reproduce the reconstruction") {
    const CMat w = effective_operator(m.g.decomposition, m.p, m.p.p, m.povm);
    const CMat ref = reconstruct_witness(m.g.decomposition, m.p, m.povm);
    CHECK((w - ref).max_abs() < 1e-12);
  }
  SUBCASE("200 random admissible perturbations satisfy the correction bound") {
    DeviceNoise noise;
    noise.tau = 1e-6;
    noise.delta = {2e-3, 2e-3, 2e-3};
    const WitnessCorrection c = witness_correction(m.g.decomposition, m.p, m.povm, noise);
    const CMat ideal = reconstruct_witness(m.g.decomposition, m.p, m.povm);
    Rng rng(401);
    for (int trial = 0; trial < 200; ++trial) {
      const PerturbedModel pert =
          random_admissible_perturbation(m.g.decomposition, m.p, m.povm, noise, rng);
      const CMat eff =
          effective_operator(m.g.decomposition, m.p, pert.probabilities, pert.povm);
      CHECK(operator_norm(ideal - eff) <= c.gamma + 1e-12);
    }
  }
  SUBCASE("probability-only bias at extreme signs stays within gamma1") {
    const double tau = 1e-3;
    const double g1 = gamma1(m.g.decomposition, m.p, m.povm, tau);
    const CMat ideal = reconstruct_witness(m.g.decomposition, m.p, m.povm);
    // adversarial zero-sum sign patterns at full magnitude tau
    const std::vector<std::vector<double>> patterns = {
        {+1, +1, -1, -1, 0}, {+1, -1, +1, -1, 0}, {-1, 0, 0, 0, +1}, {+1, -1, -1, +1, 0}};
    for (const auto& signs : patterns) {
      std::vector<double> q = m.p.p;
      for (size_t x = 0; x < q.size(); ++x) q[x] += tau * signs[x];
      const CMat eff = effective_operator(m.g.decomposition, m.p, q, m.povm);
      CHECK(operator_norm(ideal - eff) <= g1 + 1e-12);
    }
  }
  SUBCASE("invalid perturbed POVM is rejected") {
    PovmModel broken = m.povm;
    broken.outcomes[0][0][0].element(0, 0) += 0.1;
    CHECK_THROWS_AS(effective_operator(m.g.decomposition, m.p, m.p.p, broken), ValidationError);
  }
}

TEST_CASE("random perturbations respect their own admissibility bounds") {
  GhzModel m;
  DeviceNoise noise;
  noise.tau = 1e-4;
  noise.delta = {2e-3, 1e-3, 5e-4};
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const PerturbedModel pert =
        random_admissible_perturbation(m.g.decomposition, m.p, m.povm, noise, rng);
    double sum = 0.0;
    for (size_t x = 0; x < pert.probabilities.size(); ++x) {
      CHECK(std::abs(pert.probabilities[x] - m.p.p[x]) <= noise.tau + 1e-15);
      sum += pert.probabilities[x];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    pert.povm.validate_elements(m.g.decomposition);  // completeness and PSD survive
    for (size_t x = 0; x < pert.povm.outcomes.size(); ++x)
      for (size_t j = 0; j < pert.povm.outcomes[x].size(); ++j)
        for (size_t k = 0; k < pert.povm.outcomes[x][j].size(); ++k) {
          const CMat diff =
              pert.povm.outcomes[x][j][k].element - m.povm.outcomes[x][j][k].element;
          CHECK(operator_norm(diff) <= noise.delta[j] + 1e-12);
        }
  }
}
