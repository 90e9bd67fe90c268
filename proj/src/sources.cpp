#include "witnesskit/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "witnesskit/errors.hpp"

namespace wkit {

void SceEprParams::validate() const {
  if (!(z >= 0.0 && z <= 1.0)) throw ValidationError("sce params: z outside [0, 1]");
  if (!(dephase_q >= 0.0 && dephase_q <= 1.0))
    throw ValidationError("sce params: dephase_q outside [0, 1]");
  if (!(p_theta >= 0.0 && p_theta <= 1.0))
    throw ValidationError("sce params: p_theta outside [0, 1]");
  if (!std::isfinite(theta_deg)) throw ValidationError("sce params: theta not finite");
}

void DriftParams::validate() const {
  if (!(step_deg >= 0.0)) throw ValidationError("drift params: step must be >= 0");
  if (!std::isfinite(theta0_deg)) throw ValidationError("drift params: theta0 not finite");
}

namespace {

DensityMatrix ghz_projector(double sign) {
  CMat m(8, 8);
  m(0, 0) = 0.5;
  m(7, 7) = 0.5;
  m(0, 7) = 0.5 * sign;
  m(7, 0) = 0.5 * sign;
  return DensityMatrix{std::move(m)};
}

}  // namespace

FractionParams FractionParams::defaults(double fraction, uint64_t schedule_seed) {
  FractionParams p;
  p.fraction = fraction;
  p.good = ghz_projector(+1.0);
  p.bad = ghz_projector(-1.0);
  p.schedule_seed = schedule_seed;
  return p;
}

void FractionParams::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ValidationError("fraction params: fraction outside [0, 1]");
  good.validate();
  bad.validate();
  if (std::abs(real_trace_product(good.matrix, bad.matrix)) > 1e-10)
    throw ValidationError("fraction params: good and bad states are not orthogonal");
}

DensityMatrix sce_epr_state(const SceEprParams& params) {
  params.validate();
  const double theta = params.theta_deg * std::numbers::pi / 180.0;
  CMat rho(4, 4);
  rho(0, 0) = params.z;  // |00><00|
  const double half = 0.5 * (1.0 - params.z);
  const cplx phase(std::cos(theta), std::sin(theta));
  rho(1, 1) = half;
  rho(2, 2) = half;
  rho(1, 2) = half * std::conj(phase);
  rho(2, 1) = half * phase;

  if (params.dephase_q > 0.0) {
    const double keep = 1.0 - params.dephase_q;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j) rho(i, j) *= keep;
  }

  if (params.p_theta > 0.0) {
    // Z flip on qubit 1: rho <- (1-p) rho + p (Z x I) rho (Z x I)
    CMat flipped = rho;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const int si = (i >> 1) & 1, sj = (j >> 1) & 1;
        if (si != sj) flipped(i, j) = -flipped(i, j);
      }
    flipped *= cplx(params.p_theta, 0.0);
    rho *= cplx(1.0 - params.p_theta, 0.0);
    rho += flipped;
  }

  DensityMatrix out{std::move(rho)};
  out.validate_fast();
  return out;
}

std::pair<DensityMatrix, double> fuse_pairs(const DensityMatrix& rho_ab,
                                            const DensityMatrix& rho_bc, int outcome) {
  if (rho_ab.dim() != 4 || rho_bc.dim() != 4)
    throw ValidationError("fuse_pairs: expects two 2-qubit states");
  if (outcome != 0 && outcome != 1) throw ValidationError("fuse_pairs: outcome must be 0 or 1");

  const CMat joint = kron(rho_ab.matrix, rho_bc.matrix);

  // Basis index bits, most significant first: (A, Bn, Be, C).
  // CNOT with Bn control, Be target permutes the basis.
  auto cnot = [](int i) {
    const int bn = (i >> 2) & 1;
    return bn ? (i ^ 2) : i;
  };

  // Project Be onto |outcome>, drop the Be index: rows/cols with matching Be bit.
  CMat sub(8, 8);
  double prob = 0.0;
  for (int i = 0; i < 16; ++i) {
    if (((i >> 1) & 1) != outcome) continue;
    const int i3 = ((i >> 1) & ~1) | (i & 1);  // remove bit 1 (Be)
    for (int j = 0; j < 16; ++j) {
      if (((j >> 1) & 1) != outcome) continue;
      const int j3 = ((j >> 1) & ~1) | (j & 1);
      sub(i3, j3) = joint(cnot(i), cnot(j));
    }
    prob += sub(i3, i3).real();
  }
  if (prob <= 1e-15) throw ValidationError("fuse_pairs: outcome has zero probability");
  sub *= cplx(1.0 / prob, 0.0);

  if (outcome == 1) {
    // X on C (bit 0): flip the last index bit.
    CMat corrected(8, 8);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) corrected(i ^ 1, j ^ 1) = sub(i, j);
    sub = std::move(corrected);
  }

  DensityMatrix out{std::move(sub)};
  out.validate_fast();
  return {std::move(out), prob};
}

DensityMatrix assemble_ghz(const DensityMatrix& rho_ab, const DensityMatrix& rho_bc, Rng& rng) {
  // Probability of outcome 0: diagonal mass whose CNOT-relabeled index has
  // the Be bit cleared.
  double p0 = 0.0;
  for (int i = 0; i < 16; ++i) {
    const int bn = (i >> 2) & 1;
    const int k = bn ? (i ^ 2) : i;
    if (((k >> 1) & 1) == 0)
      p0 += (rho_ab.matrix(i >> 2, i >> 2) * rho_bc.matrix(i & 3, i & 3)).real();
  }
  const int outcome = rng.uniform() < p0 ? 0 : 1;
  return fuse_pairs(rho_ab, rho_bc, outcome).first;
}

namespace {

class IidSource final : public StateSource {
 public:
  explicit IidSource(DensityMatrix rho) : rho_(std::move(rho)) { rho_.validate(); }
  DensityMatrix next_state(int64_t, const std::vector<RoundRecord>&, Rng&) override {
    return rho_;
  }
  const char* kind() const override { return "iid"; }

 private:
  DensityMatrix rho_;
};

class DriftSource final : public StateSource {
 public:
  DriftSource(const SceEprParams& pair1, const SceEprParams& pair2, const DriftParams& drift)
      : pair1_(pair1), pair2_(pair2), drift_(drift) {
    pair1_.validate();
    pair2_.validate();
    drift_.validate();
    theta1_ = theta2_ = drift_.theta0_deg;
  }

  DensityMatrix next_state(int64_t round, const std::vector<RoundRecord>&, Rng& rng) override {
    if (round > 1) {
      theta1_ += rng.coin() ? drift_.step_deg : -drift_.step_deg;
      theta2_ += rng.coin() ? drift_.step_deg : -drift_.step_deg;
    }
    SceEprParams p1 = pair1_;
    SceEprParams p2 = pair2_;
    p1.theta_deg = theta1_;
    p2.theta_deg = theta2_;
    return assemble_ghz(align_for_fusion(sce_epr_state(p1)), align_for_fusion(sce_epr_state(p2)),
                        rng);
  }

  const char* kind() const override { return "drift"; }

 private:
  // The SCE state carries its coherence on |01>,|10>; the fusion circuit is
  // written for the |00>,|11> convention, so flip the second qubit.
  static DensityMatrix align_for_fusion(const DensityMatrix& rho) {
    CMat m(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(i ^ 1, j ^ 1) = rho.matrix(i, j);
    return DensityMatrix{std::move(m)};
  }

  SceEprParams pair1_, pair2_;
  DriftParams drift_;
  double theta1_ = 0.0, theta2_ = 0.0;
};

class FractionSource final : public StateSource {
 public:
  FractionSource(const FractionParams& params, int64_t n) : params_(params) {
    params_.validate();
    if (n < 1) throw ValidationError("fraction source: n must be >= 1");
    const auto good_count = static_cast<int64_t>(std::llround(params_.fraction * n));
    schedule_.assign(static_cast<size_t>(n), false);
    for (int64_t i = 0; i < good_count; ++i) schedule_[i] = true;
    Rng rng(params_.schedule_seed);
    // Fisher-Yates on the good/bad labels.
    for (size_t i = schedule_.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(rng.next() % i);
      std::swap(schedule_[i - 1], schedule_[j]);
    }
  }

  DensityMatrix next_state(int64_t round, const std::vector<RoundRecord>&, Rng&) override {
    if (round < 1 || round > static_cast<int64_t>(schedule_.size()))
      throw ValidationError("fraction source: round outside the scheduled range");
    return schedule_[round - 1] ? params_.good : params_.bad;
  }

  const char* kind() const override { return "fraction"; }

  int64_t good_count() const {
    int64_t g = 0;
    for (bool b : schedule_) g += b ? 1 : 0;
    return g;
  }

 private:
  FractionParams params_;
  std::vector<bool> schedule_;
};

}  // namespace

std::unique_ptr<StateSource> iid_source(DensityMatrix rho) {
  return std::make_unique<IidSource>(std::move(rho));
}

std::unique_ptr<StateSource> drift_source(const SceEprParams& pair1, const SceEprParams& pair2,
                                          const DriftParams& drift) {
  return std::make_unique<DriftSource>(pair1, pair2, drift);
}

std::unique_ptr<StateSource> fraction_source(const FractionParams& params, int64_t n) {
  return std::make_unique<FractionSource>(params, n);
}

}  // namespace wkit
