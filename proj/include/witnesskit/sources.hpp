#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "witnesskit/quantum.hpp"
#include "witnesskit/rng.hpp"

namespace wkit {

struct RoundRecord;

// Heralded EPR-pair model: z |00><00| + (1-z) |psi_theta><psi_theta| with
// |psi_theta> = (|01> + e^{i theta} |10>)/sqrt(2), then off-diagonal damping
// by (1 - dephase_q), then a Z flip on the first qubit with probability
// p_theta.
struct SceEprParams {
  double z = 0.0;
  double theta_deg = 0.0;
  double dephase_q = 0.0;
  double p_theta = 0.0;

  void validate() const;
};

struct DriftParams {
  double theta0_deg = 0.0;
  double step_deg = 0.0;  // per-round +/- increment, independent per pair

  void validate() const;
};

struct FractionParams {
  double fraction = 1.0;             // share of good rounds, held fixed per run
  DensityMatrix good;                // defaults to the GHZ projector
  DensityMatrix bad;                 // defaults to the phase-flipped GHZ projector
  uint64_t schedule_seed = 0;

  static FractionParams defaults(double fraction, uint64_t schedule_seed);
  void validate() const;  // requires tr(good * bad) = 0 within 1e-10
};

DensityMatrix sce_epr_state(const SceEprParams& params);

// Fuse two pairs laid out as qubits (A, Bn, Be, C): CNOT with Bn as control
// and Be as target, computational measurement of Be with the given outcome,
// X on C when the outcome is 1, then Be is dropped. Returns the normalized
// 3-qubit state on (A, Bn, C) and the outcome probability.
std::pair<DensityMatrix, double> fuse_pairs(const DensityMatrix& rho_ab,
                                            const DensityMatrix& rho_bc, int outcome);

// Same fusion with the measurement outcome sampled by Born's rule.
DensityMatrix assemble_ghz(const DensityMatrix& rho_ab, const DensityMatrix& rho_bc, Rng& rng);

// Sequential producer of round states; may keep history-dependent state.
class StateSource {
 public:
  virtual ~StateSource() = default;
  virtual DensityMatrix next_state(int64_t round, const std::vector<RoundRecord>& history,
                                   Rng& rng) = 0;
  virtual const char* kind() const = 0;
};

std::unique_ptr<StateSource> iid_source(DensityMatrix rho);

// Random-walk phase drift: both pair phases start at theta0 in round 1 and
// take independent +/- step increments before every later round. Pair states
// are built from the SCE model, aligned to the (|00>+|11>)-type convention
// the fusion circuit expects, and fused into a 3-qubit state.
std::unique_ptr<StateSource> drift_source(const SceEprParams& pair1, const SceEprParams& pair2,
                                          const DriftParams& drift);

// Emits exactly round(fraction*n) good rounds and the rest bad, in an order
// drawn once from schedule_seed.
std::unique_ptr<StateSource> fraction_source(const FractionParams& params, int64_t n);

}  // namespace wkit
