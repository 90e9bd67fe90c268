#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "witnesskit/rng.hpp"
#include "witnesskit/sources.hpp"
#include "witnesskit/stats.hpp"
#include "witnesskit/witness.hpp"

namespace wkit {

// Per-round simulated device bias, bounded by the characterized (tau, delta)
// so the statistical guarantees keep holding for biased simulations.
struct SimulatedBias {
  double tau = 0.0;
  double delta = 0.0;
};

struct RoundRecord {
  int64_t index = 0;  // 1-based
  int setting = 0;
  std::vector<double> outcome;
  double score = 0.0;
};

struct GameSummary {
  double constant = 0.0;
  double s_min = 0.0;
  double s_max = 0.0;

  double delta_s() const { return s_max - s_min; }
};

struct RunRecord {
  std::string config_json;    // compact canonical experiment config
  std::string config_digest;  // fnv1a-64 of config_json, hex
  uint64_t seed = 0;
  uint64_t stream = 0;
  std::string source_kind;
  GameSummary game;
  // NaN when the record comes from hardware rather than simulation
  double true_witness_mean = std::numeric_limits<double>::quiet_NaN();
  std::vector<RoundRecord> rounds;

  int64_t n() const { return static_cast<int64_t>(rounds.size()); }
  std::vector<double> scores() const;
};

uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

// Play n sequential rounds: draw the state (which may depend on the recorded
// history), draw a setting from p_x (biased within tau when requested),
// measure via Born's rule (elements perturbed within delta when requested),
// and record the score. The witness matrix is tracked alongside to expose
// the realized mean witness value of the simulated states.
RunRecord run_experiment(StateSource& source, const CompiledGame& game, int64_t n,
                         const SimulatedBias& bias, Rng& rng, uint64_t seed, uint64_t stream,
                         const std::string& config_json);

RejectionResult analyze_rejection(const RunRecord& run, double gamma, double alpha);
EstimationResult analyze_estimation(const RunRecord& run, double gamma, double alpha);

// JSON-lines persistence: one header object, then one object per round.
void save_run(const RunRecord& run, const std::string& path);

// Reload and re-verify: digest of the embedded config, outcome membership and
// score recomputation against the game. Throws DataIntegrityError with the
// offending line number.
RunRecord load_run(const std::string& path, const CompiledGame& game);

// Header config of a saved run, for rebuilding the game before load_run.
std::string peek_run_config(const std::string& path);

}  // namespace wkit
