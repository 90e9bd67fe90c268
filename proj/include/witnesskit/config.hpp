#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "witnesskit/device.hpp"
#include "witnesskit/experiment.hpp"
#include "witnesskit/montecarlo.hpp"
#include "witnesskit/sources.hpp"
#include "witnesskit/witness.hpp"

namespace wkit {

// Declarative witness description: subsystem count, constant, weighted terms
// with setting index and bitmask, per-setting observables (Pauli labels or
// explicit matrices), a measurement model (readout (u,v) shorthand, explicit
// POVM elements, or projective by default) and an optional explicit p_x.
struct WitnessSpec {
  std::string name;
  WitnessDecomposition decomposition;
  SettingDistribution distribution;
  PovmModel povm;
  nlohmann::json resolved;  // fully inline form (no file references)
};

WitnessSpec parse_witness_json(const nlohmann::json& j, const std::string& base_dir = "");

std::vector<PauliComponent> parse_state_json(const nlohmann::json& j);

struct ExperimentSpec {
  int64_t rounds = 0;
  double alpha = 0.05;
  uint64_t seed = 0;
  WitnessSpec witness;
  DeviceNoise noise;
  SimulatedBias bias;
  nlohmann::json source;    // resolved source block
  nlohmann::json resolved;  // fully inline experiment config

  std::string canonical_json() const { return resolved.dump(); }

  // Independent source instance for one repetition; fraction schedules are
  // derived from (schedule_seed, repetition) so repetitions stay independent.
  std::unique_ptr<StateSource> make_source(uint64_t repetition) const;

  WitnessCorrection correction() const;
};

ExperimentSpec parse_experiment_json(const nlohmann::json& j, const std::string& base_dir = "");

struct McSpec {
  int64_t repetitions = 1;
  uint64_t master_seed = 0;
  int threads = 0;
  int histogram_bins = 0;
  ExperimentSpec experiment;
  nlohmann::json resolved;
};

McSpec parse_mc_json(const nlohmann::json& j, const std::string& base_dir = "");

// "preset:<name>" or a path; json is loaded either way.
nlohmann::json load_json_or_preset(const std::string& ref, const std::string& base_dir = "");

// Bundled presets. Witness: "ghz" (0.95/0.99 readout), "ghz-projective".
// State: "table4". Experiment: "ghz-paper", "drift-paper", "fraction-paper".
// Monte Carlo: "mc-ghz-paper", "mc-drift-paper", "mc-fraction-paper".
nlohmann::json preset_json(const std::string& name);
std::vector<std::string> preset_names();

ExperimentSpec load_experiment(const std::string& ref);
McSpec load_mc(const std::string& ref);

struct LoadedRun {
  RunRecord run;
  ExperimentSpec spec;
  std::shared_ptr<CompiledGame> game;
};

// Rebuild the game from the run header, then load and verify the rounds.
LoadedRun load_run_with_config(const std::string& path);

std::shared_ptr<CompiledGame> compile(const WitnessSpec& spec);

// Explicit-element JSON form of a POVM model, usable as a witness config's
// "povm" block.
nlohmann::json povm_to_json(const PovmModel& povm);

}  // namespace wkit
