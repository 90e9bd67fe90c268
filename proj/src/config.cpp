#include "witnesskit/config.hpp"

#include <cmath>
#include <fstream>

#include "witnesskit/errors.hpp"

namespace wkit {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string join_path(const std::string& base, const std::string& rel) {
  if (rel.empty() || rel.front() == '/' || base.empty()) return rel;
  return base + "/" + rel;
}

CMat parse_matrix(const json& j) {
  if (!j.contains("re")) throw ValidationError("matrix: missing 're'");
  const auto& re = j.at("re");
  const int n = static_cast<int>(re.size());
  CMat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(re.at(i).size()) != n) throw ValidationError("matrix: 're' not square");
    for (int k = 0; k < n; ++k) m(i, k) = re.at(i).at(k).get<double>();
  }
  if (j.contains("im")) {
    const auto& im = j.at("im");
    if (static_cast<int>(im.size()) != n) throw ValidationError("matrix: 'im' shape mismatch");
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        m(i, k) += cplx(0.0, im.at(i).at(k).get<double>());
  }
  return m;
}

json matrix_to_json(const CMat& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int k = 0; k < m.cols(); ++k) {
      rrow.push_back(m(i, k).real());
      irow.push_back(m(i, k).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

LocalObservable parse_observable(const json& j) {
  if (j.is_string()) {
    const std::string label = j.get<std::string>();
    if (label.size() != 1) throw ValidationError("observable label must be one Pauli letter");
    return LocalObservable{label, pauli(label[0])};
  }
  LocalObservable o;
  o.label = j.value("label", std::string("custom"));
  o.matrix = parse_matrix(j.at("matrix"));
  return o;
}

std::vector<uint8_t> parse_bitmask(const json& j, int m) {
  std::vector<uint8_t> bits;
  if (j.is_string()) {
    for (char c : j.get<std::string>()) {
      if (c != '0' && c != '1') throw ValidationError("bitmask string must contain only 0/1");
      bits.push_back(static_cast<uint8_t>(c - '0'));
    }
  } else {
    for (const auto& v : j) bits.push_back(v.get<uint8_t>());
  }
  if (static_cast<int>(bits.size()) != m)
    throw ValidationError("bitmask length differs from subsystem count");
  return bits;
}

std::vector<PovmOutcome> parse_povm_set(const json& j) {
  std::vector<PovmOutcome> set;
  for (const auto& o : j)
    set.push_back(PovmOutcome{o.at("value").get<double>(), parse_matrix(o.at("element"))});
  return set;
}

}  // namespace

WitnessSpec parse_witness_json(const json& j, const std::string&) {
  WitnessSpec spec;
  spec.name = j.value("name", std::string("witness"));
  WitnessDecomposition& d = spec.decomposition;
  d.num_subsystems = j.at("subsystems").get<int>();
  d.constant = j.at("constant").get<double>();

  for (const auto& js : j.at("settings")) {
    MeasurementSetting s;
    const json& obs = js.is_array() ? js : js.at("observables");
    for (const auto& jo : obs) s.observables.push_back(parse_observable(jo));
    d.settings.push_back(std::move(s));
  }
  for (const auto& jt : j.at("terms")) {
    ObservableTerm t;
    t.weight = jt.at("weight").get<double>();
    t.setting = jt.at("setting").get<int>();
    t.bitmask = parse_bitmask(jt.at("bitmask"), d.num_subsystems);
    d.terms.push_back(std::move(t));
  }
  d.validate();

  if (j.contains("povm") && !j.at("povm").is_null()) {
    for (const auto& jx : j.at("povm")) {
      std::vector<std::vector<PovmOutcome>> per_subsystem;
      for (const auto& jj : jx) per_subsystem.push_back(parse_povm_set(jj));
      spec.povm.outcomes.push_back(std::move(per_subsystem));
    }
  } else if (j.contains("readout") && !j.at("readout").is_null()) {
    const double u = j.at("readout").at("u").get<double>();
    const double v = j.at("readout").at("v").get<double>();
    spec.povm = readout_povm_model(d, u, v);
  } else {
    spec.povm = projective_povm_model(d);
  }
  spec.povm.validate(d);

  if (j.contains("setting_distribution") && !j.at("setting_distribution").is_null()) {
    spec.distribution.p = j.at("setting_distribution").get<std::vector<double>>();
    spec.distribution.validate();
    if (spec.distribution.p.size() != d.settings.size())
      throw ValidationError("setting_distribution size differs from setting count");
  } else {
    spec.distribution = recommended_setting_distribution(d);
  }

  spec.resolved = j;
  spec.resolved["schema"] = "witnesskit/witness/v1";
  return spec;
}

std::vector<PauliComponent> parse_state_json(const json& j) {
  std::vector<PauliComponent> components;
  for (const auto& c : j.at("components"))
    components.push_back(PauliComponent{c.at("pauli").get<std::string>(),
                                        c.at("value").get<double>()});
  return components;
}

namespace {

json resolve_ref(const json& j, const std::string& base_dir) {
  if (j.is_string()) return load_json_or_preset(j.get<std::string>(), base_dir);
  return j;
}

DensityMatrix state_from_json(const json& j, const std::string& base_dir) {
  const json resolved = resolve_ref(j, base_dir);
  if (resolved.contains("components"))
    return state_from_pauli_components(parse_state_json(resolved)).state;
  if (resolved.contains("matrix")) {
    DensityMatrix rho{parse_matrix(resolved.at("matrix"))};
    rho.validate();
    return rho;
  }
  throw ValidationError("state config: expected 'components' or 'matrix'");
}

SceEprParams parse_pair(const json& j) {
  SceEprParams p;
  p.z = j.at("z").get<double>();
  p.p_theta = j.value("p_theta", 0.0);
  if (j.contains("dephase_q")) {
    p.dephase_q = j.at("dephase_q").get<double>();
  } else if (j.contains("n_max") && j.contains("nu")) {
    p.dephase_q = 1.0 - std::exp(-j.at("n_max").get<double>() / j.at("nu").get<double>());
  }
  return p;
}

}  // namespace

std::unique_ptr<StateSource> ExperimentSpec::make_source(uint64_t repetition) const {
  const std::string kind = source.at("kind").get<std::string>();
  if (kind == "iid") {
    return iid_source(state_from_json(source.at("state"), ""));
  }
  if (kind == "drift") {
    SceEprParams p1 = parse_pair(source.at("pair1"));
    SceEprParams p2 = parse_pair(source.at("pair2"));
    DriftParams d;
    d.theta0_deg = source.value("theta0_deg", 0.0);
    d.step_deg = source.at("step_deg").get<double>();
    p1.theta_deg = d.theta0_deg;
    p2.theta_deg = d.theta0_deg;
    return drift_source(p1, p2, d);
  }
  if (kind == "fraction") {
    FractionParams p = FractionParams::defaults(source.at("fraction").get<double>(),
                                                source.value("schedule_seed", uint64_t{0}));
    if (source.contains("good")) p.good = state_from_json(source.at("good"), "");
    if (source.contains("bad")) p.bad = state_from_json(source.at("bad"), "");
    // Distinct, reproducible schedule per repetition.
    p.schedule_seed = Rng::stream(p.schedule_seed, repetition).next();
    return fraction_source(p, rounds);
  }
  throw ValidationError("unknown source kind '" + kind + "'");
}

WitnessCorrection ExperimentSpec::correction() const {
  return witness_correction(witness.decomposition, witness.distribution, witness.povm, noise);
}

ExperimentSpec parse_experiment_json(const json& j, const std::string& base_dir) {
  ExperimentSpec spec;
  spec.rounds = j.at("rounds").get<int64_t>();
  if (spec.rounds < 1) throw ValidationError("experiment: rounds must be >= 1");
  spec.alpha = j.at("alpha").get<double>();
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0))
    throw ValidationError("experiment: alpha outside (0, 1]");
  spec.seed = j.value("seed", uint64_t{0});

  spec.witness = parse_witness_json(resolve_ref(j.at("witness"), base_dir), base_dir);

  const int m = spec.witness.decomposition.num_subsystems;
  spec.noise.tau = 0.0;
  spec.noise.delta.assign(static_cast<size_t>(m), 0.0);
  if (j.contains("device_noise")) {
    const json& dn = j.at("device_noise");
    spec.noise.tau = dn.value("tau", 0.0);
    if (dn.contains("delta")) {
      if (dn.at("delta").is_number()) {
        spec.noise.delta.assign(static_cast<size_t>(m), dn.at("delta").get<double>());
      } else {
        spec.noise.delta = dn.at("delta").get<std::vector<double>>();
      }
    }
  }
  spec.noise.validate(spec.witness.decomposition, spec.witness.distribution);

  if (j.contains("simulated_bias")) {
    spec.bias.tau = j.at("simulated_bias").value("tau", 0.0);
    spec.bias.delta = j.at("simulated_bias").value("delta", 0.0);
  }
  if (spec.bias.tau > spec.noise.tau + 1e-15)
    throw ValidationError("simulated bias tau exceeds the characterized tau");
  for (double dj : spec.noise.delta)
    if (spec.bias.delta > dj + 1e-15)
      throw ValidationError("simulated bias delta exceeds a characterized delta");

  json source = j.at("source");
  const std::string kind = source.at("kind").get<std::string>();
  if (kind == "iid") {
    source["state"] = resolve_ref(source.at("state"), base_dir);
  } else if (kind == "fraction") {
    if (source.contains("good")) source["good"] = resolve_ref(source.at("good"), base_dir);
    if (source.contains("bad")) source["bad"] = resolve_ref(source.at("bad"), base_dir);
  } else if (kind != "drift") {
    throw ValidationError("unknown source kind '" + kind + "'");
  }
  spec.source = source;

  spec.resolved = j;
  spec.resolved["schema"] = "witnesskit/experiment/v1";
  spec.resolved["witness"] = spec.witness.resolved;
  spec.resolved["source"] = spec.source;

  // Constructing a source validates its parameter block early.
  (void)spec.make_source(0);
  return spec;
}

McSpec parse_mc_json(const json& j, const std::string& base_dir) {
  McSpec spec;
  spec.repetitions = j.at("repetitions").get<int64_t>();
  if (spec.repetitions < 1) throw ValidationError("monte carlo: repetitions must be >= 1");
  spec.master_seed = j.value("master_seed", uint64_t{0});
  spec.threads = j.value("threads", 0);
  spec.histogram_bins = j.value("histogram_bins", 0);
  spec.experiment = parse_experiment_json(resolve_ref(j.at("experiment"), base_dir), base_dir);
  spec.resolved = j;
  spec.resolved["schema"] = "witnesskit/montecarlo/v1";
  spec.resolved["experiment"] = spec.experiment.resolved;
  return spec;
}

json load_json_or_preset(const std::string& ref, const std::string& base_dir) {
  if (ref.rfind("preset:", 0) == 0) return preset_json(ref.substr(7));
  return load_json_file(join_path(base_dir, ref));
}

namespace {

json ghz_witness_preset(bool projective) {
  json j;
  j["schema"] = "witnesskit/witness/v1";
  j["name"] = projective ? "ghz-projective" : "ghz";
  j["subsystems"] = 3;
  j["constant"] = 0.375;
  j["settings"] = json::array();
  for (const char* s : {"ZZZ", "XXX", "XYY", "YXY", "YYX"}) {
    json obs = json::array();
    for (const char* c = s; *c; ++c) obs.push_back(std::string(1, *c));
    j["settings"].push_back(json{{"observables", obs}});
  }
  j["terms"] = json::array({
      json{{"weight", -0.125}, {"setting", 0}, {"bitmask", "011"}},
      json{{"weight", -0.125}, {"setting", 0}, {"bitmask", "101"}},
      json{{"weight", -0.125}, {"setting", 0}, {"bitmask", "110"}},
      json{{"weight", -0.125}, {"setting", 1}, {"bitmask", "111"}},
      json{{"weight", 0.125}, {"setting", 2}, {"bitmask", "111"}},
      json{{"weight", 0.125}, {"setting", 3}, {"bitmask", "111"}},
      json{{"weight", 0.125}, {"setting", 4}, {"bitmask", "111"}},
  });
  if (!projective) j["readout"] = json{{"u", 0.95}, {"v", 0.99}};
  return j;
}

json table4_preset() {
  json j;
  j["schema"] = "witnesskit/state/v1";
  j["name"] = "table4";
  auto comp = [](const char* p, double v) { return json{{"pauli", p}, {"value", v}}; };
  j["components"] = json::array({
      comp("III", 1.0), comp("IZZ", 0.787), comp("ZIZ", 0.478), comp("ZZI", 0.608),
      comp("XXX", 0.782), comp("XYY", -0.737), comp("YXY", -0.478), comp("YYX", -0.507),
      comp("IIX", -0.077), comp("XXI", 0.072), comp("YYI", -0.047), comp("ZZX", -0.047),
  });
  return j;
}

json ghz_paper_experiment() {
  json j;
  j["schema"] = "witnesskit/experiment/v1";
  j["rounds"] = 600;
  j["alpha"] = 0.05;
  j["seed"] = 20200829;
  j["witness"] = "preset:ghz";
  j["device_noise"] = json{{"tau", 1e-6}, {"delta", 2e-3}};
  j["source"] = json{{"kind", "iid"}, {"state", "preset:table4"}};
  return j;
}

json drift_paper_experiment() {
  json j;
  j["schema"] = "witnesskit/experiment/v1";
  j["rounds"] = 600;
  j["alpha"] = 0.05;
  j["seed"] = 20200829;
  j["witness"] = "preset:ghz";
  j["device_noise"] = json{{"tau", 1e-6}, {"delta", 2e-3}};
  j["source"] = json{{"kind", "drift"},
                     {"pair1", json{{"z", 0.016}, {"n_max", 468}, {"nu", 1500}, {"p_theta", 0.0}}},
                     {"pair2", json{{"z", 0.080}, {"p_theta", 0.0}}},
                     {"theta0_deg", 0.0},
                     {"step_deg", 0.98},
                     {"provenance", json{{"p_det", 1.5e-3},
                                         {"V", 0.9},
                                         {"p_2ph", 0.02},
                                         {"p_dc", 4.0e-7}}}};
  return j;
}

json fraction_paper_experiment() {
  json j;
  j["schema"] = "witnesskit/experiment/v1";
  j["rounds"] = 600;
  j["alpha"] = 0.05;
  j["seed"] = 20200829;
  // The good/bad toy model is defined with exact measurements; readout noise
  // belongs to the NV-flavored scenarios.
  j["witness"] = "preset:ghz-projective";
  j["device_noise"] = json{{"tau", 0.0}, {"delta", 0.0}};
  j["source"] = json{{"kind", "fraction"}, {"fraction", 0.672}, {"schedule_seed", 7}};
  return j;
}

json mc_preset(const std::string& experiment, int64_t reps) {
  json j;
  j["schema"] = "witnesskit/montecarlo/v1";
  j["repetitions"] = reps;
  j["master_seed"] = 99;
  j["threads"] = 0;
  j["experiment"] = experiment;
  return j;
}

}  // namespace

json preset_json(const std::string& name) {
  if (name == "ghz") return ghz_witness_preset(false);
  if (name == "ghz-projective") return ghz_witness_preset(true);
  if (name == "table4") return table4_preset();
  if (name == "ghz-paper") return ghz_paper_experiment();
  if (name == "drift-paper") return drift_paper_experiment();
  if (name == "fraction-paper") return fraction_paper_experiment();
  if (name == "mc-ghz-paper") return mc_preset("preset:ghz-paper", 2000);
  if (name == "mc-drift-paper") return mc_preset("preset:drift-paper", 20000);
  if (name == "mc-fraction-paper") return mc_preset("preset:fraction-paper", 20000);
  throw ValidationError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"ghz",       "ghz-projective", "table4",        "ghz-paper",       "drift-paper",
          "fraction-paper", "mc-ghz-paper",   "mc-drift-paper", "mc-fraction-paper"};
}

ExperimentSpec load_experiment(const std::string& ref) {
  std::string base_dir;
  const auto slash = ref.rfind('/');
  if (ref.rfind("preset:", 0) != 0 && slash != std::string::npos) base_dir = ref.substr(0, slash);
  return parse_experiment_json(load_json_or_preset(ref), base_dir);
}

McSpec load_mc(const std::string& ref) {
  std::string base_dir;
  const auto slash = ref.rfind('/');
  if (ref.rfind("preset:", 0) != 0 && slash != std::string::npos) base_dir = ref.substr(0, slash);
  return parse_mc_json(load_json_or_preset(ref), base_dir);
}

LoadedRun load_run_with_config(const std::string& path) {
  LoadedRun out;
  const std::string config = peek_run_config(path);
  out.spec = parse_experiment_json(json::parse(config));
  out.game = compile(out.spec.witness);
  out.run = load_run(path, *out.game);
  return out;
}

std::shared_ptr<CompiledGame> compile(const WitnessSpec& spec) {
  return std::make_shared<CompiledGame>(spec.decomposition, spec.distribution, spec.povm);
}

// keep matrix_to_json referenced for explicit-POVM round trips in tooling
json povm_to_json(const PovmModel& povm) {
  json jx = json::array();
  for (const auto& per_setting : povm.outcomes) {
    json jj = json::array();
    for (const auto& set : per_setting) {
      json jo = json::array();
      for (const auto& out : set)
        jo.push_back(json{{"value", out.value}, {"element", matrix_to_json(out.element)}});
      jj.push_back(std::move(jo));
    }
    jx.push_back(std::move(jj));
  }
  return jx;
}

}  // namespace wkit
