#include "witnesskit/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "witnesskit/errors.hpp"

namespace wkit {

using nlohmann::json;

std::vector<double> RunRecord::scores() const {
  std::vector<double> s;
  s.reserve(rounds.size());
  for (const auto& r : rounds) s.push_back(r.score);
  return s;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string digest_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return std::string(buf);
}

namespace {

// Zero-sum per-setting shift, each entry bounded by tau.
std::vector<double> biased_probabilities(const std::vector<double>& p, double tau, Rng& rng) {
  std::vector<double> out(p);
  if (tau <= 0.0 || p.size() < 2) return out;
  std::vector<double> shift(p.size());
  double mean = 0.0;
  for (auto& v : shift) {
    v = rng.uniform(-0.5 * tau, 0.5 * tau);
    mean += v;
  }
  mean /= static_cast<double>(shift.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] += shift[i] - mean;
  return out;
}

struct ElementMargins {
  // min eigenvalue per (setting, subsystem, element); a perturbation of
  // operator norm below the margin of both touched elements keeps them PSD.
  std::vector<std::vector<std::vector<double>>> margin;
};

ElementMargins compute_margins(const PovmModel& povm) {
  ElementMargins m;
  m.margin.resize(povm.outcomes.size());
  for (size_t x = 0; x < povm.outcomes.size(); ++x) {
    m.margin[x].resize(povm.outcomes[x].size());
    for (size_t j = 0; j < povm.outcomes[x].size(); ++j)
      for (const auto& out : povm.outcomes[x][j])
        m.margin[x][j].push_back(std::max(min_eigenvalue(out.element), 0.0));
  }
  return m;
}

// Per-round noisy joint elements for one setting: random Hermitian noise of
// norm at most min(delta, PSD margin) moved between two elements of each
// subsystem POVM, then re-tensored.
std::vector<CMat> perturbed_joint_elements(const CompiledGame& game, const ElementMargins& margins,
                                           int x, double delta, Rng& rng) {
  const auto& ideal = game.povm().outcomes[x];
  std::vector<std::vector<CMat>> elems(ideal.size());
  for (size_t j = 0; j < ideal.size(); ++j) {
    for (const auto& out : ideal[j]) elems[j].push_back(out.element);
    const size_t cnt = elems[j].size();
    const size_t add_to = rng.next() % cnt;
    const size_t sub_from = (add_to + 1) % cnt;
    const double margin =
        std::min(margins.margin[x][j][add_to], margins.margin[x][j][sub_from]);
    const double cap = std::min(delta, margin);
    if (cap <= 0.0) continue;
    const int d = elems[j][0].rows();
    CMat e(d, d);
    for (int r = 0; r < d; ++r) {
      e(r, r) = rng.uniform(-1.0, 1.0);
      for (int c = r + 1; c < d; ++c) {
        e(r, c) = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        e(c, r) = std::conj(e(r, c));
      }
    }
    const double norm = operator_norm(e);
    if (norm == 0.0) continue;
    e *= cplx(rng.uniform() * cap / norm, 0.0);
    elems[j][add_to] += e;
    elems[j][sub_from] -= e;
  }

  std::vector<CMat> joint;
  const int outcomes = game.num_joint_outcomes(x);
  joint.reserve(outcomes);
  std::vector<size_t> sizes(ideal.size());
  for (size_t j = 0; j < ideal.size(); ++j) sizes[j] = ideal[j].size();
  for (int flat = 0; flat < outcomes; ++flat) {
    int rem = flat;
    std::vector<CMat> factors(ideal.size());
    for (size_t j = ideal.size(); j > 0; --j) {
      factors[j - 1] = elems[j - 1][rem % sizes[j - 1]];
      rem /= static_cast<int>(sizes[j - 1]);
    }
    joint.push_back(kron(factors));
  }
  return joint;
}

}  // namespace

RunRecord run_experiment(StateSource& source, const CompiledGame& game, int64_t n,
                         const SimulatedBias& bias, Rng& rng, uint64_t seed, uint64_t stream,
                         const std::string& config_json) {
  if (n < 1) throw ValidationError("run_experiment: n must be >= 1");
  RunRecord rec;
  rec.config_json = config_json;
  rec.config_digest = digest_hex(config_json);
  rec.seed = seed;
  rec.stream = stream;
  rec.source_kind = source.kind();
  rec.game.constant = game.constant();
  rec.game.s_min = game.extrema().s_min;
  rec.game.s_max = game.extrema().s_max;
  rec.rounds.reserve(static_cast<size_t>(n));

  const CMat witness = expand_witness(game.decomposition());
  const ElementMargins margins = bias.delta > 0.0 ? compute_margins(game.povm()) : ElementMargins{};

  double w_sum = 0.0;
  for (int64_t i = 1; i <= n; ++i) {
    DensityMatrix rho;
    try {
      rho = source.next_state(i, rec.rounds, rng);
    } catch (const std::exception& e) {
      throw ValidationError("source failed at round " + std::to_string(i) + ": " + e.what() +
                            " (partial run discarded)");
    }
    rho.validate_fast();
    w_sum += real_trace_product(rho.matrix, witness);

    const std::vector<double> p =
        biased_probabilities(game.distribution().p, bias.tau, rng);
    const int x = rng.pick(p);

    std::vector<double> probs;
    if (bias.delta > 0.0) {
      probs = game.outcome_probabilities(rho, perturbed_joint_elements(game, margins, x,
                                                                       bias.delta, rng));
    } else {
      probs = game.outcome_probabilities(rho, x);
    }
    const int a = rng.pick(probs);

    RoundRecord round;
    round.index = i;
    round.setting = x;
    round.outcome = game.outcome_values(x, a);
    round.score = game.score_value(x, a);
    rec.rounds.push_back(std::move(round));
  }
  rec.true_witness_mean = w_sum / static_cast<double>(n);
  return rec;
}

RejectionResult analyze_rejection(const RunRecord& run, double gamma, double alpha) {
  if (!(gamma >= 0.0)) throw DomainError("analyze_rejection: gamma must be >= 0");
  return make_rejection_result(run.scores(), run.game.constant, gamma, run.game.s_min,
                               run.game.delta_s(), alpha);
}

EstimationResult analyze_estimation(const RunRecord& run, double gamma, double alpha) {
  if (!(gamma >= 0.0)) throw DomainError("analyze_estimation: gamma must be >= 0");
  return make_estimation_result(run.scores(), run.game.constant, gamma, run.game.delta_s(),
                                alpha);
}

void save_run(const RunRecord& run, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("save_run: cannot open " + path);
  json header;
  header["schema"] = "witnesskit/run/v1";
  header["config"] = json::parse(run.config_json);
  header["config_digest"] = run.config_digest;
  header["seed"] = run.seed;
  header["stream"] = run.stream;
  header["source_kind"] = run.source_kind;
  header["n"] = run.n();
  header["game"] = {{"constant", run.game.constant},
                    {"s_min", run.game.s_min},
                    {"s_max", run.game.s_max}};
  if (std::isfinite(run.true_witness_mean)) header["true_witness_mean"] = run.true_witness_mean;
  out << header.dump() << '\n';
  for (const auto& r : run.rounds) {
    json line;
    line["i"] = r.index;
    line["x"] = r.setting;
    line["a"] = r.outcome;
    line["s"] = r.score;
    out << line.dump() << '\n';
  }
  if (!out) throw ValidationError("save_run: write failed for " + path);
}

std::string peek_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open run file " + path);
  std::string first;
  if (!std::getline(in, first)) throw DataIntegrityError(path + ":1: empty run file");
  json header;
  try {
    header = json::parse(first);
  } catch (const json::exception& e) {
    throw DataIntegrityError(path + ":1: malformed header: " + e.what());
  }
  if (!header.contains("config")) throw DataIntegrityError(path + ":1: header has no config");
  return header["config"].dump();
}

RunRecord load_run(const std::string& path, const CompiledGame& game) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open run file " + path);
  std::string linebuf;
  int lineno = 0;

  auto fail = [&](const std::string& msg) -> DataIntegrityError {
    return DataIntegrityError(path + ":" + std::to_string(lineno) + ": " + msg);
  };

  if (!std::getline(in, linebuf)) throw DataIntegrityError(path + ":1: empty run file");
  lineno = 1;
  json header;
  try {
    header = json::parse(linebuf);
  } catch (const json::exception& e) {
    throw fail(std::string("malformed header: ") + e.what());
  }
  RunRecord rec;
  try {
    rec.config_json = header.at("config").dump();
    rec.config_digest = header.at("config_digest").get<std::string>();
    rec.seed = header.at("seed").get<uint64_t>();
    rec.stream = header.value("stream", uint64_t{0});
    rec.source_kind = header.at("source_kind").get<std::string>();
    rec.game.constant = header.at("game").at("constant").get<double>();
    rec.game.s_min = header.at("game").at("s_min").get<double>();
    rec.game.s_max = header.at("game").at("s_max").get<double>();
    rec.true_witness_mean = header.value("true_witness_mean",
                                         std::numeric_limits<double>::quiet_NaN());
  } catch (const json::exception& e) {
    throw fail(std::string("header field: ") + e.what());
  }
  if (digest_hex(rec.config_json) != rec.config_digest)
    throw fail("config digest mismatch (file edited?)");

  const int64_t expected_n = header.value("n", int64_t{-1});
  while (std::getline(in, linebuf)) {
    ++lineno;
    if (linebuf.empty()) continue;
    json line;
    try {
      line = json::parse(linebuf);
    } catch (const json::exception& e) {
      throw fail(std::string("malformed round: ") + e.what());
    }
    RoundRecord r;
    try {
      r.index = line.at("i").get<int64_t>();
      r.setting = line.at("x").get<int>();
      r.outcome = line.at("a").get<std::vector<double>>();
      r.score = line.at("s").get<double>();
    } catch (const json::exception& e) {
      throw fail(std::string("round field: ") + e.what());
    }
    if (r.index != static_cast<int64_t>(rec.rounds.size()) + 1)
      throw fail("round index out of order");
    if (r.setting < 0 || r.setting >= game.num_settings()) throw fail("unknown setting index");
    int joint;
    try {
      joint = game.find_outcome_index(r.setting, r.outcome);
    } catch (const DomainError& e) {
      throw fail(e.what());
    }
    const double recomputed = game.score_value(r.setting, joint);
    if (std::abs(recomputed - r.score) > 1e-12)
      throw fail("recorded score " + std::to_string(r.score) + " does not recompute (" +
                 std::to_string(recomputed) + ")");
    rec.rounds.push_back(std::move(r));
  }
  if (expected_n >= 0 && rec.n() != expected_n)
    throw DataIntegrityError(path + ": header claims " + std::to_string(expected_n) +
                             " rounds, file has " + std::to_string(rec.n()));
  return rec;
}

}  // namespace wkit
