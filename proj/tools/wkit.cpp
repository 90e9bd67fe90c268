#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "witnesskit/config.hpp"
#include "witnesskit/errors.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kJsonSchema = "witnesskit/cli/v1";

std::string resolve_out(const std::string& path) {
  if (path.empty() || path.front() == '/' || fs::path(path).has_parent_path()) return path;
  const char* dir = std::getenv("WITNESSKIT_OUT_DIR");
  if (dir && *dir) return std::string(dir) + "/" + path;
  return path;
}

bool ci_mode() {
  const char* v = std::getenv("WITNESSKIT_CI");
  return v && *v && std::string(v) != "0";
}

void emit(const json& j, bool as_json, const std::string& text) {
  if (as_json)
    std::cout << j.dump(2) << "\n";
  else
    std::cout << text;
}

std::string witness_ref_or_preset(const std::string& config, const std::string& preset) {
  if (!preset.empty()) return "preset:" + preset;
  if (!config.empty()) return config;
  throw wkit::ValidationError("pass --config FILE or --preset NAME");
}

std::vector<double> parse_grid(const std::string& text) {
  // "a:b:k" inclusive linear grid, or comma-separated values
  std::vector<double> out;
  const auto c1 = text.find(':');
  if (c1 != std::string::npos) {
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw wkit::ValidationError("grid must be lo:hi:count");
    const double lo = std::stod(text.substr(0, c1));
    const double hi = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const long k = std::stol(text.substr(c2 + 1));
    if (k < 1) throw wkit::ValidationError("grid count must be >= 1");
    for (long i = 0; i < k; ++i)
      out.push_back(k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (k - 1));
    return out;
  }
  size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::stod(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw wkit::ValidationError("empty grid");
  return out;
}

// ---- subcommand payloads ----

int cmd_gamma(const std::string& witness_ref, double tau, const std::string& delta_text,
              bool as_json) {
  const wkit::WitnessSpec w = wkit::parse_witness_json(wkit::load_json_or_preset(witness_ref));
  wkit::DeviceNoise noise;
  noise.tau = tau;
  const std::vector<double> deltas = parse_grid(delta_text);
  if (deltas.size() == 1)
    noise.delta.assign(static_cast<size_t>(w.decomposition.num_subsystems), deltas[0]);
  else
    noise.delta = deltas;
  const wkit::WitnessCorrection c =
      wkit::witness_correction(w.decomposition, w.distribution, w.povm, noise);

  json j{{"schema", kJsonSchema},
         {"command", "gamma"},
         {"witness", w.name},
         {"tau", noise.tau},
         {"delta", noise.delta},
         {"gamma1", c.gamma1},
         {"gamma2", c.gamma2},
         {"gamma2_first_order", c.gamma2_first_order},
         {"gamma", c.gamma}};
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "witness correction for '%s' (tau=%g, delta=%g%s)\n"
                "  gamma1             = %.6e\n"
                "  gamma2             = %.6e\n"
                "  gamma2 first order = %.6e\n"
                "  gamma              = %.6e\n",
                w.name.c_str(), noise.tau, noise.delta[0],
                deltas.size() == 1 ? " all subsystems" : " ...", c.gamma1, c.gamma2,
                c.gamma2_first_order, c.gamma);
  emit(j, as_json, buf);
  return 0;
}

int cmd_score_table(const std::string& witness_ref, bool as_json) {
  const wkit::WitnessSpec w = wkit::parse_witness_json(wkit::load_json_or_preset(witness_ref));
  const auto game = wkit::compile(w);
  json rows = json::array();
  std::string text = "score table for '" + w.name + "'\n";
  for (int x = 0; x < game->num_settings(); ++x) {
    text += "setting " + std::to_string(x) + " (" +
            w.decomposition.settings[static_cast<size_t>(x)].label() +
            "), p=" + std::to_string(w.distribution.p[static_cast<size_t>(x)]) + "\n";
    for (int a = 0; a < game->num_joint_outcomes(x); ++a) {
      json row{{"setting", x},
               {"outcomes", game->outcome_values(x, a)},
               {"score", game->score_value(x, a)}};
      rows.push_back(row);
      text += "  a = (";
      const auto& vals = game->outcome_values(x, a);
      for (size_t k = 0; k < vals.size(); ++k)
        text += (k ? ", " : "") + std::to_string(vals[k]);
      text += ")  s = " + std::to_string(game->score_value(x, a)) + "\n";
    }
  }
  const auto& ex = game->extrema();
  json j{{"schema", kJsonSchema}, {"command", "score-table"}, {"witness", w.name},
         {"p", w.distribution.p}, {"rows", rows},         {"s_min", ex.s_min},
         {"s_max", ex.s_max},     {"delta_s", ex.delta}};
  char buf[160];
  std::snprintf(buf, sizeof buf, "s_min = %.6f, s_max = %.6f, delta_s = %.6f\n", ex.s_min, ex.s_max,
                ex.delta);
  emit(j, as_json, text + buf);
  return 0;
}

struct TailInputs {
  double t_n;
  int64_t n;
  double beta;
};

TailInputs tail_inputs(std::optional<double> tn, std::optional<std::string> scores_path, int64_t n,
                       std::optional<double> beta, std::optional<double> c,
                       std::optional<double> gamma, std::optional<double> smin,
                       std::optional<double> ds) {
  TailInputs in{};
  double use_c = 0.0, use_smin = 0.0, use_ds = 0.0;
  bool have_game_numbers = false;
  if (scores_path) {
    const wkit::LoadedRun loaded = wkit::load_run_with_config(*scores_path);
    use_c = loaded.run.game.constant;
    use_smin = loaded.run.game.s_min;
    use_ds = loaded.run.game.delta_s();
    have_game_numbers = true;
    in.n = loaded.run.n();
    in.t_n = wkit::total_normalized_score(loaded.run.scores(), use_smin, use_ds);
  } else {
    if (!tn) throw wkit::ValidationError("pass --tn or --scores");
    if (n < 1) throw wkit::ValidationError("pass --n with --tn");
    in.t_n = *tn;
    in.n = n;
  }
  if (beta) {
    in.beta = *beta;
  } else {
    if (c) use_c = *c;
    if (smin) use_smin = *smin;
    if (ds) use_ds = *ds;
    if (!have_game_numbers && !(c && smin && ds))
      throw wkit::ValidationError("pass --beta, or (--c, --smin, --ds), or --scores");
    in.beta = wkit::beta_param(use_c, gamma.value_or(0.0), use_smin, use_ds);
  }
  return in;
}

int cmd_pvalue(const TailInputs& in, double alpha, bool hoeffding, bool as_json) {
  const double p = wkit::p_value_bound(in.t_n, in.n, in.beta);
  const double log10p = wkit::log_p_value_bound(in.t_n, in.n, in.beta) / std::log(10.0);
  json j{{"schema", kJsonSchema}, {"command", "pvalue"}, {"t_n", in.t_n},
         {"n", in.n},             {"beta", in.beta},     {"p_bound", p},
         {"log10_p_bound", log10p}, {"alpha", alpha},    {"rejected", p <= alpha}};
  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "p_bound = %.6e   (t_n = %.6f, n = %lld, beta = %.6f)\n"
                "rejected at alpha=%g: %s\n",
                p, in.t_n, static_cast<long long>(in.n), in.beta, alpha,
                p <= alpha ? "yes" : "no");
  text = buf;
  if (hoeffding) {
    const double hp = wkit::hoeffding_p_bound(in.t_n, in.n, in.beta);
    j["hoeffding_p_bound"] = hp;
    std::snprintf(buf, sizeof buf, "hoeffding p bound = %.6e\n", hp);
    text += buf;
  }
  emit(j, as_json, text);
  return 0;
}

int cmd_ci(std::optional<std::string> scores_path, int64_t n, double alpha, double gamma,
           std::optional<double> ds, std::optional<double> w_hat, bool hoeffding, bool as_json) {
  double use_ds = 0.0;
  double center = w_hat.value_or(std::nan(""));
  int64_t use_n = n;
  if (scores_path) {
    const wkit::LoadedRun loaded = wkit::load_run_with_config(*scores_path);
    use_ds = loaded.run.game.delta_s();
    use_n = loaded.run.n();
    center = wkit::witness_estimate(loaded.run.scores(), loaded.run.game.constant);
  } else {
    if (!ds || use_n < 1) throw wkit::ValidationError("pass --ds and --n, or --scores");
    use_ds = *ds;
  }
  const double eps = wkit::confidence_radius(use_n, alpha, gamma, use_ds);
  json j{{"schema", kJsonSchema}, {"command", "ci"},  {"n", use_n},     {"alpha", alpha},
         {"gamma", gamma},        {"delta_s", use_ds}, {"epsilon", eps}};
  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "epsilon = %.6f   (n = %lld, alpha = %g, gamma = %g, delta_s = %g)\n",
                eps, static_cast<long long>(use_n), alpha, gamma, use_ds);
  text = buf;
  if (!std::isnan(center)) {
    j["w_hat"] = center;
    j["two_sided"] = json::array({center - eps, center + eps});
    j["one_sided_upper"] = center + eps;
    std::snprintf(buf, sizeof buf,
                  "w_hat = %.6f\ntwo-sided (1-2a): [%.6f, %.6f]\none-sided (1-a): (-inf, %.6f]\n",
                  center, center - eps, center + eps, center + eps);
    text += buf;
  }
  if (hoeffding) {
    const double he = wkit::hoeffding_radius(use_n, alpha, gamma, use_ds);
    j["hoeffding_epsilon"] = he;
    std::snprintf(buf, sizeof buf, "hoeffding epsilon = %.6f\n", he);
    text += buf;
  }
  emit(j, as_json, text);
  return 0;
}

int cmd_simulate(const std::string& config_ref, std::optional<uint64_t> seed,
                 const std::string& out_path, bool as_json) {
  if (ci_mode() && !seed) throw wkit::ValidationError("--seed is required in CI mode");
  wkit::ExperimentSpec spec = wkit::load_experiment(config_ref);
  if (seed) {
    spec.seed = *seed;
    spec.resolved["seed"] = *seed;
  }
  const auto game = wkit::compile(spec.witness);
  auto source = spec.make_source(0);
  wkit::Rng rng = wkit::Rng::stream(spec.seed, 0);
  const wkit::RunRecord run = wkit::run_experiment(
      *source, *game, spec.rounds, spec.bias, rng, spec.seed, 0, spec.canonical_json());
  const std::string path = resolve_out(out_path);
  wkit::save_run(run, path);
  json j{{"schema", kJsonSchema},
         {"command", "simulate"},
         {"out", path},
         {"n", run.n()},
         {"seed", spec.seed},
         {"source", run.source_kind},
         {"config_digest", run.config_digest},
         {"true_witness_mean", run.true_witness_mean}};
  char buf[256];
  std::snprintf(buf, sizeof buf, "wrote %lld rounds to %s (digest %s)\n",
                static_cast<long long>(run.n()), path.c_str(), run.config_digest.c_str());
  emit(j, as_json, buf);
  return 0;
}

int cmd_analyze(const std::string& run_path, const std::string& mode, std::optional<double> gamma,
                std::optional<double> alpha, bool as_json) {
  const wkit::LoadedRun loaded = wkit::load_run_with_config(run_path);
  const double use_alpha = alpha.value_or(loaded.spec.alpha);
  const double use_gamma = gamma ? *gamma : loaded.spec.correction().gamma;
  json j{{"schema", kJsonSchema}, {"command", "analyze"}, {"mode", mode},
         {"run", run_path},       {"gamma", use_gamma},   {"alpha", use_alpha},
         {"n", loaded.run.n()}};
  std::string text;
  char buf[384];
  if (mode == "rejection") {
    const wkit::RejectionResult r = wkit::analyze_rejection(loaded.run, use_gamma, use_alpha);
    j["t_n"] = r.t_n;
    j["beta"] = r.beta;
    j["p_bound"] = r.p_bound;
    j["log10_p_bound"] = r.log10_p_bound;
    j["rejected"] = r.rejected;
    std::snprintf(buf, sizeof buf,
                  "rejection analysis of %s\n  t_n = %.6f, beta = %.6f\n  p_bound = %.6e\n"
                  "  rejected=%s at alpha=%g\n",
                  run_path.c_str(), r.t_n, r.beta, r.p_bound, r.rejected ? "true" : "false",
                  use_alpha);
    text = buf;
  } else if (mode == "estimation") {
    const wkit::EstimationResult e = wkit::analyze_estimation(loaded.run, use_gamma, use_alpha);
    j["w_hat"] = e.w_hat;
    j["epsilon"] = e.epsilon;
    j["two_sided"] = json::array({e.two_sided_lo, e.two_sided_hi});
    j["one_sided_upper"] = e.one_sided_upper;
    std::snprintf(buf, sizeof buf,
                  "estimation analysis of %s\n  w_hat = %.6f, epsilon = %.6f\n"
                  "  two-sided (1-2a): [%.6f, %.6f]\n  one-sided (1-a): (-inf, %.6f]\n",
                  run_path.c_str(), e.w_hat, e.epsilon, e.two_sided_lo, e.two_sided_hi,
                  e.one_sided_upper);
    text = buf;
  } else {
    throw wkit::ValidationError("mode must be rejection or estimation");
  }
  emit(j, as_json, text);
  return 0;
}

int cmd_montecarlo(const std::string& config_ref, std::optional<uint64_t> seed, int threads,
                   const std::string& out_dir, bool as_json) {
  if (ci_mode() && !seed) throw wkit::ValidationError("--seed is required in CI mode");
  wkit::McSpec spec = wkit::load_mc(config_ref);
  if (seed) spec.master_seed = *seed;
  if (threads >= 0) spec.threads = threads;

  const auto game = wkit::compile(spec.experiment.witness);
  wkit::McConfig cfg;
  cfg.repetitions = spec.repetitions;
  cfg.rounds = spec.experiment.rounds;
  cfg.alpha = spec.experiment.alpha;
  cfg.gamma = spec.experiment.correction().gamma;
  cfg.bias = spec.experiment.bias;
  cfg.master_seed = spec.master_seed;
  cfg.threads = spec.threads;
  cfg.histogram_bins = spec.histogram_bins;
  cfg.game = game.get();
  cfg.config_json = spec.experiment.canonical_json();
  const wkit::ExperimentSpec* exp = &spec.experiment;
  cfg.source_factory = [exp](uint64_t rep) { return exp->make_source(rep); };

  const wkit::McSummary summary = wkit::run_monte_carlo(cfg);

  const std::string dir = resolve_out(out_dir);
  fs::create_directories(dir);
  wkit::write_mc_csv(summary, dir + "/per_run.csv");

  std::vector<double> w_hats, log10_p;
  for (const auto& r : summary.rows)
    if (!r.failed) {
      w_hats.push_back(r.w_hat);
      log10_p.push_back(r.log10_p_bound);
    }
  if (!w_hats.empty()) {
    wkit::write_histogram_svg(wkit::make_histogram(w_hats, cfg.histogram_bins),
                              "witness estimate", dir + "/hist_w_hat.svg");
    wkit::write_histogram_svg(wkit::make_histogram(log10_p, cfg.histogram_bins),
                              "log10 p bound", dir + "/hist_log10_p.svg");
  }

  const auto& a = summary.aggregates;
  json j{{"schema", kJsonSchema},
         {"command", "montecarlo"},
         {"repetitions", spec.repetitions},
         {"master_seed", spec.master_seed},
         {"gamma", cfg.gamma},
         {"alpha", cfg.alpha},
         {"completed", a.completed},
         {"failures", a.failures},
         {"mean_w_hat", a.mean_w_hat},
         {"std_w_hat", a.std_w_hat},
         {"skewness_w_hat", a.skewness_w_hat},
         {"quantiles_w_hat",
          json{{"q05", a.quantiles_w_hat[0]},
               {"q25", a.quantiles_w_hat[1]},
               {"q50", a.quantiles_w_hat[2]},
               {"q75", a.quantiles_w_hat[3]},
               {"q95", a.quantiles_w_hat[4]}}},
         {"rejection_rate", a.rejection_rate},
         {"coverage_rate", a.coverage_rate},
         {"mean_true_witness", a.mean_true_witness},
         {"median_repetition", summary.median_repetition},
         {"median_run_gaussian",
          json{{"mean", summary.median_run_gaussian.mean},
               {"std_of_mean", summary.median_run_gaussian.std_of_mean}}}};
  {
    std::ofstream sf(dir + "/summary.json");
    sf << j.dump(2) << "\n";
  }
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "monte carlo: %lld repetitions (%lld failed)\n"
                "  w_hat: mean %.6f, std %.6f, skewness %.4f\n"
                "  rejection rate %.4f at alpha=%g, coverage %.4f\n"
                "  outputs in %s\n",
                static_cast<long long>(spec.repetitions), static_cast<long long>(a.failures),
                a.mean_w_hat, a.std_w_hat, a.skewness_w_hat, a.rejection_rate, cfg.alpha,
                a.coverage_rate, dir.c_str());
  emit(j, as_json, buf);
  return 0;
}

int cmd_sweep(const std::string& tn_text, const std::string& n_text, const std::string& beta_text,
              const std::string& out_path, bool as_json) {
  const std::vector<double> tn = parse_grid(tn_text);
  std::vector<int64_t> ns;
  for (double v : parse_grid(n_text)) ns.push_back(static_cast<int64_t>(v));
  const std::vector<double> betas = parse_grid(beta_text);
  const wkit::SweepResult sweep = wkit::scaling_sweep(tn, ns, betas);
  const std::string path = resolve_out(out_path);
  wkit::write_sweep_csv(sweep, path);
  json j{{"schema", kJsonSchema},
         {"command", "sweep"},
         {"rows", sweep.rows.size()},
         {"skipped", sweep.skipped},
         {"out", path}};
  char buf[192];
  std::snprintf(buf, sizeof buf, "wrote %zu rows to %s (%lld grid points skipped)\n",
                sweep.rows.size(), path.c_str(), static_cast<long long>(sweep.skipped));
  emit(j, as_json, buf);
  return 0;
}

int cmd_presets(const std::string& name, const std::string& write_path, bool run, bool as_json) {
  if (name.empty()) {
    json j{{"schema", kJsonSchema}, {"command", "presets"}, {"presets", wkit::preset_names()}};
    std::string text = "bundled presets:\n";
    for (const auto& n : wkit::preset_names()) text += "  " + n + "\n";
    emit(j, as_json, text);
    return 0;
  }
  const json preset = wkit::preset_json(name);
  if (!write_path.empty()) {
    const std::string path = resolve_out(write_path);
    std::ofstream out(path);
    if (!out) throw wkit::ValidationError("cannot open " + path);
    out << preset.dump(2) << "\n";
    std::cout << "wrote preset '" << name << "' to " << path << "\n";
    return 0;
  }
  if (!run) {
    std::cout << preset.dump(2) << "\n";
    return 0;
  }

  // End-to-end walkthrough of an experiment preset: correction, extrema,
  // one simulated run, then both analyses.
  wkit::ExperimentSpec spec = wkit::load_experiment("preset:" + name);
  const auto game = wkit::compile(spec.witness);
  const wkit::WitnessCorrection corr = spec.correction();
  const auto& ex = game->extrema();
  auto source = spec.make_source(0);
  wkit::Rng rng = wkit::Rng::stream(spec.seed, 0);
  const wkit::RunRecord run_rec = wkit::run_experiment(
      *source, *game, spec.rounds, spec.bias, rng, spec.seed, 0, spec.canonical_json());
  const wkit::RejectionResult rej = wkit::analyze_rejection(run_rec, corr.gamma, spec.alpha);
  const wkit::EstimationResult est = wkit::analyze_estimation(run_rec, corr.gamma, spec.alpha);

  json j{{"schema", kJsonSchema},
         {"command", "presets"},
         {"preset", name},
         {"gamma", json{{"gamma1", corr.gamma1},
                        {"gamma2", corr.gamma2},
                        {"gamma2_first_order", corr.gamma2_first_order},
                        {"gamma", corr.gamma}}},
         {"s_min", ex.s_min},
         {"s_max", ex.s_max},
         {"delta_s", ex.delta},
         {"seed", spec.seed},
         {"n", run_rec.n()},
         {"true_witness_mean", run_rec.true_witness_mean},
         {"rejection", json{{"t_n", rej.t_n},
                            {"beta", rej.beta},
                            {"p_bound", rej.p_bound},
                            {"rejected", rej.rejected}}},
         {"estimation", json{{"w_hat", est.w_hat},
                             {"epsilon", est.epsilon},
                             {"two_sided", json::array({est.two_sided_lo, est.two_sided_hi})},
                             {"one_sided_upper", est.one_sided_upper}}}};
  char buf[1024];
  std::snprintf(buf, sizeof buf,
                "preset '%s' end to end (seed %llu)\n"
                "  device correction: gamma1 = %.4e, gamma2 = %.4e, gamma = %.4e\n"
                "  score range: s_min = %.4f, s_max = %.4f, delta_s = %.4f\n"
                "  simulated %lld rounds; realized mean witness value %.4f\n"
                "  rejection: t_n = %.3f, beta = %.4f, p_bound = %.3e -> %s at alpha=%g\n"
                "  estimation: w_hat = %.4f, epsilon = %.4f, interval [%.4f, %.4f]\n",
                name.c_str(), static_cast<unsigned long long>(spec.seed), corr.gamma1, corr.gamma2,
                corr.gamma, ex.s_min, ex.s_max, ex.delta, static_cast<long long>(run_rec.n()),
                run_rec.true_witness_mean, rej.t_n, rej.beta, rej.p_bound,
                rej.rejected ? "rejected" : "not rejected", spec.alpha, est.w_hat, est.epsilon,
                est.two_sided_lo, est.two_sided_hi);
  emit(j, as_json, buf);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"witnesskit: design, simulate and statistically analyze entanglement-witness "
               "experiments under correlated noise"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable JSON output");

  // gamma
  auto* gamma_cmd = app.add_subcommand("gamma", "device-imperfection witness correction");
  std::string g_config, g_preset, g_delta = "0";
  double g_tau = 0.0;
  gamma_cmd->add_option("--config", g_config, "witness config file");
  gamma_cmd->add_option("--preset", g_preset, "bundled witness preset name");
  gamma_cmd->add_option("--tau", g_tau, "setting-probability bias bound");
  gamma_cmd->add_option("--delta", g_delta, "POVM deviation bound (single value or comma list)");

  // score-table
  auto* table_cmd = app.add_subcommand("score-table", "per-setting outcome/score table");
  std::string t_config, t_preset;
  table_cmd->add_option("--config", t_config, "witness config file");
  table_cmd->add_option("--preset", t_preset, "bundled witness preset name");

  // pvalue
  auto* pv_cmd = app.add_subcommand("pvalue", "p-value bound for a rejection experiment");
  std::optional<double> pv_tn, pv_beta, pv_c, pv_gamma, pv_smin, pv_ds;
  std::optional<std::string> pv_scores;
  int64_t pv_n = 0;
  double pv_alpha = 0.05;
  bool pv_hoeffding = false;
  pv_cmd->add_option("--tn", pv_tn, "total normalized score");
  pv_cmd->add_option("--scores", pv_scores, "run record (JSON lines)");
  pv_cmd->add_option("--n", pv_n, "number of rounds");
  pv_cmd->add_option("--beta", pv_beta, "tail parameter");
  pv_cmd->add_option("--c", pv_c, "witness constant");
  pv_cmd->add_option("--gamma", pv_gamma, "witness correction");
  pv_cmd->add_option("--smin", pv_smin, "minimum score");
  pv_cmd->add_option("--ds", pv_ds, "score range s_max - s_min");
  pv_cmd->add_option("--alpha", pv_alpha, "significance level");
  pv_cmd->add_flag("--hoeffding", pv_hoeffding, "also print the Hoeffding-Azuma bound");

  // ci
  auto* ci_cmd = app.add_subcommand("ci", "confidence radius and intervals");
  std::optional<std::string> ci_scores;
  std::optional<double> ci_ds, ci_what;
  int64_t ci_n = 0;
  double ci_alpha = 0.05, ci_gamma = 0.0;
  bool ci_hoeffding = false;
  ci_cmd->add_option("--scores", ci_scores, "run record (JSON lines)");
  ci_cmd->add_option("--n", ci_n, "number of rounds");
  ci_cmd->add_option("--alpha", ci_alpha, "significance level");
  ci_cmd->add_option("--gamma", ci_gamma, "witness correction");
  ci_cmd->add_option("--ds", ci_ds, "score range s_max - s_min");
  ci_cmd->add_option("--west", ci_what, "witness estimate to center the interval on");
  ci_cmd->add_flag("--hoeffding", ci_hoeffding, "also print the closed-form Hoeffding radius");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "play the witness game against a state source");
  std::string sim_config, sim_out = "run.jsonl";
  std::optional<uint64_t> sim_seed;
  sim_cmd->add_option("--config", sim_config, "experiment config (file or preset:NAME)")
      ->required();
  sim_cmd->add_option("--seed", sim_seed, "RNG seed (overrides the config)");
  sim_cmd->add_option("--out", sim_out, "output run record path");

  // analyze
  auto* an_cmd = app.add_subcommand("analyze", "rejection or estimation analysis of a run record");
  std::string an_run, an_mode = "rejection";
  std::optional<double> an_gamma, an_alpha;
  an_cmd->add_option("--run", an_run, "run record path")->required();
  an_cmd->add_option("--mode", an_mode, "rejection|estimation");
  an_cmd->add_option("--gamma", an_gamma, "witness correction (default: from the run's config)");
  an_cmd->add_option("--alpha", an_alpha, "significance level (default: from the run's config)");

  // montecarlo
  auto* mc_cmd = app.add_subcommand("montecarlo", "batched repetitions with aggregation");
  std::string mc_config, mc_out = "mc_out";
  std::optional<uint64_t> mc_seed;
  int mc_threads = -1;
  mc_cmd->add_option("--config", mc_config, "monte carlo config (file or preset:NAME)")
      ->required();
  mc_cmd->add_option("--seed", mc_seed, "master seed (overrides the config)");
  mc_cmd->add_option("--threads", mc_threads, "worker threads (1 = serial)");
  mc_cmd->add_option("--out", mc_out, "output directory");

  // sweep
  auto* sw_cmd = app.add_subcommand("sweep", "tail-bound table over a (t_n, n, beta) grid");
  std::string sw_tn, sw_n, sw_beta, sw_out = "sweep.csv";
  sw_cmd->add_option("--tn", sw_tn, "t_n grid lo:hi:count or comma list")->required();
  sw_cmd->add_option("--n", sw_n, "n grid")->required();
  sw_cmd->add_option("--beta", sw_beta, "beta grid")->required();
  sw_cmd->add_option("--out", sw_out, "output CSV path");

  // presets
  auto* pr_cmd = app.add_subcommand("presets", "list, print, write or run bundled presets");
  std::string pr_name, pr_write;
  bool pr_run = false;
  pr_cmd->add_option("name", pr_name, "preset name (empty: list)");
  pr_cmd->add_option("--write", pr_write, "write the preset JSON to a file");
  pr_cmd->add_flag("--run", pr_run, "run an experiment preset end to end");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (gamma_cmd->parsed())
      return cmd_gamma(witness_ref_or_preset(g_config, g_preset), g_tau, g_delta, as_json);
    if (table_cmd->parsed())
      return cmd_score_table(witness_ref_or_preset(t_config, t_preset), as_json);
    if (pv_cmd->parsed())
      return cmd_pvalue(tail_inputs(pv_tn, pv_scores, pv_n, pv_beta, pv_c, pv_gamma, pv_smin, pv_ds),
                        pv_alpha, pv_hoeffding, as_json);
    if (ci_cmd->parsed())
      return cmd_ci(ci_scores, ci_n, ci_alpha, ci_gamma, ci_ds, ci_what, ci_hoeffding, as_json);
    if (sim_cmd->parsed()) return cmd_simulate(sim_config, sim_seed, sim_out, as_json);
    if (an_cmd->parsed()) return cmd_analyze(an_run, an_mode, an_gamma, an_alpha, as_json);
    if (mc_cmd->parsed()) return cmd_montecarlo(mc_config, mc_seed, mc_threads, mc_out, as_json);
    if (sw_cmd->parsed()) return cmd_sweep(sw_tn, sw_n, sw_beta, sw_out, as_json);
    if (pr_cmd->parsed()) return cmd_presets(pr_name, pr_write, pr_run, as_json);
  } catch (const wkit::DataIntegrityError& e) {
    std::cerr << "data integrity error: " << e.what() << "\n";
    return 2;
  } catch (const wkit::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
