#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "witnesskit/config.hpp"
#include "witnesskit/errors.hpp"
#include "witnesskit/montecarlo.hpp"

using namespace wkit;

namespace {

struct McFixture {
  ExperimentSpec spec;
  std::shared_ptr<CompiledGame> game;
  McConfig cfg;

  explicit McFixture(const std::string& preset = "preset:ghz-paper", int64_t reps = 50,
                     int64_t rounds = 120) {
    spec = load_experiment(preset);
    spec.rounds = rounds;
    game = compile(spec.witness);
    cfg.repetitions = reps;
    cfg.rounds = rounds;
    cfg.alpha = spec.alpha;
    cfg.gamma = spec.correction().gamma;
    cfg.bias = spec.bias;
    cfg.master_seed = 31337;
    cfg.game = game.get();
    cfg.config_json = spec.canonical_json();
    const ExperimentSpec* s = &spec;
    cfg.source_factory = [s](uint64_t rep) { return s->make_source(rep); };
  }
};

}  // namespace

TEST_CASE("a single repetition equals the directly analyzed run") {
  McFixture f("preset:ghz-paper", 1, 80);
  const McSummary s = run_monte_carlo_serial(f.cfg);
  REQUIRE(s.rows.size() == 1);
  const RunRecord run = rerun_repetition(f.cfg, 0);
  const RejectionResult rej = analyze_rejection(run, f.cfg.gamma, f.cfg.alpha);
  const EstimationResult est = analyze_estimation(run, f.cfg.gamma, f.cfg.alpha);
  CHECK(s.rows[0].w_hat == est.w_hat);
  CHECK(s.rows[0].t_n == rej.t_n);
  CHECK(s.rows[0].p_bound == rej.p_bound);
  CHECK(s.aggregates.mean_w_hat == est.w_hat);
  CHECK(s.aggregates.completed == 1);
}

TEST_CASE("parallel and serial runners produce the identical summary") {
  McFixture f("preset:drift-paper", 24, 100);
  const McSummary serial = run_monte_carlo_serial(f.cfg);
  for (int threads : {0, 2, 3}) {
    f.cfg.threads = threads;
    const McSummary parallel = run_monte_carlo(f.cfg);
    REQUIRE(parallel.rows.size() == serial.rows.size());
    for (size_t i = 0; i < serial.rows.size(); ++i) {
      CHECK(parallel.rows[i].w_hat == serial.rows[i].w_hat);
      CHECK(parallel.rows[i].t_n == serial.rows[i].t_n);
      CHECK(parallel.rows[i].p_bound == serial.rows[i].p_bound);
      CHECK(parallel.rows[i].true_witness_mean == serial.rows[i].true_witness_mean);
    }
    CHECK(parallel.aggregates.mean_w_hat == serial.aggregates.mean_w_hat);
    CHECK(parallel.aggregates.skewness_w_hat == serial.aggregates.skewness_w_hat);
    CHECK(parallel.median_repetition == serial.median_repetition);
    CHECK(parallel.median_run_gaussian.std_of_mean == serial.median_run_gaussian.std_of_mean);
  }
}

TEST_CASE("failed repetitions are excluded and counted") {
  McFixture f("preset:ghz-paper", 8, 20);
  // break half the repetitions with a source that throws immediately
  struct Bomb final : StateSource {
    DensityMatrix next_state(int64_t, const std::vector<RoundRecord>&, Rng&) override {
      throw std::runtime_error("boom");
    }
    const char* kind() const override { return "bomb"; }
  };
  const ExperimentSpec* s = &f.spec;
  f.cfg.source_factory = [s](uint64_t rep) -> std::unique_ptr<StateSource> {
    if (rep % 2 == 1) return std::make_unique<Bomb>();
    return s->make_source(rep);
  };
  const McSummary sum = run_monte_carlo_serial(f.cfg);
  CHECK(sum.aggregates.failures == 4);
  CHECK(sum.aggregates.completed == 4);
  for (size_t i = 0; i < sum.rows.size(); ++i) {
    CHECK(sum.rows[i].failed == (i % 2 == 1));
    if (sum.rows[i].failed) CHECK(sum.rows[i].error.find("boom") != std::string::npos);
  }
}

TEST_CASE("gaussian reference") {
  SUBCASE("constant scores give zero spread") {
    RunRecord run;
    run.game = {0.375, -1.0, 1.0};
    for (int i = 0; i < 10; ++i) run.rounds.push_back({i + 1, 0, {1.0}, 0.25});
    const GaussianReference g = gaussian_reference(run);
    CHECK(g.mean == doctest::Approx(0.375 - 0.25));
    CHECK(g.std_of_mean == 0.0);
  }
  SUBCASE("two-point sample {0, 2}") {
    RunRecord run;
    run.game = {0.0, -2.0, 2.0};
    run.rounds.push_back({1, 0, {1.0}, 0.0});
    run.rounds.push_back({2, 0, {1.0}, 2.0});
    const GaussianReference g = gaussian_reference(run);
    // sample std is sqrt(2), divided by sqrt(n=2) gives 1
    CHECK(g.std_of_mean == doctest::Approx(1.0));
    CHECK(g.mean == doctest::Approx(-1.0));
  }
  SUBCASE("needs two rounds") {
    RunRecord run;
    run.rounds.push_back({1, 0, {1.0}, 0.5});
    CHECK_THROWS_AS(gaussian_reference(run), DomainError);
  }
}

TEST_CASE("quantile and skewness helpers") {
  std::vector<double> xs = {4.0, 1.0, 3.0, 2.0};
  CHECK(quantile(xs, 0.0) == 1.0);
  CHECK(quantile(xs, 1.0) == 4.0);
  CHECK(quantile(xs, 0.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(quantile({}, 0.5), DomainError);

  // symmetric sample has zero skewness; a heavy right tail is positive
  CHECK(skewness({-1.0, 0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(skewness({0.0, 0.0, 0.0, 10.0}) > 0.5);
}

TEST_CASE("scaling sweep") {
  const SweepResult sweep =
      scaling_sweep({350.0, 440.97, 500.0, 650.0}, {600}, {0.576, 0.662, 0.748});
  CHECK(sweep.skipped == 3);  // t_n = 650 > n for every beta
  CHECK(sweep.rows.size() == 9);
  // the published anchor row
  bool found = false;
  for (const auto& r : sweep.rows)
    if (r.t_n == 440.97 && r.beta == 0.662) {
      found = true;
      CHECK(std::abs(r.p_bound / 1.92e-4 - 1.0) < 0.02);
    }
  CHECK(found);
  // nonincreasing along t_n at fixed (n, beta)
  for (size_t i = 1; i < sweep.rows.size(); ++i)
    if (sweep.rows[i].beta == sweep.rows[i - 1].beta)
      CHECK(sweep.rows[i].p_bound <= sweep.rows[i - 1].p_bound * (1.0 + 1e-12));
  // the trivial regime t_n <= n beta gives bounds at or above 1
  for (const auto& r : sweep.rows)
    if (r.t_n <= static_cast<double>(r.n) * r.beta) CHECK(r.p_bound >= 1.0);
}

TEST_CASE("sweep csv layout") {
  const SweepResult sweep = scaling_sweep({10.0, 20.0}, {100}, {0.5});
  const std::string path = "/tmp/wkit_sweep_test.csv";
  write_sweep_csv(sweep, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t_n,n,beta,p_bound");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::remove(path.c_str());
}

TEST_CASE("histograms conserve mass") {
  std::vector<double> xs;
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) xs.push_back(rng.uniform(-1.0, 1.0) + rng.uniform(-1.0, 1.0));
  const Histogram h = make_histogram(xs);
  CHECK(h.total() == 5000);
  CHECK(h.counts.size() >= 8);
  const Histogram fixed = make_histogram(xs, 12);
  CHECK(fixed.counts.size() == 12);
  CHECK(fixed.total() == 5000);

  const std::string path = "/tmp/wkit_hist_test.svg";
  write_histogram_svg(fixed, "test", path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("<svg") != std::string::npos);
  CHECK(all.find("<rect") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("per-run csv is written for every repetition") {
  McFixture f("preset:ghz-paper", 6, 30);
  const McSummary sum = run_monte_carlo_serial(f.cfg);
  const std::string path = "/tmp/wkit_mc_test.csv";
  write_mc_csv(sum, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("repetition,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  std::remove(path.c_str());
}
