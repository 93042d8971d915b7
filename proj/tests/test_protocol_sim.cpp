#include "clarq/baseline.hpp"
#include "clarq/dp.hpp"
#include "clarq/protocol_sim.hpp"
#include "doctest.h"
#include "instances.hpp"

#include <cmath>
#include <memory>
#include <sstream>

using namespace clarq;

namespace {

FrameBudget budget_for(int n_max, int feedback_symbols = 0) {
  FrameBudget b;
  b.frame_time = n_max * b.symbol_time;
  b.feedback_time = feedback_symbols * b.symbol_time;
  return b;
}

bool within_binomial(double observed, double p, long long frames, double sigmas = 3.0) {
  const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(frames));
  return std::abs(observed - p) <= sigmas * sd;
}

}  // namespace

TEST_CASE("error-free link") {
  const auto link = LinkModel::constant(100, 0.0, 0.0, 10, 10);
  SimConfig cfg;
  cfg.frames = 1000;
  cfg.budget = budget_for(100);
  cfg.schedule = Schedule{{40, 30}, 30};
  cfg.keep_outcomes = true;
  const auto r = run_frames(cfg, link);
  CHECK(r.summary.loop_successes == 1000);
  for (const auto& o : r.outcomes) {
    CHECK(o.ul_attempts_used == 1);
    CHECK(o.dl_success);
    CHECK(o.ul_symbols_spent == 40);
  }
}

TEST_CASE("simulated loop error matches the analytic value") {
  const FblParams p;
  auto policy = std::make_shared<DpPolicy>(
      solve_policy(inst::kScenarioA, inst::kScenarioA, p, 1200));
  const Schedule s = extract_schedule(*policy, 1200);
  const double analytic = policy->loop_error[1200];
  CHECK(analytic == doctest::Approx(8.65e-3).epsilon(0.01));

  SimConfig cfg;
  cfg.frames = 200000;
  cfg.seed = 42;
  cfg.source = ScheduleSource::policy;
  cfg.policy = policy;
  cfg.budget = budget_for(1200);
  const auto r = run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p);
  CHECK(within_binomial(r.summary.loop_error, analytic, cfg.frames));

  const auto st = energy_stats(s, policy->link, 1.0);
  const double se = std::sqrt(r.summary.var_ul_symbols / static_cast<double>(cfg.frames));
  CHECK(std::abs(r.summary.mean_ul_symbols - st.expected_ul_energy) <= 3.0 * se);

  // Attempt counts against the analytic distribution.
  const auto dist = attempt_distribution(s, policy->link);
  REQUIRE(r.summary.attempt_histogram.size() <= dist.size());
  for (std::size_t i = 1; i < r.summary.attempt_histogram.size(); ++i) {
    const double obs = static_cast<double>(r.summary.attempt_histogram[i]) / cfg.frames;
    CHECK(within_binomial(obs, dist[i], cfg.frames, 4.0));
  }
}

TEST_CASE("fixed, policy and naive sources agree when they pick the same slots") {
  const FblParams p;
  auto policy =
      std::make_shared<DpPolicy>(solve_policy(inst::kScenarioA, inst::kScenarioA, p, 924));
  SimConfig a;
  a.frames = 5000;
  a.seed = 9;
  a.budget = budget_for(924);
  a.source = ScheduleSource::policy;
  a.policy = policy;
  SimConfig b = a;
  b.source = ScheduleSource::fixed;
  b.schedule = extract_schedule(*policy, 924);
  SimConfig c = a;
  c.source = ScheduleSource::naive;
  const auto ra = run_frames(a, inst::kScenarioA, inst::kScenarioA, p);
  const auto rb = run_frames(b, inst::kScenarioA, inst::kScenarioA, p);
  const auto rc = run_frames(c, inst::kScenarioA, inst::kScenarioA, p);
  CHECK(ra.summary.loop_successes == rb.summary.loop_successes);
  CHECK(ra.summary.loop_successes == rc.summary.loop_successes);
}

TEST_CASE("large feedback cost reduces the protocol to one shot") {
  const FblParams p;
  const int f = 300;
  auto policy =
      std::make_shared<DpPolicy>(solve_policy(inst::kScenarioA, inst::kScenarioA, p, 1200));
  const auto os = solve_one_shot(inst::kScenarioA, inst::kScenarioA, p, 1200 - f);
  REQUIRE(os);
  for (auto src : {ScheduleSource::policy, ScheduleSource::naive}) {
    SimConfig cfg;
    cfg.frames = 200000;
    cfg.seed = 5;
    cfg.source = src;
    cfg.policy = policy;
    cfg.budget = budget_for(1200, f);
    cfg.keep_outcomes = true;
    const auto r = run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p);
    CHECK(r.summary.attempt_histogram.size() == 2);
    CHECK(within_binomial(r.summary.loop_error, os->loop_error, cfg.frames));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(r.outcomes[i].ul_symbols_spent == os->n_ul);
  }
}

TEST_CASE("latency guarantee and outcome invariants") {
  const FblParams p;
  SimConfig cfg;
  cfg.frames = 20000;
  cfg.source = ScheduleSource::policy;
  cfg.budget = budget_for(2500, 3);
  cfg.keep_outcomes = true;
  cfg.workers = 2;
  // A weak channel so that retransmissions actually happen.
  const auto weak = ChannelSpec::from_linear(0.035);
  const auto link = LinkModel::from_channels(weak, weak, p, 2500);
  cfg.policy = std::make_shared<DpPolicy>(solve_policy(link));
  const auto r = run_frames(cfg, link);
  CHECK(r.summary.max_elapsed_time <= cfg.budget.frame_time * (1 + 1e-12));
  bool retried = false;
  for (const auto& o : r.outcomes) {
    CHECK(o.elapsed_time <= cfg.budget.frame_time * (1 + 1e-12));
    if (o.dl_success) CHECK(o.ul_success);
    retried = retried || o.ul_attempts_used > 1;
  }
  CHECK(retried);
}

TEST_CASE("reproducible for a fixed seed, independent of worker count") {
  const FblParams p;
  SimConfig cfg;
  cfg.frames = 70000;
  cfg.seed = 123;
  cfg.source = ScheduleSource::naive;
  cfg.budget = budget_for(1500);
  cfg.keep_outcomes = true;
  const auto a = run_frames(cfg, inst::kScenarioBUl, inst::kScenarioBDl, p);
  cfg.workers = 3;
  const auto b = run_frames(cfg, inst::kScenarioBUl, inst::kScenarioBDl, p);
  std::ostringstream ca, cb;
  write_outcomes_csv(ca, a.outcomes);
  write_outcomes_csv(cb, b.outcomes);
  CHECK(ca.str() == cb.str());
  CHECK(summary_json(a.summary) == summary_json(b.summary));
  cfg.seed = 124;
  const auto c = run_frames(cfg, inst::kScenarioBUl, inst::kScenarioBDl, p);
  std::ostringstream cc;
  write_outcomes_csv(cc, c.outcomes);
  CHECK(cc.str() != ca.str());
  CHECK(ca.str().rfind("frame_index,ul_attempts,ul_success,dl_success,ul_symbols,elapsed_us\n", 0) ==
        0);
}

TEST_CASE("configuration errors are raised before any frame runs") {
  const FblParams p;
  SimConfig cfg;
  cfg.budget = budget_for(1000);
  cfg.schedule = Schedule{{322, 322}, 400};
  CHECK_THROWS_AS(run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p), std::invalid_argument);
  cfg.schedule = Schedule{{300}, 700};
  CHECK_THROWS_AS(run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p), std::invalid_argument);
  cfg.source = ScheduleSource::policy;
  CHECK_THROWS_AS(run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p), std::invalid_argument);
  cfg.policy = std::make_shared<DpPolicy>(solve_policy(inst::kScenarioA, inst::kScenarioA, p, 900));
  CHECK_THROWS_AS(run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p), std::invalid_argument);
  cfg.source = ScheduleSource::fixed;
  cfg.schedule = Schedule{{322}, 678};
  cfg.frames = 0;
  CHECK_THROWS_AS(run_frames(cfg, inst::kScenarioA, inst::kScenarioA, p), std::invalid_argument);
}

TEST_CASE("percentiles and histogram") {
  const auto link = LinkModel::constant(100, 0.5, 0.0, 10, 10);
  SimConfig cfg;
  cfg.frames = 40000;
  cfg.budget = budget_for(100);
  cfg.schedule = Schedule{{20, 20, 20}, 40};
  const auto r = run_frames(cfg, link);
  CHECK(r.summary.p50_ul_symbols == 20.0);
  CHECK(r.summary.p90_ul_symbols == 60.0);
  CHECK(r.summary.ul_symbol_histogram.size() == 3);
  const auto dist = attempt_distribution(cfg.schedule, link);
  CHECK(dist == std::vector<double>{0.0, 0.5, 0.25, 0.25});
  CHECK(within_binomial(r.summary.loop_reliability, 0.875, cfg.frames));
}
