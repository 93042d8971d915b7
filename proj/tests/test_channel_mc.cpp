#include "clarq/channel_mc.hpp"
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

using namespace clarq;

TEST_CASE("degenerate model draws the base SNR") {
  FadingModel m;
  m.shadow_sigma_db = 0.0;
  m.rayleigh_enabled = false;
  Xoshiro256 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = draw_channel_pair(m, rng);
    CHECK(d.ul_snr_db == 10.0);
    CHECK(d.dl_snr_db == 10.0);
    CHECK(d.ul == ChannelSpec::from_db(10.0));
  }
}

TEST_CASE("shadowing has the configured deviation") {
  FadingModel m;
  m.rayleigh_enabled = false;
  Xoshiro256 rng(2);
  const int n = 100000;
  double s = 0, s2 = 0, c = 0;
  for (int i = 0; i < n; ++i) {
    const auto d = draw_channel_pair(m, rng);
    s += d.ul_snr_db;
    s2 += d.ul_snr_db * d.ul_snr_db;
    c += (d.ul_snr_db - 10.0) * (d.dl_snr_db - 10.0);
  }
  const double mean = s / n;
  const double sd = std::sqrt((s2 - n * mean * mean) / (n - 1));
  CHECK(std::abs(sd - 3.0) < 0.05);
  CHECK(std::abs(mean - 10.0) < 0.05);
  CHECK(std::abs(c / n / 9.0) < 0.02);  // independent links
}

TEST_CASE("fade quantiles follow the log-exponential law") {
  FadingModel m;
  m.shadow_sigma_db = 0.0;
  m.fading_scale_db = 15.0;
  Xoshiro256 rng(3);
  const int n = 100000;
  std::vector<double> fade(n);
  for (auto& f : fade) f = draw_channel_pair(m, rng).ul_snr_db - m.base_snr_db;
  std::sort(fade.begin(), fade.end());
  for (double q : {0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95}) {
    const double expected = 10.0 * std::log10(-std::log(1.0 - q)) - 15.0;
    const double got = fade[static_cast<std::size_t>(q * n)];
    CHECK(std::abs(got - expected) < 0.15);
  }
}

TEST_CASE("linked links share one draw") {
  FadingModel m;
  m.ul_dl_independent = false;
  Xoshiro256 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto d = draw_channel_pair(m, rng);
    CHECK(d.ul_snr_db == d.dl_snr_db);
  }
}

TEST_CASE("common random numbers across model settings") {
  FadingModel a, b, c;
  a.rayleigh_enabled = b.rayleigh_enabled = false;
  b.shadow_sigma_db = 6.0;
  c.shadow_sigma_db = 0.0;  // fade only; consumes the same variates
  Xoshiro256 ra(5), rb(5), rc(5);
  Xoshiro256 rd(5);
  FadingModel d;  // shadow 3 plus fade
  for (int i = 0; i < 100; ++i) {
    const auto da = draw_channel_pair(a, ra);
    const auto db = draw_channel_pair(b, rb);
    const auto dc = draw_channel_pair(c, rc);
    const auto dd = draw_channel_pair(d, rd);
    CHECK(db.ul_snr_db - 10.0 == doctest::Approx(2.0 * (da.ul_snr_db - 10.0)));
    CHECK(db.dl_snr_db - 10.0 == doctest::Approx(2.0 * (da.dl_snr_db - 10.0)));
    CHECK(dd.ul_snr_db == doctest::Approx(da.ul_snr_db + dc.ul_snr_db - 10.0));
  }
}

TEST_CASE("strategy names") {
  for (Strategy s : {Strategy::optimal, Strategy::one_shot, Strategy::naive, Strategy::lut})
    CHECK(parse_strategy(to_string(s)) == s);
  CHECK_FALSE(parse_strategy("greedy"));
}

TEST_CASE("campaign dominance and determinism") {
  CampaignConfig cfg;
  cfg.runs = 100;
  cfg.seed = 17;
  cfg.n_max = 1500;
  const auto a = run_campaign(cfg);
  REQUIRE(a.aggregates.size() == 3);
  int infeasible = 0;
  for (const auto& rec : a.runs) {
    CHECK(rec.loop_error[0] <= rec.loop_error[1]);
    CHECK(rec.loop_error[0] <= rec.loop_error[2]);
    if (rec.loop_error[0] == 1.0) ++infeasible;
  }
  CHECK(infeasible < 100);
  double sum = 0;
  for (double e : a.aggregates[0].per_run_errors) sum += e;
  CHECK(a.aggregates[0].mean_loop_error == doctest::Approx(sum / 100));

  cfg.workers = 2;
  const auto b = run_campaign(cfg);
  std::ostringstream ca, cb;
  write_campaign_csv(ca, cfg, a);
  write_campaign_csv(cb, cfg, b);
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind("run,ul_snr_db,dl_snr_db,strategy,loop_error\n", 0) == 0);
}

TEST_CASE("infeasible draws count as loop error one") {
  FadingModel m;
  m.base_snr_db = -60.0;
  m.shadow_sigma_db = 0.0;
  m.rayleigh_enabled = false;
  CampaignConfig cfg;
  cfg.model = m;
  cfg.runs = 5;
  const auto r = run_campaign(cfg);
  for (const auto& agg : r.aggregates) CHECK(agg.mean_loop_error == 1.0);
}

TEST_CASE("campaign configuration errors") {
  CampaignConfig cfg;
  cfg.runs = 0;
  CHECK_THROWS(run_campaign(cfg));
  cfg.runs = 1;
  cfg.strategies = {Strategy::lut};
  CHECK_THROWS(run_campaign(cfg));
  cfg.strategies = {Strategy::optimal};
  cfg.model.shadow_sigma_db = -1.0;
  CHECK_THROWS(run_campaign(cfg));
}

TEST_CASE("bootstrap interval brackets the sample mean") {
  std::vector<double> v;
  Xoshiro256 rng(6);
  for (int i = 0; i < 500; ++i) v.push_back(rng.uniform());
  const auto [lo, hi] = bootstrap_mean_ci(v, 2000, 1);
  double mean = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  CHECK(lo < mean);
  CHECK(mean < hi);
  CHECK(hi - lo < 0.1);
  CHECK(bootstrap_mean_ci(v, 2000, 1) == bootstrap_mean_ci(v, 2000, 1));
}
