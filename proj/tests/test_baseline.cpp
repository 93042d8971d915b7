#include "clarq/baseline.hpp"
#include "clarq/rng.hpp"
#include "doctest.h"
#include "instances.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace clarq;

namespace {

std::pair<int, double> scan(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& p,
                            int n_total) {
  const int lo = min_blocklength(ul, p);
  const int hi = n_total - min_blocklength(dl, p);
  return oracle::scan_one_shot([&](int m) { return packet_error_rate(ul, m, p.packet_bits); },
                               [&](int m) { return packet_error_rate(dl, m, p.packet_bits); },
                               lo, hi, n_total);
}

double one_shot_at(int n_ul) {
  const double a = packet_error_rate(inst::kScenarioBUl, n_ul, 16);
  const double b = packet_error_rate(inst::kScenarioBDl, 2500 - n_ul, 16);
  return a + b - a * b;
}

}  // namespace

TEST_CASE("one-shot on identical links splits evenly") {
  const FblParams p;
  const auto s = solve_one_shot(inst::kScenarioA, inst::kScenarioA, p, 2500);
  REQUIRE(s);
  CHECK(s->n_ul == 1250);
  CHECK(s->n_dl == 1250);
  CHECK(s->loop_error == doctest::Approx(3.68e-6).epsilon(0.05));
  CHECK(s->loop_reliability == doctest::Approx((1 - s->eps_ul) * (1 - s->eps_dl)));
  CHECK(s->eps_ul == s->eps_dl);
}

TEST_CASE("one-shot on the asymmetric preset matches the integer scan") {
  const FblParams p;
  const auto s = solve_one_shot(inst::kScenarioBUl, inst::kScenarioBDl, p, 2500);
  REQUIRE(s);
  const auto [arg, err] = scan(inst::kScenarioBUl, inst::kScenarioBDl, p, 2500);
  CHECK(s->n_ul == arg);
  CHECK(s->loop_error == err);
  // With unequal links the optimum is not at equal error; the integer
  // optimum sits tens of symbols from the equal-error root here.
  const double root = equal_error_split(inst::kScenarioBUl, inst::kScenarioBDl, 16, 2500.0);
  CHECK(std::abs(root - arg) > 10.0);
  CHECK(s->loop_error < one_shot_at(static_cast<int>(std::lround(root))));
}

TEST_CASE("one-shot matches the exhaustive scan on sampled channel pairs") {
  Xoshiro256 rng(2024);
  int unique_checked = 0;
  for (int k = 0; k < 120; ++k) {
    const auto ul = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    const auto dl = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    FblParams p;
    p.packet_bits = 8 + static_cast<int>(rng() % 57);
    const int n_total = 2 + static_cast<int>(rng() % 2999);
    const auto s = solve_one_shot(ul, dl, p, n_total);
    const auto [arg, err] = scan(ul, dl, p, n_total);
    if (arg < 0) {
      CHECK_FALSE(s);
      continue;
    }
    REQUIRE(s);
    CHECK(s->loop_error == err);
    CHECK(s->n_ul + s->n_dl == n_total);
    CHECK(s->eps_ul <= p.eps_max);
    CHECK(s->eps_dl <= p.eps_max);
    // Index comparison only where the optimum is not a floating-point tie.
    const double e_arg = err;
    bool unique = true;
    for (int m : {arg - 1, arg + 1}) {
      if (m < min_blocklength(ul, p) || m > n_total - min_blocklength(dl, p)) continue;
      const double a = packet_error_rate(ul, m, p.packet_bits);
      const double b = packet_error_rate(dl, n_total - m, p.packet_bits);
      if (a + b - a * b == e_arg) unique = false;
    }
    if (unique && e_arg > 0.0) {
      CHECK(s->n_ul == arg);
      ++unique_checked;
    }
  }
  CHECK(unique_checked > 50);
}

TEST_CASE("the stationarity cubic vanishes at the equal-error root") {
  Xoshiro256 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto ul = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    const auto dl = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    const int d = 8 + static_cast<int>(rng() % 57);
    const double n = 500.0 + 2500.0 * rng.uniform();
    const double x = equal_error_split(ul, dl, d, n);
    const auto c = one_shot_cubic(ul, dl, d, n);
    const double value = ((c[0] * x + c[1]) * x + c[2]) * x + c[3];
    const double scale = std::abs(c[0] * x * x * x) + std::abs(c[1] * x * x) +
                         std::abs(c[2] * x) + std::abs(c[3]);
    CHECK(std::abs(value) <= 1e-9 * scale);
  }
}

TEST_CASE("one-shot infeasible and invalid inputs") {
  const FblParams p;
  CHECK_FALSE(solve_one_shot(inst::kScenarioA, inst::kScenarioA, p, 643));
  CHECK(solve_one_shot(inst::kScenarioA, inst::kScenarioA, p, 644));
  CHECK_THROWS_AS(solve_one_shot(inst::kScenarioA, inst::kScenarioA, p, 1),
                  std::invalid_argument);
  CHECK(one_shot_schedule(inst::kScenarioA, inst::kScenarioA, p, 600).empty());
}

TEST_CASE("naive CLARQ stage split") {
  const FblParams p;
  const auto& a = inst::kScenarioA;
  CHECK(naive_clarq_policy(a, a, p, 2500) == 1250);
  CHECK(naive_clarq_policy(a, a, p, 924) == 462);
  CHECK_FALSE(naive_clarq_policy(a, a, p, 500));
  const auto [arg, err] = scan(inst::kScenarioBUl, inst::kScenarioBDl, p, 2500);
  (void)err;
  CHECK(naive_clarq_policy(inst::kScenarioBUl, inst::kScenarioBDl, p, 2500) == arg);

  const Schedule s = naive_schedule(a, a, p, 2500);
  CHECK(s.ul_slots == std::vector<int>{1250, 625});
  CHECK(s.final_dl == 625);
}

TEST_CASE("static HARQ reductions") {
  const FblParams p;
  const auto& a = inst::kScenarioA;
  FrameBudget b;
  const auto os = solve_one_shot(a, a, p, 2500);
  REQUIRE(os);
  const auto one = static_harq_reliability(a, a, p, b, {os->n_ul}, {os->n_dl});
  CHECK(one.reliability == doctest::Approx(os->loop_reliability).epsilon(1e-14));
  CHECK(one.eps_max_violations.empty());

  // Two equal slots with free feedback collapse to the one-shot totals.
  const auto two = static_harq_reliability(a, a, p, b, {625, 625}, {625, 625});
  CHECK(two.reliability == doctest::Approx(os->loop_reliability).epsilon(1e-14));
  CHECK(two.eps_max_violations.empty());

  b.feedback_time = 20e-6;
  CHECK_THROWS_AS(static_harq_reliability(a, a, p, b, {625, 625}, {625, 625}), std::domain_error);
  const auto fb = static_harq_reliability(a, a, p, b, {600, 600}, {640, 640});
  CHECK(fb.reliability < os->loop_reliability);
  CHECK_THROWS(static_harq_reliability(a, a, p, b, {600}, {600, 600}));
}

TEST_CASE("no static HARQ schedule beats the one-shot optimum") {
  Xoshiro256 rng(77);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const auto ul = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    const auto dl = ChannelSpec::from_db(-15.0 + 20.0 * rng.uniform());
    FblParams p;
    p.packet_bits = 8 + static_cast<int>(rng() % 57);
    FrameBudget b;
    b.feedback_time = 4e-6 * static_cast<double>(rng() % 20);
    const int n = b.n_max();
    const int f = b.feedback_symbols();
    const int slots = 1 + static_cast<int>(rng() % 4);
    const int room = n - (2 * slots - 1) * f;
    if (room < 2 * slots) continue;
    // Random composition of room symbols into 2 * slots positive parts.
    std::vector<int> cut;
    for (int i = 0; i < 2 * slots - 1; ++i) cut.push_back(1 + static_cast<int>(rng() % (room - 1)));
    cut.push_back(0);
    cut.push_back(room);
    std::sort(cut.begin(), cut.end());
    std::vector<int> u, d;
    bool ok = true;
    for (int i = 0; i < 2 * slots; ++i) {
      const int len = cut[i + 1] - cut[i];
      if (len < 1) ok = false;
      (i % 2 ? d : u).push_back(len);
    }
    if (!ok) continue;
    const auto os = solve_one_shot(ul, dl, p, n - f);
    const double best = os ? os->loop_reliability : 0.0;
    const auto r = static_harq_reliability(ul, dl, p, b, u, d);
    if (!os) continue;
    CHECK(r.reliability <= best * (1.0 + 1e-15));
    ++checked;
  }
  CHECK(checked > 50);
}
