#include "clarq/dp.hpp"
#include "clarq/lut.hpp"
#include "doctest.h"
#include "instances.hpp"

#include <sstream>

using namespace clarq;

TEST_CASE("grid quantisation") {
  LutSpec s;
  s.snr_min_db = -20.0;
  s.snr_max_db = 10.0;
  s.step_db = 0.1;
  CHECK(s.points() == 301);
  CHECK(s.index_of(-20.0) == 0);
  CHECK(s.index_of(-13.0) == 70);
  CHECK(s.index_of(-12.95) == 70);
  CHECK(s.index_of(-12.9) == 71);
  CHECK(s.index_of(-40.0) == 0);
  CHECK(s.index_of(50.0) == 300);
  CHECK(s.grid_db(70) == doctest::Approx(-13.0));
}

TEST_CASE("spec validation") {
  LutSpec s;
  s.step_db = -1.0;
  CHECK_THROWS(s.validate());
  s.step_db = 1.0;
  s.snr_max_db = s.snr_min_db;
  CHECK_THROWS(s.validate());
  s.snr_max_db = 5.0;
  s.n_max = 70000;
  CHECK_THROWS(s.validate());
}

TEST_CASE("single point table holds the scenario A schedule") {
  LutSpec s;
  s.snr_min_db = inst::kScenarioA.snr_db();
  s.snr_max_db = s.snr_min_db + 0.5;
  s.step_db = 1.0;
  s.n_max = 2500;
  const Lut lut = build_lut(s);
  REQUIRE(lut.entries.size() == 1);
  CHECK(to_string(lut.entries[0]) == "[902,674,462,462]");
  CHECK(lookup(lut, s.snr_min_db, s.snr_min_db) == lut.entries[0]);
}

TEST_CASE("lookup floors, clamps and stays feasible") {
  LutSpec s;
  s.snr_min_db = -40.0;
  s.snr_max_db = 0.0;
  s.step_db = 2.0;
  s.n_max = 1200;
  const Lut lut = build_lut(s, 2);
  CHECK(lut.entries.size() == 21u * 21u);
  CHECK(lut.at(0, 0).empty());
  CHECK(lookup(lut, -60.0, -60.0).empty());
  CHECK(lookup(lut, -9.0, -5.5) == lut.at(15, 17));
  CHECK(lookup(lut, -10.0, -6.0) == lut.at(15, 17));
  CHECK(lookup(lut, 40.0, 40.0) == lut.at(20, 20));

  Xoshiro256 rng(3);
  for (int k = 0; k < 500; ++k) {
    const double u = -40.0 + 45.0 * rng.uniform();
    const double d = -40.0 + 45.0 * rng.uniform();
    const Schedule& sch = lookup(lut, u, d);
    if (sch.empty()) continue;
    // A schedule valid at the grid point is valid at any higher SNR.
    const int nu = min_blocklength(ChannelSpec::from_db(u), s.params);
    const int nd = min_blocklength(ChannelSpec::from_db(d), s.params);
    CHECK_NOTHROW(validate_schedule(sch, nu, nd));
  }
}

TEST_CASE("entries equal direct solves") {
  LutSpec s;
  s.snr_min_db = -14.0;
  s.snr_max_db = -10.0;
  s.step_db = 1.0;
  s.n_max = 1800;
  const Lut lut = build_lut(s);
  for (int i = 0; i < s.points(); ++i)
    for (int j = 0; j < s.points(); ++j) {
      const auto u = ChannelSpec::from_db(s.grid_db(i));
      const auto d = ChannelSpec::from_db(s.grid_db(j));
      const auto p = solve_policy(u, d, s.params, s.n_max);
      CHECK(lut.at(i, j) == extract_schedule(p, s.n_max));
    }

  LutSpec diag = s;
  diag.diagonal = true;
  const Lut dl = build_lut(diag);
  CHECK(dl.entries.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(dl.entries[i] == lut.at(i, i));
  CHECK(lookup(dl, -10.5, -12.2) == lut.at(1, 1));
}

TEST_CASE("binary and text round trip") {
  LutSpec s;
  s.snr_min_db = -16.0;
  s.snr_max_db = -8.0;
  s.step_db = 2.0;
  s.n_max = 2500;
  s.params.packet_bits = 32;
  const Lut lut = build_lut(s);
  std::stringstream buf;
  write_lut(buf, lut);
  CHECK(buf.str().rfind("CLRQLUT1", 0) == 0);
  const Lut back = read_lut(buf);
  CHECK(back.entries == lut.entries);
  CHECK(back.spec.snr_min_db == s.snr_min_db);
  CHECK(back.spec.step_db == s.step_db);
  CHECK(back.spec.n_max == 2500);
  CHECK(back.spec.params.packet_bits == 32);
  CHECK(back.spec.diagonal == false);

  std::stringstream trunc(buf.str().substr(0, 40));
  CHECK_THROWS(read_lut(trunc));
  std::ostringstream text;
  write_lut_text(text, lut);
  CHECK_FALSE(text.str().empty());
}

TEST_CASE("resolution experiment orders by step") {
  FadingModel m;
  const auto rows = resolution_experiment({8.0, 2.0, 0.5}, m, FblParams{}, 1500, 200, 7);
  REQUIRE(rows.size() == 4);
  CHECK(rows.back().step_db == 0.0);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    CHECK(rows[i].mean_loop_error >= rows[i + 1].mean_loop_error);
}
