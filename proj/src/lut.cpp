#include "clarq/lut.hpp"

#include "binio.hpp"
#include "clarq/dp.hpp"
#include "clarq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace clarq {

namespace {
// Absorbs binary rounding so that an SNR given exactly on a grid point maps to it.
constexpr double kGridSlack = 1e-9;
}  // namespace

void LutSpec::validate() const {
  params.validate();
  if (!std::isfinite(snr_min_db) || !std::isfinite(snr_max_db) || !(snr_min_db < snr_max_db))
    throw std::invalid_argument("LUT SNR range must satisfy snr_min_db < snr_max_db");
  if (!(step_db > 0.0)) throw std::invalid_argument("LUT step_db must be positive");
  if (n_max < 2 || n_max > std::numeric_limits<std::uint16_t>::max())
    throw std::invalid_argument("LUT n_max must lie in [2, 65535]");
  if ((snr_max_db - snr_min_db) / step_db > 1e5)
    throw std::invalid_argument("LUT grid too fine for its range");
}

int LutSpec::points() const {
  return static_cast<int>(std::floor((snr_max_db - snr_min_db) / step_db + kGridSlack)) + 1;
}

double LutSpec::grid_db(int index) const { return snr_min_db + index * step_db; }

int LutSpec::index_of(double snr_db) const {
  const double pos = std::floor((snr_db - snr_min_db) / step_db + kGridSlack);
  return static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(points() - 1)));
}

const Schedule& Lut::at(int ul_index, int dl_index) const {
  if (spec.diagonal) return entries.at(static_cast<std::size_t>(std::min(ul_index, dl_index)));
  return entries.at(static_cast<std::size_t>(ul_index) * spec.points() + dl_index);
}

namespace {

Schedule solve_point(const LutSpec& spec, double ul_db, double dl_db) {
  const ChannelSpec ul = ChannelSpec::from_db(ul_db);
  const ChannelSpec dl = ChannelSpec::from_db(dl_db);
  const long long floors = static_cast<long long>(min_blocklength(ul, spec.params)) +
                           min_blocklength(dl, spec.params);
  if (floors > spec.n_max) return {};
  return extract_schedule(solve_policy(ul, dl, spec.params, spec.n_max), spec.n_max);
}

}  // namespace

Lut build_lut(const LutSpec& spec, int workers) {
  spec.validate();
  Lut lut;
  lut.spec = spec;
  const int pts = spec.points();
  const std::size_t count =
      spec.diagonal ? static_cast<std::size_t>(pts) : static_cast<std::size_t>(pts) * pts;
  lut.entries.resize(count);
  parallel_for(count, workers, [&](std::size_t k) {
    const int iu = spec.diagonal ? static_cast<int>(k) : static_cast<int>(k / pts);
    const int id = spec.diagonal ? static_cast<int>(k) : static_cast<int>(k % pts);
    lut.entries[k] = solve_point(spec, spec.grid_db(iu), spec.grid_db(id));
  });
  return lut;
}

const Schedule& lookup(const Lut& lut, double ul_snr_db, double dl_snr_db) {
  return lut.at(lut.spec.index_of(ul_snr_db), lut.spec.index_of(dl_snr_db));
}

namespace {
constexpr std::string_view kLutMagic = "CLRQLUT1";
constexpr std::uint32_t kLutVersion = 1;
}  // namespace

void write_lut(std::ostream& out, const Lut& lut) {
  using namespace binio;
  lut.spec.validate();
  put_magic(out, kLutMagic);
  put_u32(out, kLutVersion);
  put_f64(out, lut.spec.snr_min_db);
  put_f64(out, lut.spec.snr_max_db);
  put_f64(out, lut.spec.step_db);
  put_i32(out, lut.spec.params.packet_bits);
  put_f64(out, lut.spec.params.eps_max);
  put_i32(out, lut.spec.n_max);
  put_u32(out, lut.spec.diagonal ? 1u : 0u);
  put_u32(out, static_cast<std::uint32_t>(lut.entries.size()));
  for (const Schedule& s : lut.entries) {
    if (s.empty()) {
      put_u16(out, 0);
      continue;
    }
    put_u16(out, static_cast<std::uint16_t>(s.ul_slots.size() + 1));
    for (int n : s.ul_slots) put_u16(out, static_cast<std::uint16_t>(n));
    put_u16(out, static_cast<std::uint16_t>(s.final_dl));
  }
  if (!out) throw std::runtime_error("write_lut: stream error");
}

Lut read_lut(std::istream& in) {
  using namespace binio;
  expect_magic(in, kLutMagic);
  if (get_u32(in) != kLutVersion) throw std::runtime_error("read_lut: unsupported version");
  Lut lut;
  lut.spec.snr_min_db = get_f64(in);
  lut.spec.snr_max_db = get_f64(in);
  lut.spec.step_db = get_f64(in);
  lut.spec.params.packet_bits = get_i32(in);
  lut.spec.params.eps_max = get_f64(in);
  lut.spec.n_max = get_i32(in);
  lut.spec.diagonal = get_u32(in) != 0;
  lut.spec.validate();
  const std::uint32_t count = get_u32(in);
  const auto pts = static_cast<std::uint64_t>(lut.spec.points());
  if (count != (lut.spec.diagonal ? pts : pts * pts))
    throw std::runtime_error("read_lut: entry count does not match the grid");
  lut.entries.resize(count);
  for (Schedule& s : lut.entries) {
    const std::uint16_t len = get_u16(in);
    if (len == 0) continue;
    for (std::uint16_t i = 0; i + 1 < len; ++i) s.ul_slots.push_back(get_u16(in));
    s.final_dl = get_u16(in);
  }
  return lut;
}

void write_lut_text(std::ostream& out, const Lut& lut) {
  out << "# step_db " << lut.spec.step_db << " n_max " << lut.spec.n_max << " packet_bits "
      << lut.spec.params.packet_bits << " eps_max " << lut.spec.params.eps_max
      << (lut.spec.diagonal ? " diagonal" : "") << '\n';
  out << "ul_snr_db dl_snr_db schedule\n";
  const int pts = lut.spec.points();
  for (int iu = 0; iu < pts; ++iu) {
    for (int id = 0; id < pts; ++id) {
      if (lut.spec.diagonal && id != iu) continue;
      const Schedule& s = lut.at(iu, id);
      out << lut.spec.grid_db(iu) << ' ' << lut.spec.grid_db(id) << ' '
          << (s.empty() ? std::string("infeasible") : to_string(s)) << '\n';
    }
  }
}

std::vector<ResolutionRow> resolution_experiment(const std::vector<double>& steps_db,
                                                 const FadingModel& model,
                                                 const FblParams& params, int n_max, int runs,
                                                 std::uint64_t seed, int workers) {
  model.validate();
  if (steps_db.empty()) throw std::invalid_argument("resolution experiment needs step sizes");
  const double coarsest = *std::max_element(steps_db.begin(), steps_db.end());
  if (!(coarsest > 0.0)) throw std::invalid_argument("LUT steps must be positive");

  // Wide enough that the lower edge is always infeasible and the upper edge
  // is past any draw that matters; deeper draws clamp to the edges.
  const double fade = model.rayleigh_enabled ? model.fading_scale_db : 0.0;
  const double low = model.base_snr_db - fade - 5.0 * model.shadow_sigma_db - 30.0;
  const double high = model.base_snr_db + 5.0 * model.shadow_sigma_db + 10.0;
  const double origin = std::floor(low / coarsest) * coarsest;
  const double top = std::ceil(high / coarsest) * coarsest;

  CampaignConfig cfg;
  cfg.model = model;
  cfg.params = params;
  cfg.n_max = n_max;
  cfg.runs = runs;
  cfg.seed = seed;
  cfg.workers = workers;

  std::vector<ResolutionRow> rows;
  for (double step : steps_db) {
    LutSpec spec;
    spec.snr_min_db = origin;
    spec.snr_max_db = top;
    spec.step_db = step;
    spec.params = params;
    spec.n_max = n_max;
    const Lut lut = build_lut(spec, workers);
    cfg.strategies = {Strategy::lut};
    cfg.lut = &lut;
    auto res = run_campaign(cfg);
    rows.push_back({step, res.aggregates[0].mean_loop_error,
                    std::move(res.aggregates[0].per_run_errors)});
  }
  cfg.strategies = {Strategy::optimal};
  cfg.lut = nullptr;
  auto exact = run_campaign(cfg);
  rows.push_back({0.0, exact.aggregates[0].mean_loop_error,
                  std::move(exact.aggregates[0].per_run_errors)});
  return rows;
}

}  // namespace clarq
