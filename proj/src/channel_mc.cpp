#include "clarq/channel_mc.hpp"

#include "clarq/baseline.hpp"
#include "clarq/dp.hpp"
#include "clarq/lut.hpp"
#include "clarq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace clarq {

void FadingModel::validate() const {
  if (!std::isfinite(base_snr_db)) throw std::invalid_argument("base SNR must be finite");
  if (!(shadow_sigma_db >= 0.0) || !std::isfinite(shadow_sigma_db))
    throw std::invalid_argument("shadowing deviation must be a nonnegative dB value");
  if (!std::isfinite(fading_scale_db)) throw std::invalid_argument("fading scale must be finite");
}

namespace {

double standard_normal(Xoshiro256& rng) {
  const double u1 = rng.uniform_open();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double unit_exponential(Xoshiro256& rng) { return -std::log(rng.uniform_open()); }

double draw_snr_db(const FadingModel& m, double z, double x) {
  double snr = m.base_snr_db + m.shadow_sigma_db * z;
  if (m.rayleigh_enabled) snr += 10.0 * std::log10(x) - m.fading_scale_db;
  return snr;
}

}  // namespace

ChannelDraw draw_channel_pair(const FadingModel& model, Xoshiro256& rng) {
  const double zu = standard_normal(rng);
  const double xu = unit_exponential(rng);
  const double zd = standard_normal(rng);
  const double xd = unit_exponential(rng);
  ChannelDraw d;
  d.ul_snr_db = draw_snr_db(model, zu, xu);
  d.dl_snr_db = model.ul_dl_independent ? draw_snr_db(model, zd, xd) : d.ul_snr_db;
  d.ul = ChannelSpec::from_db(d.ul_snr_db);
  d.dl = ChannelSpec::from_db(d.dl_snr_db);
  return d;
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::optimal: return "optimal";
    case Strategy::one_shot: return "one_shot";
    case Strategy::naive: return "naive";
    case Strategy::lut: return "lut";
  }
  return "unknown";
}

std::optional<Strategy> parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::optimal, Strategy::one_shot, Strategy::naive, Strategy::lut})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

double strategy_loop_error(Strategy strategy, const ChannelDraw& draw, const FblParams& params,
                           int n_max, const Lut* lut) {
  const int nu = min_blocklength(draw.ul, params);
  const int nd = min_blocklength(draw.dl, params);
  if (static_cast<long long>(nu) + nd > n_max) return 1.0;
  const int d = params.packet_bits;
  switch (strategy) {
    case Strategy::optimal: {
      const DpPolicy policy = solve_policy(draw.ul, draw.dl, params, n_max);
      return schedule_loop_error(extract_schedule(policy, n_max), draw.ul, draw.dl, d);
    }
    case Strategy::one_shot: {
      const auto split = solve_one_shot(draw.ul, draw.dl, params, n_max);
      return split ? split->loop_error : 1.0;
    }
    case Strategy::naive:
      return schedule_loop_error(naive_schedule(draw.ul, draw.dl, params, n_max), draw.ul,
                                 draw.dl, d);
    case Strategy::lut: {
      if (!lut) throw std::invalid_argument("LUT strategy requested without a LUT");
      if (lut->spec.n_max != n_max)
        throw std::invalid_argument("LUT built for a different frame length");
      const Schedule& s = lookup(*lut, draw.ul_snr_db, draw.dl_snr_db);
      return schedule_loop_error(s, draw.ul, draw.dl, d);
    }
  }
  return 1.0;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.model.validate();
  cfg.params.validate();
  if (cfg.runs < 1) throw std::invalid_argument("campaign needs at least one run");
  if (cfg.n_max < 2) throw std::invalid_argument("campaign n_max must be >= 2");
  if (cfg.strategies.empty()) throw std::invalid_argument("campaign needs a strategy");
  for (Strategy s : cfg.strategies)
    if (s == Strategy::lut && !cfg.lut)
      throw std::invalid_argument("LUT strategy requested without a LUT");

  CampaignResult res;
  res.runs.resize(static_cast<std::size_t>(cfg.runs));
  parallel_for(res.runs.size(), cfg.workers, [&](std::size_t r) {
    Xoshiro256 rng(cfg.seed, r);
    const ChannelDraw draw = draw_channel_pair(cfg.model, rng);
    RunRecord& rec = res.runs[r];
    rec.run = static_cast<int>(r);
    rec.ul_snr_db = draw.ul_snr_db;
    rec.dl_snr_db = draw.dl_snr_db;
    for (Strategy s : cfg.strategies)
      rec.loop_error.push_back(strategy_loop_error(s, draw, cfg.params, cfg.n_max, cfg.lut));
  });

  for (std::size_t k = 0; k < cfg.strategies.size(); ++k) {
    McAggregate agg;
    agg.strategy = cfg.strategies[k];
    agg.runs = cfg.runs;
    agg.per_run_errors.reserve(res.runs.size());
    double sum = 0.0;
    for (const auto& rec : res.runs) {
      agg.per_run_errors.push_back(rec.loop_error[k]);
      sum += rec.loop_error[k];
    }
    agg.mean_loop_error = sum / cfg.runs;
    res.aggregates.push_back(std::move(agg));
  }
  return res;
}

std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values, int resamples,
                                            std::uint64_t seed, double level) {
  if (values.empty()) throw std::invalid_argument("bootstrap of an empty sample");
  if (resamples < 2) throw std::invalid_argument("bootstrap needs at least two resamples");
  const std::size_t n = values.size();
  std::vector<double> means(static_cast<std::size_t>(resamples));
  Xoshiro256 rng(seed, 0xb007);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng() % n];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  auto pick = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::clamp(
        std::floor(q * static_cast<double>(resamples - 1)), 0.0, static_cast<double>(resamples - 1)));
    return means[idx];
  };
  return {pick(tail), pick(1.0 - tail)};
}

void write_campaign_csv(std::ostream& out, const CampaignConfig& cfg,
                        const CampaignResult& result) {
  out << "run,ul_snr_db,dl_snr_db,strategy,loop_error\n";
  out.precision(17);
  for (const auto& rec : result.runs)
    for (std::size_t k = 0; k < cfg.strategies.size(); ++k)
      out << rec.run << ',' << rec.ul_snr_db << ',' << rec.dl_snr_db << ','
          << to_string(cfg.strategies[k]) << ',' << rec.loop_error[k] << '\n';
}

}  // namespace clarq
