#pragma once

#include "clarq/fbl.hpp"
#include "clarq/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace clarq {

struct Lut;

/// SNR_dB = base + shadow + fade with shadow ~ N(0, sigma^2) in dB and, when
/// Rayleigh fading is on, fade = 10 log10(X) - fading_scale_db, X ~ Exp(1).
struct FadingModel {
  double base_snr_db = 10.0;
  double shadow_sigma_db = 3.0;
  bool rayleigh_enabled = true;
  double fading_scale_db = 10.0;
  bool ul_dl_independent = true;

  void validate() const;
};

struct ChannelDraw {
  double ul_snr_db = 0.0;
  double dl_snr_db = 0.0;
  ChannelSpec ul;
  ChannelSpec dl;
};

/// Always consumes the same number of variates whatever the flags, so two
/// models driven by the same generator state see common random numbers.
ChannelDraw draw_channel_pair(const FadingModel& model, Xoshiro256& rng);

enum class Strategy { optimal, one_shot, naive, lut };

std::string to_string(Strategy s);
std::optional<Strategy> parse_strategy(const std::string& name);

struct CampaignConfig {
  FadingModel model;
  std::vector<Strategy> strategies{Strategy::optimal, Strategy::one_shot, Strategy::naive};
  FblParams params;
  int n_max = 2500;
  int runs = 5000;
  std::uint64_t seed = 1;
  int workers = 1;
  const Lut* lut = nullptr;  // required for Strategy::lut
};

struct RunRecord {
  int run = 0;
  double ul_snr_db = 0.0;
  double dl_snr_db = 0.0;
  std::vector<double> loop_error;  // one per strategy, in config order
};

struct McAggregate {
  Strategy strategy = Strategy::optimal;
  int runs = 0;
  double mean_loop_error = 0.0;
  std::vector<double> per_run_errors;
};

struct CampaignResult {
  std::vector<RunRecord> runs;
  std::vector<McAggregate> aggregates;
};

/// Analytic loop error of one strategy on one channel draw; 1.0 when the
/// draw cannot host a single attempt.
double strategy_loop_error(Strategy strategy, const ChannelDraw& draw, const FblParams& params,
                           int n_max, const Lut* lut = nullptr);

CampaignResult run_campaign(const CampaignConfig& cfg);

/// Percentile bootstrap confidence interval of the mean.
std::pair<double, double> bootstrap_mean_ci(const std::vector<double>& values, int resamples,
                                            std::uint64_t seed, double level = 0.95);

void write_campaign_csv(std::ostream& out, const CampaignConfig& cfg,
                        const CampaignResult& result);

}  // namespace clarq
