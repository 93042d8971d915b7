#pragma once

#include "clarq/dp.hpp"
#include "clarq/fbl.hpp"
#include "clarq/schedule.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace clarq {

struct FrameOutcome {
  int ul_attempts_used = 0;
  bool ul_success = false;
  bool dl_success = false;
  int ul_symbols_spent = 0;
  double elapsed_time = 0.0;  // seconds
};

enum class ScheduleSource { fixed, policy, naive };

struct SimConfig {
  long long frames = 1;
  std::uint64_t seed = 1;
  ScheduleSource source = ScheduleSource::fixed;
  Schedule schedule;                        // used by ScheduleSource::fixed
  std::shared_ptr<const DpPolicy> policy;   // used by ScheduleSource::policy
  FrameBudget budget;
  int workers = 1;
  bool keep_outcomes = false;
};

struct SimSummary {
  long long frames = 0;
  long long loop_successes = 0;
  long long ul_successes = 0;
  double loop_reliability = 0.0;
  double loop_error = 1.0;
  double mean_ul_symbols = 0.0;
  /// Unbiased sample variance of UL symbols per frame.
  double var_ul_symbols = 0.0;
  double p50_ul_symbols = 0.0;
  double p90_ul_symbols = 0.0;
  double p99_ul_symbols = 0.0;
  double max_elapsed_time = 0.0;
  /// Frame count per number of UL attempts (index 0 = no attempt possible).
  std::vector<long long> attempt_histogram;
  std::map<int, long long> ul_symbol_histogram;
};

struct SimResult {
  SimSummary summary;
  std::vector<FrameOutcome> outcomes;  // filled only with keep_outcomes
};

/// Runs Bernoulli-error frames of the CLARQ protocol. ACK/NACK is error-free
/// and costs ceil(T_f / T_S) symbols after every UL slot; the feedback after
/// the final DL slot is not charged. Throws std::invalid_argument before any
/// frame runs if the schedule source does not fit the budget.
SimResult run_frames(const SimConfig& cfg, const LinkModel& link);
SimResult run_frames(const SimConfig& cfg, const ChannelSpec& ul, const ChannelSpec& dl,
                     const FblParams& params);

/// P(exactly i UL attempts are made), i = 0..I, for a fixed schedule.
std::vector<double> attempt_distribution(const Schedule& s, const LinkModel& link);

void write_outcomes_csv(std::ostream& out, const std::vector<FrameOutcome>& outcomes);
std::string summary_json(const SimSummary& summary);

}  // namespace clarq
