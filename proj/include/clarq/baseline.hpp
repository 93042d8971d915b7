#pragma once

#include "clarq/fbl.hpp"
#include "clarq/schedule.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace clarq {

struct OneShotSplit {
  int n_ul = 0;
  int n_dl = 0;
  double eps_ul = 1.0;
  double eps_dl = 1.0;
  double loop_reliability = 0.0;
  double loop_error = 1.0;
};

/// Real root in (0, n_total) of eU(x) = eD(n_total - x).
double equal_error_split(const ChannelSpec& ul, const ChannelSpec& dl, int packet_bits,
                         double n_total);

/// Coefficients {a3, a2, a1, a0} of the cubic in n_ul whose root in
/// (0, n_total) is the equal-error split.
std::array<double, 4> one_shot_cubic(const ChannelSpec& ul, const ChannelSpec& dl,
                                     int packet_bits, double n_total);

/// Best single UL + DL split of n_total symbols, or nullopt if n_total cannot
/// host both slot floors.
std::optional<OneShotSplit> solve_one_shot(const ChannelSpec& ul, const ChannelSpec& dl,
                                           const FblParams& params, int n_total);

struct StaticHarqResult {
  double reliability = 0.0;
  /// Attempts whose cumulative error still exceeds eps_max, e.g. "UL attempt 1".
  std::vector<std::string> eps_max_violations;
};

/// Static type-II HARQ schedule: I UL slots followed by I DL slots, with a
/// feedback exchange between consecutive slots. Throws std::domain_error if
/// the schedule does not fit in the frame.
StaticHarqResult static_harq_reliability(const ChannelSpec& ul, const ChannelSpec& dl,
                                         const FblParams& params, const FrameBudget& budget,
                                         const std::vector<int>& ul_slots,
                                         const std::vector<int>& dl_slots);

/// UL slot of the one-shot split of the remaining blocklength, or nullopt if
/// it cannot host another attempt.
std::optional<int> naive_clarq_policy(const ChannelSpec& ul, const ChannelSpec& dl,
                                      const FblParams& params, int n_remaining);

/// Greedy schedule built by applying naive_clarq_policy stage by stage.
Schedule naive_schedule(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                        int n_max);

/// One-shot split written as a one-attempt schedule (empty if infeasible).
Schedule one_shot_schedule(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                           int n_max);

}  // namespace clarq
