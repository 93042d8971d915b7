#pragma once

#include "clarq/dp.hpp"
#include "clarq/fbl.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clarq {

enum class BudgetMode {
  worst_case,  // every attempt transmitted
  expected,    // attempt i weighted by the probability that it happens
  none,
};

std::string to_string(BudgetMode m);
std::optional<BudgetMode> parse_budget_mode(const std::string& name);

struct ApcConfig {
  /// UL power levels as multiples of the default power, ascending.
  std::vector<double> power_levels{1.0, 1.25};
  double energy_budget = 0.0;
  int n_max = 2500;
  BudgetMode budget_mode = BudgetMode::worst_case;
  /// Largest number of UL attempts considered (at most 4).
  int max_stages = 4;
  /// Restrict the search to exactly this many attempts.
  std::optional<int> fixed_stages;
  /// Energy of one symbol at unit power, in the units of energy_budget.
  double symbol_energy = 1.0;
  int workers = 1;

  void validate() const;
};

struct ApcStage {
  int n_ul = 0;
  int n_dl = 0;
  double power = 1.0;
};

struct ApcResult {
  std::vector<ApcStage> stages;
  ScheduleStats stats;
};

/// Exhaustive search over stage counts, per-attempt power levels and nested
/// slot lengths. UL SNR scales linearly with the power level; the DL is
/// unaffected. Returns nullopt if nothing fits the budget.
std::optional<ApcResult> solve_apc(const ChannelSpec& ul_base, const ChannelSpec& dl,
                                   const FblParams& params, const ApcConfig& cfg);

/// Loop error and energy statistics of a power-annotated schedule.
ScheduleStats apc_stats(const std::vector<ApcStage>& stages, const ChannelSpec& ul_base,
                        const ChannelSpec& dl, const FblParams& params, double symbol_energy);

/// Worst-case UL energy of the unit-power DP schedule, the reference budget.
double plain_clarq_worst_energy(const ChannelSpec& ul, const ChannelSpec& dl,
                                const FblParams& params, int n_max, double symbol_energy);

std::string format_stages(const std::vector<ApcStage>& stages);

}  // namespace clarq
