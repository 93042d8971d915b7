#pragma once

#include "clarq/fbl.hpp"
#include "clarq/schedule.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace clarq {

/// Memo tables of the blocklength DP, indexed by remaining blocklength
/// n in [0, n_max]. `loop_error[n]` is 1 - xi[n] accumulated without the
/// cancellation that 1 - xi suffers near xi = 1.
struct DpPolicy {
  std::vector<int> phi;
  std::vector<double> xi;
  std::vector<double> loop_error;
  LinkModel link;
  /// Channels the tables were built from, if any (absent for injected tables).
  std::optional<ChannelSpec> ul_channel;
  std::optional<ChannelSpec> dl_channel;
  FblParams params;

  int n_max() const { return static_cast<int>(phi.size()) - 1; }
  int n_min_ul() const { return link.n_min_ul; }
  int n_min_dl() const { return link.n_min_dl; }
};

struct DpOptions {
  /// Restrict the first UL slot to m <= n / 2. Only valid when both
  /// directions share the same error table.
  bool symmetric_pruning = false;
};

DpPolicy solve_policy(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                      int n_max, DpOptions opts = {});
DpPolicy solve_policy(const LinkModel& link, DpOptions opts = {});

/// Walks phi from n_max down. Empty schedule if n_max cannot host one attempt.
Schedule extract_schedule(const DpPolicy& policy, int n_max);

double loop_reliability(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                        const FblParams& params);

struct ScheduleStats {
  double loop_reliability = 0.0;
  double loop_error = 1.0;
  double expected_ul_energy = 0.0;
  double min_ul_energy = 0.0;
  double max_ul_energy = 0.0;
};

/// Attempt i is only transmitted after the first i-1 UL attempts failed.
ScheduleStats energy_stats(const Schedule& s, const LinkModel& link, double p_ul);
ScheduleStats energy_stats(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                           const FblParams& params, double p_ul);

struct StructureReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the schedule against the structural properties of an optimal
/// schedule: nonincreasing UL slots, equal-error terminal split (to within
/// one symbol) and, for identical UL/DL links only, the per-stage slot
/// bounds and the bounds on the number of attempts.
StructureReport verify_structure(const Schedule& s, const DpPolicy& policy, bool symmetric);

/// Human-readable warnings for slots longer than `ceiling` symbols, where the
/// normal approximation is no longer a meaningful model.
std::vector<std::string> validity_warnings(const Schedule& s, int ceiling = 4000);

/// Binary policy record: "CLRQPOL1", little-endian header, then phi (i32),
/// xi (f64), loop_error (f64) and both error tables (f64) for n = 0..n_max.
void write_policy(std::ostream& out, const DpPolicy& policy);
DpPolicy read_policy(std::istream& in);
void write_policy_text(std::ostream& out, const DpPolicy& policy);

}  // namespace clarq
