#pragma once

#include "clarq/fbl.hpp"

#include <string>
#include <vector>

namespace clarq {

/// Tabulated per-blocklength error rates of a UL/DL link pair together with
/// the slot floors. Entry 0 of each table is 1.0 (no transmission).
struct LinkModel {
  std::vector<double> ul_error;
  std::vector<double> dl_error;
  int n_min_ul = 1;
  int n_min_dl = 1;

  static LinkModel from_channels(const ChannelSpec& ul, const ChannelSpec& dl,
                                 const FblParams& params, int n_max);
  /// Blocklength-independent error rates; used to inject idealised links.
  static LinkModel constant(int n_max, double eps_ul, double eps_dl, int n_min_ul, int n_min_dl);

  int n_max() const { return static_cast<int>(ul_error.size()) - 1; }
  /// Enough blocklength left for one UL attempt plus its DL slot.
  bool can_attempt(int n) const { return n >= static_cast<long long>(n_min_ul) + n_min_dl; }
};

/// CLARQ allocation in reduced form: the UL slots of every attempt plus the
/// DL slot that follows the last one. With zero feedback cost the DL slot of
/// attempt i is everything left after UL slot i.
struct Schedule {
  std::vector<int> ul_slots;
  int final_dl = 0;

  int attempts() const { return static_cast<int>(ul_slots.size()); }
  bool empty() const { return ul_slots.empty(); }
  /// Total blocklength the schedule spans.
  int total() const;
  /// Derived DL slot per attempt: n^D_i = n^D_{i-1} - n^U_i, n^D_0 = total().
  std::vector<int> dl_slots() const;

  bool operator==(const Schedule&) const = default;
};

std::string to_string(const Schedule& s);

/// Throws std::invalid_argument if a slot falls below its floor.
void validate_schedule(const Schedule& s, int n_min_ul, int n_min_dl);

/// 1 - closed-loop reliability, folded from the last attempt backwards so
/// that tiny error rates keep full relative precision.
double schedule_loop_error(const Schedule& s, const LinkModel& link);
double schedule_loop_error(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                           int packet_bits);

/// Closed-loop reliability as the sum over attempts of
/// P(first i-1 UL fail) * P(UL i and its DL succeed).
double schedule_loop_reliability(const Schedule& s, const LinkModel& link);
double schedule_loop_reliability(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                                 int packet_bits);

}  // namespace clarq
