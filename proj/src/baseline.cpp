#include "clarq/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clarq {

namespace {

// Argument of Q in the error-rate formula, extended to real blocklengths.
double q_arg(const ChannelSpec& ch, double n, int d) {
  return std::sqrt(n / ch.dispersion) * (ch.capacity - d / n);
}

double split_error(const ChannelSpec& ul, const ChannelSpec& dl, int d, int n_ul, int n_dl) {
  const double a = packet_error_rate(ul, n_ul, d);
  const double b = packet_error_rate(dl, n_dl, d);
  return a + b - a * b;
}

}  // namespace

double equal_error_split(const ChannelSpec& ul, const ChannelSpec& dl, int packet_bits,
                         double n_total) {
  if (!(n_total > 0.0)) throw std::invalid_argument("equal_error_split: n_total must be positive");
  // q_arg(ul, x) - q_arg(dl, N - x) runs from -inf to +inf and is increasing.
  double lo = 0.0;
  double hi = n_total;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * n_total; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = q_arg(ul, mid, packet_bits) - q_arg(dl, n_total - mid, packet_bits);
    (g < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::array<double, 4> one_shot_cubic(const ChannelSpec& ul, const ChannelSpec& dl,
                                     int packet_bits, double n_total) {
  const double vu = ul.dispersion, vd = dl.dispersion;
  const double cu = ul.capacity, cd = dl.capacity;
  const double d = packet_bits, n = n_total;
  return {
      vu * cd * cd + vd * cu * cu,
      2 * d * vu * cd - 2 * n * vu * cd * cd - n * vd * cu * cu - 2 * d * vd * cu,
      n * n * vu * cd * cd + d * d * vu - 2 * d * n * vu * cd + 2 * d * n * vd * cu + d * d * vd,
      -d * d * n * vd,
  };
}

std::optional<OneShotSplit> solve_one_shot(const ChannelSpec& ul, const ChannelSpec& dl,
                                           const FblParams& params, int n_total) {
  if (n_total < 2) throw std::invalid_argument("solve_one_shot: n_total must be >= 2");
  const int d = params.packet_bits;
  const int lo = min_blocklength(ul, params);
  const int hi = n_total - min_blocklength(dl, params);
  if (hi < lo) return std::nullopt;

  auto err = [&](int m) { return split_error(ul, dl, d, m, n_total - m); };
  const double root = equal_error_split(ul, dl, d, n_total);
  const int f = std::clamp(static_cast<int>(std::floor(root)), lo, hi);
  const int c = std::clamp(static_cast<int>(std::ceil(root)), lo, hi);
  int m = err(c) < err(f) ? c : f;

  // Equal error is only the exact optimum for identical links; with unequal
  // links the integer optimum can sit a few symbols away, so finish by descent.
  double e = err(m);
  for (;;) {
    if (m > lo && err(m - 1) <= e) {
      --m;
      e = err(m);
    } else if (m < hi && err(m + 1) < e) {
      ++m;
      e = err(m);
    } else {
      break;
    }
  }

  OneShotSplit s;
  s.n_ul = m;
  s.n_dl = n_total - m;
  s.eps_ul = packet_error_rate(ul, s.n_ul, d);
  s.eps_dl = packet_error_rate(dl, s.n_dl, d);
  s.loop_reliability = (1.0 - s.eps_ul) * (1.0 - s.eps_dl);
  s.loop_error = e;
  return s;
}

StaticHarqResult static_harq_reliability(const ChannelSpec& ul, const ChannelSpec& dl,
                                         const FblParams& params, const FrameBudget& budget,
                                         const std::vector<int>& ul_slots,
                                         const std::vector<int>& dl_slots) {
  budget.validate();
  if (ul_slots.empty() || ul_slots.size() != dl_slots.size())
    throw std::invalid_argument("static HARQ needs the same nonzero number of UL and DL slots");
  long sum_ul = 0, sum_dl = 0;
  StaticHarqResult res;
  for (std::size_t i = 0; i < ul_slots.size(); ++i) {
    if (ul_slots[i] < 1 || dl_slots[i] < 1)
      throw std::invalid_argument("static HARQ slots must be >= 1 symbol");
    sum_ul += ul_slots[i];
    sum_dl += dl_slots[i];
    if (harq2_error_rate(ul, static_cast<int>(sum_ul), params.packet_bits) > params.eps_max)
      res.eps_max_violations.push_back("UL attempt " + std::to_string(i + 1));
    if (harq2_error_rate(dl, static_cast<int>(sum_dl), params.packet_bits) > params.eps_max)
      res.eps_max_violations.push_back("DL attempt " + std::to_string(i + 1));
  }
  const double slots = static_cast<double>(ul_slots.size());
  const double used = static_cast<double>(sum_ul + sum_dl) * budget.symbol_time +
                      (2.0 * slots - 1.0) * budget.feedback_time;
  if (used > budget.frame_time * (1.0 + 1e-12))
    throw std::domain_error("static HARQ schedule exceeds the frame");
  res.reliability =
      (1.0 - harq2_error_rate(ul, static_cast<int>(sum_ul), params.packet_bits)) *
      (1.0 - harq2_error_rate(dl, static_cast<int>(sum_dl), params.packet_bits));
  return res;
}

std::optional<int> naive_clarq_policy(const ChannelSpec& ul, const ChannelSpec& dl,
                                      const FblParams& params, int n_remaining) {
  if (n_remaining < 2) return std::nullopt;
  const auto split = solve_one_shot(ul, dl, params, n_remaining);
  if (!split) return std::nullopt;
  return split->n_ul;
}

Schedule naive_schedule(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                        int n_max) {
  Schedule s;
  int n = n_max;
  while (auto m = naive_clarq_policy(ul, dl, params, n)) {
    s.ul_slots.push_back(*m);
    n -= *m;
  }
  s.final_dl = s.empty() ? 0 : n;
  return s;
}

Schedule one_shot_schedule(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                           int n_max) {
  Schedule s;
  if (n_max < 2) return s;
  if (auto split = solve_one_shot(ul, dl, params, n_max)) {
    s.ul_slots = {split->n_ul};
    s.final_dl = split->n_dl;
  }
  return s;
}

}  // namespace clarq
