#include "clarq/schedule.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace clarq {

LinkModel LinkModel::from_channels(const ChannelSpec& ul, const ChannelSpec& dl,
                                   const FblParams& params, int n_max) {
  params.validate();
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  LinkModel link;
  link.ul_error = error_table(ul, params.packet_bits, n_max);
  link.dl_error = error_table(dl, params.packet_bits, n_max);
  link.n_min_ul = min_blocklength(ul, params);
  link.n_min_dl = min_blocklength(dl, params);
  return link;
}

LinkModel LinkModel::constant(int n_max, double eps_ul, double eps_dl, int n_min_ul,
                              int n_min_dl) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  if (n_min_ul < 1 || n_min_dl < 1) throw std::invalid_argument("slot floors must be >= 1");
  LinkModel link;
  link.ul_error.assign(static_cast<std::size_t>(n_max) + 1, eps_ul);
  link.dl_error.assign(static_cast<std::size_t>(n_max) + 1, eps_dl);
  link.ul_error[0] = link.dl_error[0] = 1.0;
  link.n_min_ul = n_min_ul;
  link.n_min_dl = n_min_dl;
  return link;
}

int Schedule::total() const {
  return std::accumulate(ul_slots.begin(), ul_slots.end(), 0) + final_dl;
}

std::vector<int> Schedule::dl_slots() const {
  std::vector<int> dl(ul_slots.size());
  int remaining = total();
  for (std::size_t i = 0; i < ul_slots.size(); ++i) {
    remaining -= ul_slots[i];
    dl[i] = remaining;
  }
  return dl;
}

std::string to_string(const Schedule& s) {
  std::ostringstream out;
  out << '[';
  for (int n : s.ul_slots) out << n << ',';
  out << s.final_dl << ']';
  return out.str();
}

void validate_schedule(const Schedule& s, int n_min_ul, int n_min_dl) {
  if (s.empty()) return;
  const auto dl = s.dl_slots();
  for (std::size_t i = 0; i < s.ul_slots.size(); ++i) {
    if (s.ul_slots[i] < n_min_ul)
      throw std::invalid_argument("UL slot " + std::to_string(i + 1) + " below its floor");
    if (dl[i] < n_min_dl)
      throw std::invalid_argument("DL slot " + std::to_string(i + 1) + " below its floor");
  }
}

namespace {

template <typename UlErr, typename DlErr>
double fold_error(const Schedule& s, UlErr&& ul_err, DlErr&& dl_err) {
  if (s.empty()) return 1.0;
  const auto dl = s.dl_slots();
  double e = 1.0;
  for (std::size_t k = s.ul_slots.size(); k-- > 0;) {
    const double eu = ul_err(s.ul_slots[k]);
    const double ed = dl_err(dl[k]);
    e = eu * e + ed - eu * ed;
  }
  return e;
}

template <typename UlErr, typename DlErr>
double sum_reliability(const Schedule& s, UlErr&& ul_err, DlErr&& dl_err) {
  const auto dl = s.dl_slots();
  double reach = 1.0;
  double mu = 0.0;
  for (std::size_t k = 0; k < s.ul_slots.size(); ++k) {
    const double eu = ul_err(s.ul_slots[k]);
    const double ed = dl_err(dl[k]);
    mu += (1.0 - ed) * (1.0 - eu) * reach;
    reach *= eu;
  }
  return mu;
}

double lookup(const std::vector<double>& table, int n) {
  if (n < 0 || n >= static_cast<int>(table.size()))
    throw std::out_of_range("slot length outside the link model's table");
  return table[n];
}

}  // namespace

double schedule_loop_error(const Schedule& s, const LinkModel& link) {
  return fold_error(
      s, [&](int n) { return lookup(link.ul_error, n); },
      [&](int n) { return lookup(link.dl_error, n); });
}

double schedule_loop_error(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                           int packet_bits) {
  return fold_error(
      s, [&](int n) { return packet_error_rate(ul, n, packet_bits); },
      [&](int n) { return packet_error_rate(dl, n, packet_bits); });
}

double schedule_loop_reliability(const Schedule& s, const LinkModel& link) {
  return sum_reliability(
      s, [&](int n) { return lookup(link.ul_error, n); },
      [&](int n) { return lookup(link.dl_error, n); });
}

double schedule_loop_reliability(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                                 int packet_bits) {
  return sum_reliability(
      s, [&](int n) { return packet_error_rate(ul, n, packet_bits); },
      [&](int n) { return packet_error_rate(dl, n, packet_bits); });
}

}  // namespace clarq
