#include "clarq/dp.hpp"

#include "binio.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace clarq {

DpPolicy solve_policy(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
                      int n_max, DpOptions opts) {
  DpPolicy policy = solve_policy(LinkModel::from_channels(ul, dl, params, n_max), opts);
  policy.ul_channel = ul;
  policy.dl_channel = dl;
  policy.params = params;
  return policy;
}

DpPolicy solve_policy(const LinkModel& link, DpOptions opts) {
  const int n_max = link.n_max();
  if (n_max < 1) throw std::invalid_argument("solve_policy: n_max must be >= 1");
  const auto& eu = link.ul_error;
  const auto& ed = link.dl_error;
  const int nu = link.n_min_ul;
  const int nd = link.n_min_dl;

  DpPolicy p;
  p.link = link;
  p.phi.resize(static_cast<std::size_t>(n_max) + 1);
  p.xi.resize(p.phi.size());
  p.loop_error.resize(p.phi.size());

  // Minimised in the error domain: e(n) = eU(m) e(n-m) + eD(n-m) - eU(m) eD(n-m),
  // where e(n-m) = 1 once the remainder cannot host another attempt.
  for (int n = 0; n <= n_max; ++n) {
    if (!link.can_attempt(n)) {
      p.phi[n] = n;
      p.xi[n] = 0.0;
      p.loop_error[n] = 1.0;
      continue;
    }
    int hi = n - nd;
    if (opts.symmetric_pruning) hi = std::min(hi, n / 2);
    double best = 2.0;
    int arg = nu;
    for (int m = nu; m <= hi; ++m) {
      const double a = eu[m];
      const double b = ed[n - m];
      const double v = a * p.loop_error[n - m] + b - a * b;
      if (v < best) {
        best = v;
        arg = m;
      }
    }
    p.phi[n] = arg;
    p.loop_error[n] = best;
    p.xi[n] = 1.0 - best;
  }
  return p;
}

Schedule extract_schedule(const DpPolicy& policy, int n_max) {
  if (n_max > policy.n_max())
    throw std::invalid_argument("extract_schedule: policy built for a shorter frame");
  Schedule s;
  int n = n_max;
  while (policy.link.can_attempt(n)) {
    const int m = policy.phi[n];
    s.ul_slots.push_back(m);
    n -= m;
  }
  s.final_dl = s.empty() ? 0 : n;
  return s;
}

double loop_reliability(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                        const FblParams& params) {
  return schedule_loop_reliability(s, ul, dl, params.packet_bits);
}

namespace {

template <typename UlErr>
ScheduleStats stats_from(const Schedule& s, double loop_error, UlErr&& ul_err, double p_ul) {
  ScheduleStats st;
  st.loop_error = loop_error;
  st.loop_reliability = 1.0 - loop_error;
  if (s.empty()) return st;
  double reach = 1.0;
  long total = 0;
  for (int n : s.ul_slots) {
    st.expected_ul_energy += p_ul * n * reach;
    reach *= ul_err(n);
    total += n;
  }
  st.min_ul_energy = p_ul * s.ul_slots.front();
  st.max_ul_energy = p_ul * static_cast<double>(total);
  return st;
}

}  // namespace

ScheduleStats energy_stats(const Schedule& s, const LinkModel& link, double p_ul) {
  return stats_from(s, schedule_loop_error(s, link), [&](int n) { return link.ul_error.at(n); },
                    p_ul);
}

ScheduleStats energy_stats(const Schedule& s, const ChannelSpec& ul, const ChannelSpec& dl,
                           const FblParams& params, double p_ul) {
  return stats_from(
      s, schedule_loop_error(s, ul, dl, params.packet_bits),
      [&](int n) { return packet_error_rate(ul, n, params.packet_bits); }, p_ul);
}

StructureReport verify_structure(const Schedule& s, const DpPolicy& policy, bool symmetric) {
  StructureReport rep;
  if (s.empty()) return rep;
  const int attempts = s.attempts();
  const auto dl = s.dl_slots();
  const auto& eu = policy.link.ul_error;
  const auto& ed = policy.link.dl_error;
  const int nu = policy.n_min_ul();
  const int nd = policy.n_min_dl();
  const int total = s.total();
  if (total > policy.n_max()) {
    rep.violations.push_back("schedule longer than the policy tables");
    return rep;
  }

  for (int i = 1; i < attempts; ++i) {
    if (s.ul_slots[i] > s.ul_slots[i - 1]) {
      rep.violations.push_back("monotonicity: UL slot " + std::to_string(i + 1) + " (" +
                               std::to_string(s.ul_slots[i]) + ") exceeds UL slot " +
                               std::to_string(i) + " (" + std::to_string(s.ul_slots[i - 1]) + ")");
    }
  }

  // eU(k) - eD(r - k) is decreasing in k, so the real equal-error point is
  // bracketed by the neighbours of the chosen split unless it lies outside
  // the feasible range, in which case the split must sit on that edge.
  {
    const int m = s.ul_slots.back();
    const int r = m + s.final_dl;
    const int lo = nu;
    const int hi = r - nd;
    auto diff = [&](int k) { return eu[k] - ed[r - k]; };
    bool ok = true;
    if (m - 1 >= lo && diff(m - 1) < 0.0) ok = false;
    if (m + 1 <= hi && diff(m + 1) > 0.0) ok = false;
    if (!ok) {
      std::ostringstream msg;
      msg << "terminal equal-error: split " << m << "/" << s.final_dl
          << " is more than one symbol from eU = eD";
      rep.violations.push_back(msg.str());
    }
  }

  if (symmetric) {
    for (int i = 0; i < attempts; ++i) {
      const int left = attempts - i;  // stages from this one to the last
      const double cap = std::ldexp(static_cast<double>(nu), left);
      if (s.ul_slots[i] < nu || s.ul_slots[i] >= cap)
        rep.violations.push_back("stage bound: UL slot " + std::to_string(i + 1) + " = " +
                                 std::to_string(s.ul_slots[i]) + " outside [n_min, 2^k n_min)");
      if (dl[i] < static_cast<long>(left) * nu || dl[i] >= cap)
        rep.violations.push_back("stage bound: DL slot " + std::to_string(i + 1) + " = " +
                                 std::to_string(dl[i]) + " outside [k n_min, 2^k n_min)");
    }
  }

  if (symmetric) {
    const double ratio = static_cast<double>(total) / nu;
    const double lower = std::log2(ratio) - 1.0;
    const double upper = ratio - 1.0;
    if (!(attempts > lower) || !(attempts <= upper + 1e-12)) {
      std::ostringstream msg;
      msg << "attempt count: I = " << attempts << " outside (" << lower << ", " << upper << "]";
      rep.violations.push_back(msg.str());
    }
  }
  return rep;
}

std::vector<std::string> validity_warnings(const Schedule& s, int ceiling) {
  std::vector<std::string> out;
  const auto dl = s.dl_slots();
  for (int i = 0; i < s.attempts(); ++i) {
    if (s.ul_slots[i] > ceiling)
      out.push_back("UL slot " + std::to_string(i + 1) + " has " + std::to_string(s.ul_slots[i]) +
                    " symbols, above the finite-blocklength validity ceiling of " +
                    std::to_string(ceiling));
    if (dl[i] > ceiling)
      out.push_back("DL slot " + std::to_string(i + 1) + " has " + std::to_string(dl[i]) +
                    " symbols, above the finite-blocklength validity ceiling of " +
                    std::to_string(ceiling));
  }
  return out;
}

namespace {

constexpr std::string_view kPolicyMagic = "CLRQPOL1";
constexpr std::uint32_t kPolicyVersion = 1;

}  // namespace

void write_policy(std::ostream& out, const DpPolicy& p) {
  using namespace binio;
  put_magic(out, kPolicyMagic);
  put_u32(out, kPolicyVersion);
  const bool has_ch = p.ul_channel && p.dl_channel;
  put_u32(out, has_ch ? 1u : 0u);
  const ChannelSpec none{};
  const ChannelSpec& ul = has_ch ? *p.ul_channel : none;
  const ChannelSpec& dl = has_ch ? *p.dl_channel : none;
  for (const ChannelSpec* ch : {&ul, &dl}) {
    put_f64(out, ch->snr_linear);
    put_f64(out, ch->capacity);
    put_f64(out, ch->dispersion);
  }
  put_i32(out, p.params.packet_bits);
  put_f64(out, p.params.eps_max);
  put_i32(out, p.n_min_ul());
  put_i32(out, p.n_min_dl());
  put_i32(out, p.n_max());
  for (int v : p.phi) put_i32(out, v);
  for (double v : p.xi) put_f64(out, v);
  for (double v : p.loop_error) put_f64(out, v);
  for (double v : p.link.ul_error) put_f64(out, v);
  for (double v : p.link.dl_error) put_f64(out, v);
  if (!out) throw std::runtime_error("write_policy: stream error");
}

DpPolicy read_policy(std::istream& in) {
  using namespace binio;
  expect_magic(in, kPolicyMagic);
  if (get_u32(in) != kPolicyVersion) throw std::runtime_error("read_policy: unsupported version");
  const bool has_ch = get_u32(in) != 0;
  ChannelSpec ch[2];
  for (auto& c : ch) {
    c.snr_linear = get_f64(in);
    c.capacity = get_f64(in);
    c.dispersion = get_f64(in);
  }
  DpPolicy p;
  if (has_ch) {
    p.ul_channel = ch[0];
    p.dl_channel = ch[1];
  }
  p.params.packet_bits = get_i32(in);
  p.params.eps_max = get_f64(in);
  p.link.n_min_ul = get_i32(in);
  p.link.n_min_dl = get_i32(in);
  const int n_max = get_i32(in);
  if (n_max < 1 || n_max > (1 << 26)) throw std::runtime_error("read_policy: bad n_max");
  const auto len = static_cast<std::size_t>(n_max) + 1;
  p.phi.resize(len);
  p.xi.resize(len);
  p.loop_error.resize(len);
  p.link.ul_error.resize(len);
  p.link.dl_error.resize(len);
  for (auto& v : p.phi) v = get_i32(in);
  for (auto& v : p.xi) v = get_f64(in);
  for (auto& v : p.loop_error) v = get_f64(in);
  for (auto& v : p.link.ul_error) v = get_f64(in);
  for (auto& v : p.link.dl_error) v = get_f64(in);
  return p;
}

void write_policy_text(std::ostream& out, const DpPolicy& p) {
  out << "# n_max " << p.n_max() << " n_min_ul " << p.n_min_ul() << " n_min_dl " << p.n_min_dl()
      << " packet_bits " << p.params.packet_bits << " eps_max " << p.params.eps_max << '\n';
  if (p.ul_channel && p.dl_channel)
    out << "# snr_ul " << std::setprecision(17) << p.ul_channel->snr_linear << " snr_dl "
        << p.dl_channel->snr_linear << '\n';
  out << "n phi xi loop_error\n";
  out << std::setprecision(17);
  for (int n = 0; n <= p.n_max(); ++n)
    out << n << ' ' << p.phi[n] << ' ' << p.xi[n] << ' ' << p.loop_error[n] << '\n';
}

}  // namespace clarq
