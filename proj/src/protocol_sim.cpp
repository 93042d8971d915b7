#include "clarq/protocol_sim.hpp"

#include "clarq/parallel.hpp"
#include "clarq/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace clarq {

namespace {

constexpr long long kChunk = 1 << 15;

struct Partial {
  long long loop_successes = 0;
  long long ul_successes = 0;
  long long sum_symbols = 0;
  long long sum_sq_symbols = 0;
  int max_elapsed_symbols = 0;
  std::vector<long long> attempts;
  std::map<int, long long> symbols;
};

// Next-UL-slot rule shared by the policy and naive sources: index by usable
// blocklength, with phi[k] the UL slot to send when k symbols remain.
std::vector<int> naive_table(const LinkModel& link) {
  const int n_max = link.n_max();
  std::vector<int> phi(static_cast<std::size_t>(n_max) + 1, 0);
  for (int k = 0; k <= n_max; ++k) {
    if (!link.can_attempt(k)) {
      phi[k] = k;
      continue;
    }
    double best = 2.0;
    for (int m = link.n_min_ul; m <= k - link.n_min_dl; ++m) {
      const double a = link.ul_error[m];
      const double b = link.dl_error[k - m];
      const double v = a + b - a * b;
      if (v < best) {
        best = v;
        phi[k] = m;
      }
    }
  }
  return phi;
}

class FrameRunner {
 public:
  FrameRunner(const SimConfig& cfg, const LinkModel& link)
      : cfg_(cfg), link_(link), n_max_(cfg.budget.n_max()), fb_(cfg.budget.feedback_symbols()) {
    cfg.budget.validate();
    if (cfg.frames < 1) throw std::invalid_argument("simulation needs at least one frame");
    if (n_max_ > link.n_max())
      throw std::invalid_argument("link tables shorter than the frame blocklength");
    switch (cfg.source) {
      case ScheduleSource::fixed:
        validate_fixed();
        break;
      case ScheduleSource::policy:
        if (!cfg.policy) throw std::invalid_argument("policy source selected without a policy");
        if (cfg.policy->n_max() < n_max_)
          throw std::invalid_argument("policy built for a shorter frame than the budget");
        phi_ = &cfg.policy->phi;
        break;
      case ScheduleSource::naive:
        naive_ = naive_table(link);
        phi_ = &naive_;
        break;
    }
  }

  FrameOutcome run(long long index) const {
    Xoshiro256 rng(cfg_.seed, static_cast<std::uint64_t>(index));
    FrameOutcome out;
    int remaining = n_max_;
    for (int i = 0;; ++i) {
      int m = 0;
      if (cfg_.source == ScheduleSource::fixed) {
        if (i >= cfg_.schedule.attempts()) break;
        m = cfg_.schedule.ul_slots[i];
      } else {
        const int usable = remaining - fb_;
        if (usable < 0 || !link_.can_attempt(usable)) break;
        m = (*phi_)[usable];
      }
      remaining -= m + fb_;
      ++out.ul_attempts_used;
      out.ul_symbols_spent += m;
      if (rng.uniform() >= link_.ul_error[m]) {
        out.ul_success = true;
        out.dl_success = rng.uniform() >= link_.dl_error[remaining];
        remaining = 0;
        break;
      }
    }
    out.elapsed_time = (n_max_ - remaining) * cfg_.budget.symbol_time;
    return out;
  }

  int n_max() const { return n_max_; }

 private:
  void validate_fixed() const {
    const Schedule& s = cfg_.schedule;
    if (s.empty()) return;
    if (s.total() > n_max_)
      throw std::invalid_argument("fixed schedule " + to_string(s) + " is longer than the frame");
    long used = 0;
    for (int m : s.ul_slots) {
      if (m < link_.n_min_ul)
        throw std::invalid_argument("fixed schedule has a UL slot below the floor");
      used += m + fb_;
    }
    if (n_max_ - used < link_.n_min_dl)
      throw std::invalid_argument("fixed schedule " + to_string(s) +
                                  " does not fit the frame with its feedback cost");
  }

  const SimConfig& cfg_;
  const LinkModel& link_;
  int n_max_;
  int fb_;
  const std::vector<int>* phi_ = nullptr;
  std::vector<int> naive_;
};

double percentile(const std::map<int, long long>& hist, long long total, double q) {
  const auto rank = static_cast<long long>(std::ceil(q * static_cast<double>(total)));
  long long cum = 0;
  for (const auto& [value, count] : hist) {
    cum += count;
    if (cum >= std::max(rank, 1LL)) return value;
  }
  return hist.empty() ? 0.0 : hist.rbegin()->first;
}

}  // namespace

SimResult run_frames(const SimConfig& cfg, const LinkModel& link) {
  const FrameRunner runner(cfg, link);
  SimResult result;
  if (cfg.keep_outcomes) result.outcomes.resize(static_cast<std::size_t>(cfg.frames));

  const long long chunks = (cfg.frames + kChunk - 1) / kChunk;
  std::vector<Partial> parts(static_cast<std::size_t>(chunks));
  parallel_for(static_cast<std::size_t>(chunks), cfg.workers, [&](std::size_t c) {
    Partial& p = parts[c];
    const long long begin = static_cast<long long>(c) * kChunk;
    const long long end = std::min(cfg.frames, begin + kChunk);
    for (long long f = begin; f < end; ++f) {
      const FrameOutcome o = runner.run(f);
      if (o.dl_success) ++p.loop_successes;
      if (o.ul_success) ++p.ul_successes;
      p.sum_symbols += o.ul_symbols_spent;
      p.sum_sq_symbols += static_cast<long long>(o.ul_symbols_spent) * o.ul_symbols_spent;
      const int elapsed_symbols =
          static_cast<int>(std::lround(o.elapsed_time / cfg.budget.symbol_time));
      p.max_elapsed_symbols = std::max(p.max_elapsed_symbols, elapsed_symbols);
      if (p.attempts.size() <= static_cast<std::size_t>(o.ul_attempts_used))
        p.attempts.resize(static_cast<std::size_t>(o.ul_attempts_used) + 1, 0);
      ++p.attempts[o.ul_attempts_used];
      ++p.symbols[o.ul_symbols_spent];
      if (cfg.keep_outcomes) result.outcomes[static_cast<std::size_t>(f)] = o;
    }
  });

  SimSummary& s = result.summary;
  s.frames = cfg.frames;
  long long sum = 0, sum_sq = 0;
  int max_elapsed = 0;
  for (const Partial& p : parts) {
    s.loop_successes += p.loop_successes;
    s.ul_successes += p.ul_successes;
    sum += p.sum_symbols;
    sum_sq += p.sum_sq_symbols;
    max_elapsed = std::max(max_elapsed, p.max_elapsed_symbols);
    if (s.attempt_histogram.size() < p.attempts.size())
      s.attempt_histogram.resize(p.attempts.size(), 0);
    for (std::size_t i = 0; i < p.attempts.size(); ++i) s.attempt_histogram[i] += p.attempts[i];
    for (const auto& [v, c] : p.symbols) s.ul_symbol_histogram[v] += c;
  }
  const auto n = static_cast<double>(cfg.frames);
  s.loop_reliability = static_cast<double>(s.loop_successes) / n;
  s.loop_error = static_cast<double>(cfg.frames - s.loop_successes) / n;
  s.mean_ul_symbols = static_cast<double>(sum) / n;
  if (cfg.frames > 1) {
    const double centred = static_cast<double>(sum_sq) - n * s.mean_ul_symbols * s.mean_ul_symbols;
    s.var_ul_symbols = std::max(0.0, centred / (n - 1.0));
  }
  s.p50_ul_symbols = percentile(s.ul_symbol_histogram, cfg.frames, 0.50);
  s.p90_ul_symbols = percentile(s.ul_symbol_histogram, cfg.frames, 0.90);
  s.p99_ul_symbols = percentile(s.ul_symbol_histogram, cfg.frames, 0.99);
  s.max_elapsed_time = max_elapsed * cfg.budget.symbol_time;
  return result;
}

SimResult run_frames(const SimConfig& cfg, const ChannelSpec& ul, const ChannelSpec& dl,
                     const FblParams& params) {
  const LinkModel link = LinkModel::from_channels(ul, dl, params, cfg.budget.n_max());
  return run_frames(cfg, link);
}

std::vector<double> attempt_distribution(const Schedule& s, const LinkModel& link) {
  std::vector<double> dist(static_cast<std::size_t>(s.attempts()) + 1, 0.0);
  if (s.empty()) {
    dist[0] = 1.0;
    return dist;
  }
  double reach = 1.0;
  for (int i = 0; i < s.attempts(); ++i) {
    const double eu = link.ul_error.at(s.ul_slots[i]);
    if (i + 1 == s.attempts()) {
      dist[i + 1] = reach;
    } else {
      dist[i + 1] = reach * (1.0 - eu);
      reach *= eu;
    }
  }
  return dist;
}

void write_outcomes_csv(std::ostream& out, const std::vector<FrameOutcome>& outcomes) {
  out << "frame_index,ul_attempts,ul_success,dl_success,ul_symbols,elapsed_us\n";
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    out << i << ',' << o.ul_attempts_used << ',' << (o.ul_success ? 1 : 0) << ','
        << (o.dl_success ? 1 : 0) << ',' << o.ul_symbols_spent << ','
        << std::llround(o.elapsed_time * 1e6) << '\n';
  }
}

std::string summary_json(const SimSummary& s) {
  nlohmann::ordered_json j;
  j["frames"] = s.frames;
  j["loop_successes"] = s.loop_successes;
  j["ul_successes"] = s.ul_successes;
  j["loop_reliability"] = s.loop_reliability;
  j["loop_error"] = s.loop_error;
  j["mean_ul_symbols"] = s.mean_ul_symbols;
  j["var_ul_symbols"] = s.var_ul_symbols;
  j["p50_ul_symbols"] = s.p50_ul_symbols;
  j["p90_ul_symbols"] = s.p90_ul_symbols;
  j["p99_ul_symbols"] = s.p99_ul_symbols;
  j["max_elapsed_s"] = s.max_elapsed_time;
  j["attempt_histogram"] = s.attempt_histogram;
  return j.dump(2);
}

}  // namespace clarq
