#include "clarq/apc.hpp"

#include "clarq/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace clarq {

std::string to_string(BudgetMode m) {
  switch (m) {
    case BudgetMode::worst_case: return "worst_case";
    case BudgetMode::expected: return "expected";
    case BudgetMode::none: return "none";
  }
  return "unknown";
}

std::optional<BudgetMode> parse_budget_mode(const std::string& name) {
  for (BudgetMode m : {BudgetMode::worst_case, BudgetMode::expected, BudgetMode::none})
    if (to_string(m) == name) return m;
  return std::nullopt;
}

void ApcConfig::validate() const {
  if (power_levels.empty()) throw std::invalid_argument("APC needs at least one power level");
  if (power_levels.size() > 3)
    throw std::invalid_argument("APC search is limited to 3 power levels");
  for (std::size_t i = 0; i < power_levels.size(); ++i) {
    if (!(power_levels[i] > 0.0)) throw std::invalid_argument("power levels must be positive");
    if (i > 0 && !(power_levels[i] > power_levels[i - 1]))
      throw std::invalid_argument("power levels must be strictly ascending");
  }
  if (budget_mode != BudgetMode::none && !(energy_budget > 0.0))
    throw std::invalid_argument("energy budget must be positive");
  if (max_stages < 1 || max_stages > 4)
    throw std::invalid_argument("APC search is limited to 1..4 attempts");
  if (fixed_stages && (*fixed_stages < 1 || *fixed_stages > max_stages))
    throw std::invalid_argument("fixed stage count outside 1..max_stages");
  if (n_max < 2) throw std::invalid_argument("APC n_max must be >= 2");
  if (!(symbol_energy > 0.0)) throw std::invalid_argument("symbol energy must be positive");
}

namespace {

struct Level {
  double power = 1.0;
  int n_min = 0;
  std::vector<double> eps;
  // Terminal stage with r symbols left: best error and UL slot over
  // u in [n_min, n_min + k], stored at off[r] + k.
  std::vector<std::size_t> off;
  std::vector<double> best_err;
  std::vector<int> best_u;
};

struct Candidate {
  double error = std::numeric_limits<double>::infinity();
  std::vector<int> ul;
  std::vector<int> levels;
};

class Search {
 public:
  Search(const ChannelSpec& ul, const ChannelSpec& dl, const FblParams& params,
         const ApcConfig& cfg)
      : cfg_(cfg), d_(params.packet_bits) {
    nd_ = min_blocklength(dl, params);
    eps_dl_ = error_table(dl, d_, cfg.n_max);
    for (double p : cfg.power_levels) {
      Level lv;
      lv.power = p;
      const ChannelSpec ch = ul.scaled(p);
      lv.n_min = min_blocklength(ch, params);
      lv.eps = error_table(ch, d_, cfg.n_max);
      build_terminal(lv);
      levels_.push_back(std::move(lv));
    }
    budget_units_ = cfg.energy_budget / cfg.symbol_energy * (1.0 + 1e-12);
  }

  Candidate run(int stages, const std::vector<int>& assignment) const {
    Candidate best;
    std::vector<int> ul(static_cast<std::size_t>(stages));
    // Minimum symbols and worst-case energy still needed after stage s.
    std::vector<long> tail_symbols(static_cast<std::size_t>(stages) + 1, nd_);
    std::vector<double> tail_energy(static_cast<std::size_t>(stages) + 1, 0.0);
    for (int s = stages - 1; s >= 0; --s) {
      const Level& lv = levels_[assignment[s]];
      tail_symbols[s] = tail_symbols[s + 1] + lv.n_min;
      tail_energy[s] = tail_energy[s + 1] + lv.n_min * lv.power;
    }
    if (tail_symbols[0] > cfg_.n_max) return best;
    recurse(0, stages, assignment, cfg_.n_max, 0.0, 1.0, 0.0, 0.0, tail_symbols, tail_energy, ul,
            best);
    if (!best.ul.empty()) best.levels = assignment;
    return best;
  }

  int n_min_dl() const { return nd_; }

 private:
  void build_terminal(Level& lv) const {
    const int n_max = cfg_.n_max;
    lv.off.assign(static_cast<std::size_t>(n_max) + 2, 0);
    std::size_t total = 0;
    for (int r = 0; r <= n_max; ++r) {
      lv.off[r] = total;
      const int width = r - nd_ - lv.n_min + 1;
      if (width > 0) total += static_cast<std::size_t>(width);
    }
    lv.off[n_max + 1] = total;
    lv.best_err.resize(total);
    lv.best_u.resize(total);
    for (int r = lv.n_min + nd_; r <= n_max; ++r) {
      double best = 2.0;
      int arg = lv.n_min;
      for (int u = lv.n_min; u <= r - nd_; ++u) {
        const double a = lv.eps[u];
        const double b = eps_dl_[r - u];
        const double t = a + b - a * b;
        if (t < best) {
          best = t;
          arg = u;
        }
        const std::size_t k = lv.off[r] + static_cast<std::size_t>(u - lv.n_min);
        lv.best_err[k] = best;
        lv.best_u[k] = arg;
      }
    }
  }

  void recurse(int s, int stages, const std::vector<int>& assignment, int r, double prefix,
               double reach, double worst, double expected, const std::vector<long>& tail_symbols,
               const std::vector<double>& tail_energy, std::vector<int>& ul,
               Candidate& best) const {
    const Level& lv = levels_[assignment[s]];
    if (s + 1 == stages) {
      int u_cap = r - nd_;
      if (cfg_.budget_mode == BudgetMode::worst_case) {
        const double room = (budget_units_ - worst) / lv.power;
        u_cap = std::min<double>(u_cap, std::floor(room));
      } else if (cfg_.budget_mode == BudgetMode::expected) {
        const double room = (budget_units_ - expected) / (lv.power * reach);
        if (room < u_cap) u_cap = static_cast<int>(std::floor(room));
      }
      if (u_cap < lv.n_min) return;
      const std::size_t k = lv.off[r] + static_cast<std::size_t>(u_cap - lv.n_min);
      const double total = prefix + reach * lv.best_err[k];
      if (total < best.error) {
        best.error = total;
        ul[s] = lv.best_u[k];
        best.ul = ul;
      }
      return;
    }
    const long u_hi = r - tail_symbols[s + 1];
    for (int u = lv.n_min; u <= u_hi; ++u) {
      const double w = worst + u * lv.power;
      const double x = expected + reach * u * lv.power;
      if (cfg_.budget_mode == BudgetMode::worst_case && w + tail_energy[s + 1] > budget_units_)
        break;
      if (cfg_.budget_mode == BudgetMode::expected && x > budget_units_) break;
      const double a = lv.eps[u];
      const double b = eps_dl_[r - u];
      ul[s] = u;
      recurse(s + 1, stages, assignment, r - u, prefix + reach * (1.0 - a) * b, reach * a, w, x,
              tail_symbols, tail_energy, ul, best);
    }
  }

  const ApcConfig& cfg_;
  int d_;
  int nd_ = 0;
  std::vector<double> eps_dl_;
  std::vector<Level> levels_;
  double budget_units_ = 0.0;
};

}  // namespace

std::optional<ApcResult> solve_apc(const ChannelSpec& ul_base, const ChannelSpec& dl,
                                   const FblParams& params, const ApcConfig& cfg) {
  cfg.validate();
  params.validate();
  const Search search(ul_base, dl, params, cfg);

  struct Task {
    int stages;
    std::vector<int> assignment;
  };
  std::vector<Task> tasks;
  const int levels = static_cast<int>(cfg.power_levels.size());
  const int lo = cfg.fixed_stages.value_or(1);
  const int hi = cfg.fixed_stages.value_or(cfg.max_stages);
  for (int stages = lo; stages <= hi; ++stages) {
    std::vector<int> a(static_cast<std::size_t>(stages), 0);
    for (;;) {
      tasks.push_back({stages, a});
      int pos = stages - 1;
      while (pos >= 0 && a[pos] == levels - 1) a[pos--] = 0;
      if (pos < 0) break;
      ++a[pos];
    }
  }

  std::vector<Candidate> found(tasks.size());
  parallel_for(tasks.size(), cfg.workers,
               [&](std::size_t i) { found[i] = search.run(tasks[i].stages, tasks[i].assignment); });

  const Candidate* best = nullptr;
  for (const auto& c : found)
    if (!c.ul.empty() && (!best || c.error < best->error)) best = &c;
  if (!best) return std::nullopt;

  ApcResult res;
  int remaining = cfg.n_max;
  for (std::size_t i = 0; i < best->ul.size(); ++i) {
    remaining -= best->ul[i];
    res.stages.push_back({best->ul[i], remaining, cfg.power_levels[best->levels[i]]});
  }
  res.stats = apc_stats(res.stages, ul_base, dl, params, cfg.symbol_energy);
  return res;
}

ScheduleStats apc_stats(const std::vector<ApcStage>& stages, const ChannelSpec& ul_base,
                        const ChannelSpec& dl, const FblParams& params, double symbol_energy) {
  ScheduleStats st;
  if (stages.empty()) return st;
  const int d = params.packet_bits;
  double e = 1.0;
  for (std::size_t k = stages.size(); k-- > 0;) {
    const double a = packet_error_rate(ul_base.scaled(stages[k].power), stages[k].n_ul, d);
    const double b = packet_error_rate(dl, stages[k].n_dl, d);
    e = a * e + b - a * b;
  }
  st.loop_error = e;
  st.loop_reliability = 1.0 - e;
  double reach = 1.0;
  for (const auto& s : stages) {
    const double energy = symbol_energy * s.n_ul * s.power;
    st.expected_ul_energy += reach * energy;
    st.max_ul_energy += energy;
    reach *= packet_error_rate(ul_base.scaled(s.power), s.n_ul, d);
  }
  st.min_ul_energy = symbol_energy * stages.front().n_ul * stages.front().power;
  return st;
}

double plain_clarq_worst_energy(const ChannelSpec& ul, const ChannelSpec& dl,
                                const FblParams& params, int n_max, double symbol_energy) {
  const Schedule s = extract_schedule(solve_policy(ul, dl, params, n_max), n_max);
  return energy_stats(s, ul, dl, params, symbol_energy).max_ul_energy;
}

std::string format_stages(const std::vector<ApcStage>& stages) {
  std::ostringstream out;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i) out << ' ';
    out << '(' << stages[i].n_ul << ',' << stages[i].n_dl << ',' << stages[i].power << ')';
  }
  return out.str();
}

}  // namespace clarq
