#include "experiment.hpp"

#include "clarq/baseline.hpp"
#include "clarq/dp.hpp"
#include "clarq/parallel.hpp"
#include "clarq/protocol_sim.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <memory>
#include <ostream>

#ifndef CLARQ_VERSION
#define CLARQ_VERSION "unknown"
#endif

namespace clarq::cli {

namespace fs = std::filesystem;

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s) { return '"' + s + '"'; }

std::string sched(const Schedule& s) { return quoted(to_string(s)); }

class Outputs {
 public:
  explicit Outputs(const ExperimentConfig& cfg) : cfg_(cfg) {}

  std::ofstream open(const std::string& name, bool binary = false) {
    fs::create_directories(cfg_.out);
    const auto path = cfg_.out / name;
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    names_.push_back(name);
    return f;
  }

  const fs::path& dir() const { return cfg_.out; }

  // The sidecar carries no timestamp so reruns are byte-identical.
  void finish(const std::string& status) {
    nlohmann::ordered_json j;
    j["experiment"] = cfg_.experiment;
    j["code_version"] = CLARQ_VERSION;
    j["seed"] = cfg_.seed;
    j["status"] = status;
    j["config"] = nlohmann::ordered_json::parse(config_json(cfg_));
    j["outputs"] = names_;
    auto f = open(cfg_.experiment + ".meta.json");
    f << j.dump(2) << '\n';
  }

 private:
  const ExperimentConfig& cfg_;
  std::vector<std::string> names_;
};

int finish(Outputs& out, bool any_feasible, std::ostream& log) {
  out.finish(any_feasible ? "ok" : "infeasible");
  log << "wrote " << out.dir().string() << '\n';
  if (!any_feasible) {
    log << "infeasible: no configuration could host a single attempt\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

std::string infeasible_note(const DpPolicy& pol, int n_max) {
  return "n_max " + std::to_string(n_max) + " is below n_min_ul + n_min_dl = " +
         std::to_string(static_cast<long long>(pol.n_min_ul()) + pol.n_min_dl());
}

int run_policy(const ExperimentConfig& cfg, std::ostream& log) {
  const int n_max = cfg.n_max();
  const auto pol = solve_policy(cfg.ul, cfg.dl, cfg.params, n_max);
  const auto s = extract_schedule(pol, n_max);
  Outputs out(cfg);

  {
    auto f = out.open("policy.csv");
    f << "n,phi,xi,loop_error\n";
    for (int n = 0; n <= n_max; ++n)
      f << n << ',' << pol.phi[n] << ',' << num(pol.xi[n]) << ',' << num(pol.loop_error[n]) << '\n';
  }
  {
    auto f = out.open("policy.bin", true);
    write_policy(f, pol);
  }
  auto f = out.open("schedule.csv");
  f << "stage,status,n_ul,n_dl,eps_ul,eps_dl\n";
  log << "n_min ul " << pol.n_min_ul() << ", dl " << pol.n_min_dl() << '\n';
  if (s.empty()) {
    f << "0,infeasible,,,,\n";
    log << "infeasible: " << infeasible_note(pol, n_max) << '\n';
    f.close();
    return finish(out, false, log);
  }
  const auto dl = s.dl_slots();
  for (int i = 0; i < s.attempts(); ++i)
    f << i + 1 << ",ok," << s.ul_slots[i] << ',' << dl[i] << ','
      << num(pol.link.ul_error[s.ul_slots[i]]) << ',' << num(pol.link.dl_error[dl[i]]) << '\n';
  f.close();
  const auto stats = energy_stats(s, pol.link, cfg.symbol_energy);
  log << "schedule " << to_string(s) << '\n'
      << "attempts " << s.attempts() << '\n'
      << "loop_error " << num(pol.loop_error[n_max]) << '\n'
      << "expected_energy " << num(stats.expected_ul_energy) << '\n'
      << "max_energy " << num(stats.max_ul_energy) << '\n';
  for (const auto& w : validity_warnings(s)) log << "warning: " << w << '\n';
  return finish(out, true, log);
}

int run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const auto pol = solve_policy(cfg.ul, cfg.dl, cfg.params, cfg.sweep.to);
  Outputs out(cfg);
  auto f = out.open("sweep_nmax.csv");
  f << "n_max,status,first_ul_slot,attempts,loop_error,expected_energy,min_energy,max_energy,"
       "schedule\n";
  bool any = false;
  for (int n = cfg.sweep.from; n <= cfg.sweep.to; n += cfg.sweep.step) {
    const auto s = extract_schedule(pol, n);
    if (s.empty()) {
      f << n << ",infeasible,,,,,,,\n";
      continue;
    }
    any = true;
    const auto st = energy_stats(s, pol.link, cfg.symbol_energy);
    f << n << ",ok," << s.ul_slots.front() << ',' << s.attempts() << ','
      << num(pol.loop_error[n]) << ',' << num(st.expected_ul_energy) << ','
      << num(st.min_ul_energy) << ',' << num(st.max_ul_energy) << ',' << sched(s) << '\n';
  }
  f.close();
  log << "swept n_max " << cfg.sweep.from << ".." << cfg.sweep.to << " step " << cfg.sweep.step
      << '\n';
  return finish(out, any, log);
}

int run_benchmark(const ExperimentConfig& cfg, std::ostream& log) {
  const auto pol = solve_policy(cfg.ul, cfg.dl, cfg.params, cfg.sweep.to);
  std::vector<int> ns;
  for (int n = cfg.sweep.from; n <= cfg.sweep.to; n += cfg.sweep.step) ns.push_back(n);
  struct Row {
    Schedule opt, naive, one;
  };
  std::vector<Row> rows(ns.size());
  parallel_for(ns.size(), cfg.workers, [&](std::size_t i) {
    rows[i].opt = extract_schedule(pol, ns[i]);
    rows[i].naive = naive_schedule(cfg.ul, cfg.dl, cfg.params, ns[i]);
    rows[i].one = one_shot_schedule(cfg.ul, cfg.dl, cfg.params, ns[i]);
  });

  Outputs out(cfg);
  auto f = out.open("benchmark.csv");
  f << "n_max,status,optimal_error,naive_error,one_shot_error,optimal_schedule,naive_schedule,"
       "one_shot_schedule\n";
  bool any = false;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const auto& r = rows[i];
    if (r.opt.empty()) {
      f << ns[i] << ",infeasible,,,,,,\n";
      continue;
    }
    any = true;
    f << ns[i] << ",ok," << num(pol.loop_error[ns[i]]) << ','
      << num(schedule_loop_error(r.naive, pol.link)) << ','
      << num(schedule_loop_error(r.one, pol.link)) << ',' << sched(r.opt) << ','
      << sched(r.naive) << ',' << sched(r.one) << '\n';
  }
  f.close();
  return finish(out, any, log);
}

int run_grid(const ExperimentConfig& cfg, std::ostream& log) {
  const int n_max = cfg.n_max();
  struct Point {
    double snr_db = 0;
    int bits = 0;
    int n_min = 0;
    Schedule opt, naive, one;
    double opt_err = 1, naive_err = 1, one_err = 1;
  };
  std::vector<Point> pts;
  for (double g : cfg.grid_snr_db)
    for (int d : cfg.grid_packet_bits) {
      Point p;
      p.snr_db = g;
      p.bits = d;
      pts.push_back(p);
    }
  parallel_for(pts.size(), cfg.workers, [&](std::size_t i) {
    auto& p = pts[i];
    FblParams params = cfg.params;
    params.packet_bits = p.bits;
    const auto ch = ChannelSpec::from_db(p.snr_db);
    p.n_min = min_blocklength(ch, params);
    if (2LL * p.n_min > n_max) return;
    const auto pol = solve_policy(ch, ch, params, n_max, DpOptions{true});
    p.opt = extract_schedule(pol, n_max);
    p.opt_err = pol.loop_error[n_max];
    p.naive = naive_schedule(ch, ch, params, n_max);
    p.naive_err = schedule_loop_error(p.naive, pol.link);
    p.one = one_shot_schedule(ch, ch, params, n_max);
    p.one_err = schedule_loop_error(p.one, pol.link);
  });

  Outputs out(cfg);
  auto f = out.open("sensitivity_grid.csv");
  f << "snr_db,packet_bits,status,n_min,attempts,first_ul_slot,optimal_error,naive_error,"
       "one_shot_error,optimal_schedule\n";
  bool any = false;
  for (const auto& p : pts) {
    f << num(p.snr_db) << ',' << p.bits << ',';
    if (p.opt.empty()) {
      f << "infeasible," << p.n_min << ",,,,,,\n";
      continue;
    }
    any = true;
    f << "ok," << p.n_min << ',' << p.opt.attempts() << ',' << p.opt.ul_slots.front() << ','
      << num(p.opt_err) << ',' << num(p.naive_err) << ',' << num(p.one_err) << ','
      << sched(p.opt) << '\n';
  }
  f.close();
  log << pts.size() << " grid points at n_max " << n_max << '\n';
  return finish(out, any, log);
}

Lut campaign_lut(const ExperimentConfig& cfg) {
  if (!cfg.lut_file.empty()) {
    std::ifstream in(cfg.lut_file, std::ios::binary);
    return read_lut(in);
  }
  return build_lut(cfg.lut, cfg.workers);
}

int run_fading(const ExperimentConfig& cfg, std::ostream& log) {
  CampaignConfig cc;
  cc.model = cfg.fading;
  cc.strategies = cfg.strategies;
  cc.params = cfg.params;
  cc.n_max = cfg.n_max();
  cc.runs = cfg.runs;
  cc.seed = cfg.seed;
  cc.workers = cfg.workers;
  std::optional<Lut> lut;
  if (std::count(cc.strategies.begin(), cc.strategies.end(), Strategy::lut)) {
    lut = campaign_lut(cfg);
    if (lut->spec.n_max != cc.n_max || lut->spec.params.packet_bits != cc.params.packet_bits)
      throw ConfigError(cfg.lut_file + ": table was built for another frame or packet size");
    cc.lut = &*lut;
  }
  const auto res = run_campaign(cc);

  Outputs out(cfg);
  {
    auto f = out.open("fading_campaign.csv");
    write_campaign_csv(f, cc, res);
  }
  auto f = out.open("fading_summary.csv");
  f << "strategy,runs,mean_loop_error,ci_low,ci_high,infeasible_runs\n";
  bool any = false;
  for (std::size_t k = 0; k < res.aggregates.size(); ++k) {
    const auto& a = res.aggregates[k];
    const auto bad = std::count(a.per_run_errors.begin(), a.per_run_errors.end(), 1.0);
    any = any || bad < a.runs;
    f << to_string(a.strategy) << ',' << a.runs << ',' << num(a.mean_loop_error) << ',';
    if (cfg.bootstrap > 0) {
      const auto [lo, hi] = bootstrap_mean_ci(a.per_run_errors, cfg.bootstrap, cfg.seed + k + 1);
      f << num(lo) << ',' << num(hi);
    } else {
      f << ',';
    }
    f << ',' << bad << '\n';
    log << to_string(a.strategy) << " mean loop error " << num(a.mean_loop_error) << " ("
        << bad << " infeasible draws)\n";
  }
  f.close();
  return finish(out, any, log);
}

int run_resolution(const ExperimentConfig& cfg, std::ostream& log) {
  const auto rows = resolution_experiment(cfg.lut_steps, cfg.fading, cfg.params, cfg.n_max(),
                                          cfg.runs, cfg.seed, cfg.workers);
  Outputs out(cfg);
  auto f = out.open("lut_resolution.csv");
  f << "step_db,mean_loop_error,ci_low,ci_high\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    f << (r.step_db == 0.0 ? std::string("exact") : num(r.step_db)) << ','
      << num(r.mean_loop_error) << ',';
    if (cfg.bootstrap > 0) {
      const auto [lo, hi] = bootstrap_mean_ci(r.per_run_errors, cfg.bootstrap, cfg.seed + k + 1);
      f << num(lo) << ',' << num(hi) << '\n';
    } else {
      f << ",\n";
    }
    log << "step " << (r.step_db == 0.0 ? std::string("exact") : num(r.step_db) + " dB")
        << ": " << num(r.mean_loop_error) << '\n';
  }
  f.close();
  return finish(out, true, log);
}

int run_apc(const ExperimentConfig& cfg, std::ostream& log) {
  const int n_max = cfg.n_max();
  const auto pol = solve_policy(cfg.ul, cfg.dl, cfg.params, n_max);
  const auto plain = extract_schedule(pol, n_max);
  ApcConfig ac = cfg.apc;
  ac.energy_budget = cfg.apc_budget
                         ? *cfg.apc_budget
                         : plain_clarq_worst_energy(cfg.ul, cfg.dl, cfg.params, n_max,
                                                    cfg.symbol_energy);
  const auto apc = solve_apc(cfg.ul, cfg.dl, cfg.params, ac);

  Outputs out(cfg);
  auto f = out.open("apc_case.csv");
  f << "n_max,mode,status,stages,attempts,loop_error,expected_energy,max_energy,budget\n";
  const auto row = [&](const char* mode, const std::vector<ApcStage>& st, const ScheduleStats& s) {
    f << n_max << ',' << mode << ",ok," << quoted(format_stages(st)) << ',' << st.size() << ','
      << num(s.loop_error) << ',' << num(s.expected_ul_energy) << ',' << num(s.max_ul_energy)
      << ',' << num(ac.energy_budget) << '\n';
    log << mode << ": " << format_stages(st) << "  loop_error " << num(s.loop_error)
        << "  expected_energy " << num(s.expected_ul_energy) << "  max_energy "
        << num(s.max_ul_energy) << '\n';
  };
  if (plain.empty()) {
    f << n_max << ",without_apc,infeasible,,,,,," << num(ac.energy_budget) << '\n';
  } else {
    std::vector<ApcStage> st;
    const auto dl = plain.dl_slots();
    for (int i = 0; i < plain.attempts(); ++i) st.push_back({plain.ul_slots[i], dl[i], 1.0});
    row("without_apc", st, energy_stats(plain, pol.link, cfg.symbol_energy));
  }
  if (!apc) {
    f << n_max << ",with_apc,infeasible,,,,,," << num(ac.energy_budget) << '\n';
    log << "with_apc: nothing fits the energy budget " << num(ac.energy_budget) << '\n';
  } else {
    row("with_apc", apc->stages, apc->stats);
  }
  f.close();
  return finish(out, !plain.empty() || apc.has_value(), log);
}

int run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const int n_max = cfg.n_max();
  SimConfig sc;
  sc.frames = cfg.sim.frames;
  sc.seed = cfg.seed;
  sc.budget = cfg.frame;
  sc.workers = cfg.workers;
  sc.keep_outcomes = cfg.sim.keep_outcomes;
  const auto link = LinkModel::from_channels(cfg.ul, cfg.dl, cfg.params, n_max);
  // With charged feedback the adaptive sources no longer follow one fixed
  // schedule, so there is no closed form to compare against.
  std::optional<Schedule> reference;
  if (cfg.sim.source == "fixed") {
    sc.source = ScheduleSource::fixed;
    sc.schedule.ul_slots.assign(cfg.sim.schedule.begin(), cfg.sim.schedule.end() - 1);
    sc.schedule.final_dl = cfg.sim.schedule.back();
    reference = sc.schedule;
  } else if (cfg.sim.source == "policy") {
    sc.source = ScheduleSource::policy;
    auto pol = std::make_shared<DpPolicy>(solve_policy(link));
    reference = extract_schedule(*pol, n_max);
    sc.policy = std::move(pol);
  } else {
    sc.source = ScheduleSource::naive;
    reference = naive_schedule(cfg.ul, cfg.dl, cfg.params, n_max);
  }
  if (cfg.frame.feedback_symbols() > 0 && sc.source != ScheduleSource::fixed) reference.reset();

  SimResult res;
  try {
    res = run_frames(sc, link);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("simulate: ") + e.what());
  }
  const auto& s = res.summary;

  Outputs out(cfg);
  {
    auto f = out.open("simulate_summary.json");
    f << summary_json(s) << '\n';
  }
  auto f = out.open("simulate.csv");
  f << "frames,loop_successes,loop_error,analytic_loop_error,binomial_z,mean_ul_symbols,"
       "p50_ul_symbols,p90_ul_symbols,p99_ul_symbols,max_elapsed_s\n";
  f << s.frames << ',' << s.loop_successes << ',' << num(s.loop_error) << ',';
  if (reference) {
    const double p = schedule_loop_error(*reference, link);
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(s.frames));
    f << num(p) << ',' << (sd > 0 ? num((s.loop_error - p) / sd) : std::string()) << ',';
    log << "analytic loop error " << num(p) << '\n';
  } else {
    f << ",,";
  }
  f << num(s.mean_ul_symbols) << ',' << num(s.p50_ul_symbols) << ',' << num(s.p90_ul_symbols)
    << ',' << num(s.p99_ul_symbols) << ',' << num(s.max_elapsed_time) << '\n';
  f.close();
  if (cfg.sim.keep_outcomes) {
    auto o = out.open("simulate_outcomes.csv");
    write_outcomes_csv(o, res.outcomes);
  }
  log << s.frames << " frames, loop error " << num(s.loop_error) << ", mean UL symbols "
      << num(s.mean_ul_symbols) << '\n';
  const bool any = s.attempt_histogram.empty() || s.attempt_histogram[0] < s.frames;
  return finish(out, any, log);
}

int run_lut_build(const ExperimentConfig& cfg, std::ostream& log) {
  const auto lut = build_lut(cfg.lut, cfg.workers);
  Outputs out(cfg);
  {
    auto f = out.open("lut.bin", true);
    write_lut(f, lut);
  }
  {
    auto f = out.open("lut.txt");
    write_lut_text(f, lut);
  }
  const auto feasible =
      std::count_if(lut.entries.begin(), lut.entries.end(), [](const auto& e) { return !e.empty(); });
  log << lut.entries.size() << " entries, " << feasible << " feasible\n";
  return finish(out, feasible > 0, log);
}

int run_lut_lookup(const ExperimentConfig& cfg, std::ostream& log) {
  std::ifstream in(cfg.lut_file, std::ios::binary);
  Lut lut;
  try {
    lut = read_lut(in);
  } catch (const std::exception& e) {
    throw ConfigError(cfg.lut_file + ": " + e.what());
  }
  const auto& sp = lut.spec;
  const auto& s = lookup(lut, cfg.lookup_ul_db, cfg.lookup_dl_db);
  Outputs out(cfg);
  auto f = out.open("lut_lookup.csv");
  f << "ul_snr_db,dl_snr_db,grid_ul_db,grid_dl_db,status,schedule,loop_error\n";
  f << num(cfg.lookup_ul_db) << ',' << num(cfg.lookup_dl_db) << ','
    << num(sp.grid_db(sp.index_of(cfg.lookup_ul_db))) << ','
    << num(sp.grid_db(sp.index_of(cfg.lookup_dl_db))) << ',';
  if (s.empty()) {
    f << "infeasible,,\n";
  } else {
    // Evaluated at the measured SNRs, not at the grid point.
    const double e = schedule_loop_error(s, ChannelSpec::from_db(cfg.lookup_ul_db),
                                         ChannelSpec::from_db(cfg.lookup_dl_db),
                                         sp.params.packet_bits);
    f << "ok," << sched(s) << ',' << num(e) << '\n';
    log << "schedule " << to_string(s) << "\nloop_error " << num(e) << '\n';
  }
  f.close();
  return finish(out, !s.empty(), log);
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  const auto& e = cfg.experiment;
  if (e == "policy") return run_policy(cfg, log);
  if (e == "sweep_nmax") return run_sweep(cfg, log);
  if (e == "benchmark") return run_benchmark(cfg, log);
  if (e == "sensitivity_grid") return run_grid(cfg, log);
  if (e == "fading_campaign") return run_fading(cfg, log);
  if (e == "lut_resolution") return run_resolution(cfg, log);
  if (e == "apc_case") return run_apc(cfg, log);
  if (e == "simulate") return run_simulate(cfg, log);
  if (e == "lut_build") return run_lut_build(cfg, log);
  if (e == "lut_lookup") return run_lut_lookup(cfg, log);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace clarq::cli
