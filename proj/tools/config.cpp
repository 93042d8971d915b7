#include "experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace clarq::cli {

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "policy",         "sweep_nmax",  "benchmark", "sensitivity_grid", "fading_campaign",
      "lut_resolution", "apc_case",    "simulate",  "lut_build",        "lut_lookup"};
  return names;
}

namespace {

// Keys set from the command line, so errors can point there instead of at a
// file line.
using OverridePaths = std::set<std::string>;

class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& origin,
          const OverridePaths& overrides)
      : node_(std::move(node)), path_(std::move(path)), origin_(origin), overrides_(overrides) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap())
      fail(path_.empty() ? "the config root" : path_, node_, "expected a mapping");
  }

  bool has(const std::string& key) const {
    return node_.IsMap() && node_[key].IsDefined() && !node_[key].IsNull();
  }

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return false;
    const YAML::Node v = node_[key];
    if (!v.IsScalar()) fail(full(key), v, "expected a single value");
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(full(key), v, "cannot read '" + v.Scalar() + "' as " + type_name<T>());
    }
    return true;
  }

  template <typename T>
  bool get_list(const std::string& key, std::vector<T>& out) {
    seen_.insert(key);
    if (!has(key)) return false;
    const YAML::Node v = node_[key];
    if (!v.IsSequence()) fail(full(key), v, "expected a list");
    std::vector<T> tmp;
    for (const auto& item : v) {
      try {
        tmp.push_back(item.as<T>());
      } catch (const YAML::Exception&) {
        fail(full(key), item, "cannot read list item '" + item.Scalar() + "' as " + type_name<T>());
      }
    }
    out = std::move(tmp);
    return true;
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(node_.IsMap() ? node_[key] : YAML::Node(), full(key), origin_, overrides_);
  }

  // Every key present but never asked for is an error.
  void finish() const {
    if (!node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) fail(full(key), kv.first, "unknown key '" + full(key) + "'");
    }
  }

  [[noreturn]] void error(const std::string& key, const std::string& msg) const {
    fail(full(key), node_.IsMap() && node_[key].IsDefined() ? node_[key] : node_, msg);
  }

 private:
  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const YAML::Node& at, const std::string& msg) const {
    std::string where;
    for (const auto& o : overrides_)
      if (key == o || key.rfind(o + ".", 0) == 0) where = "--set " + o;
    if (where.empty()) {
      const auto mark = at.Mark();
      where = origin_;
      if (!mark.is_null()) where += ":" + std::to_string(mark.line + 1);
    }
    throw ConfigError(where + ": " + msg);
  }

  template <typename T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "true/false";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "text";
  }

  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
  const OverridePaths& overrides_;
  std::set<std::string> seen_;
};

struct Preset {
  double ul_linear;
  double dl_linear;
};

// The SNRs are kept linear: the rounded dB labels do not reproduce the
// reference blocklengths (322 / 232 / 533) exactly.
std::optional<Preset> preset(const std::string& name) {
  if (name == "scenario_a") return Preset{0.05, 0.05};
  if (name == "scenario_b") return Preset{0.07, 0.03};
  return std::nullopt;
}

void read_channel(Section& s, const std::string& which, ChannelSpec& ch) {
  double v = 0.0;
  const bool db = s.get(which + "_snr_db", v);
  if (db) ch = ChannelSpec::from_db(v);
  if (s.get(which + "_snr_linear", v)) {
    if (db) s.error(which + "_snr_linear", "give either " + which + "_snr_db or " + which +
                                               "_snr_linear, not both");
    if (!(v > 0.0)) s.error(which + "_snr_linear", "linear SNR must be positive");
    ch = ChannelSpec::from_linear(v);
  }
}

template <typename Fn>
void check(Section& s, const std::string& key, bool ok, Fn&& msg) {
  if (!ok) s.error(key, msg());
}

ExperimentConfig parse(const YAML::Node& root, const std::string& origin,
                       const OverridePaths& overrides) {
  ExperimentConfig c;
  Section top(root, "", origin, overrides);

  top.get("experiment", c.experiment);
  const auto& names = experiment_names();
  if (c.experiment.empty())
    throw ConfigError(origin + ": no experiment given (use a subcommand or the 'experiment' key)");
  check(top, "experiment", std::find(names.begin(), names.end(), c.experiment) != names.end(),
        [&] { return "unknown experiment '" + c.experiment + "'"; });

  c.scenario = "scenario_a";
  top.get("scenario", c.scenario);
  Section channel = top.sub("channel");
  if (auto p = preset(c.scenario)) {
    c.ul = ChannelSpec::from_linear(p->ul_linear);
    c.dl = ChannelSpec::from_linear(p->dl_linear);
  } else if (c.scenario == "custom") {
    check(channel, "ul_snr_db", (channel.has("ul_snr_db") || channel.has("ul_snr_linear")) &&
                                    (channel.has("dl_snr_db") || channel.has("dl_snr_linear")),
          [] { return "scenario 'custom' needs both channel SNRs"; });
  } else {
    top.error("scenario", "unknown scenario '" + c.scenario +
                              "' (expected scenario_a, scenario_b or custom)");
  }
  read_channel(channel, "ul", c.ul);
  read_channel(channel, "dl", c.dl);
  channel.finish();

  long long seed = static_cast<long long>(c.seed);
  if (top.get("seed", seed)) check(top, "seed", seed >= 0, [] { return "seed must be >= 0"; });
  c.seed = static_cast<std::uint64_t>(seed);
  if (top.get("workers", c.workers))
    check(top, "workers", c.workers >= 0, [] { return "workers must be >= 0 (0 = all cores)"; });
  std::string out;
  if (top.get("out", out)) {
    check(top, "out", !out.empty(), [] { return "output directory must not be empty"; });
    c.out = out;
  }

  Section params = top.sub("params");
  if (params.get("packet_bits", c.params.packet_bits))
    check(params, "packet_bits", c.params.packet_bits >= 1, [] { return "packet_bits must be >= 1"; });
  if (params.get("eps_max", c.params.eps_max))
    check(params, "eps_max", c.params.eps_max > 0.0 && c.params.eps_max <= 0.5,
          [] { return "eps_max must lie in (0, 0.5]"; });
  if (params.get("symbol_energy", c.symbol_energy))
    check(params, "symbol_energy", c.symbol_energy > 0.0,
          [] { return "symbol_energy must be positive"; });
  params.finish();

  Section frame = top.sub("frame");
  const bool has_time = frame.get("frame_time", c.frame.frame_time);
  if (has_time)
    check(frame, "frame_time", c.frame.frame_time > 0.0, [] { return "frame_time must be positive"; });
  if (frame.get("symbol_time", c.frame.symbol_time))
    check(frame, "symbol_time", c.frame.symbol_time > 0.0,
          [] { return "symbol_time must be positive"; });
  if (frame.get("feedback_time", c.frame.feedback_time))
    check(frame, "feedback_time", c.frame.feedback_time >= 0.0,
          [] { return "feedback_time must be >= 0"; });
  int n_max = 0;
  if (frame.get("n_max", n_max)) {
    if (has_time) frame.error("n_max", "give either frame.n_max or frame.frame_time, not both");
    check(frame, "n_max", n_max >= 2 && n_max <= 200000,
          [] { return "n_max must lie in [2, 200000]"; });
    c.frame.frame_time = n_max * c.frame.symbol_time;
  }
  check(frame, "frame_time", c.frame.n_max() >= 2 && c.frame.n_max() <= 200000,
        [] { return "the frame must hold between 2 and 200000 symbols"; });
  frame.finish();

  Section sweep = top.sub("sweep");
  sweep.get("from", c.sweep.from);
  sweep.get("to", c.sweep.to);
  sweep.get("step", c.sweep.step);
  check(sweep, "from", c.sweep.from >= 2, [] { return "sweep.from must be >= 2"; });
  check(sweep, "to", c.sweep.to >= c.sweep.from && c.sweep.to <= 200000,
        [] { return "sweep.to must lie in [sweep.from, 200000]"; });
  check(sweep, "step", c.sweep.step >= 1, [] { return "sweep.step must be >= 1"; });
  sweep.finish();

  Section grid = top.sub("grid");
  grid.get_list("snr_db", c.grid_snr_db);
  grid.get_list("packet_bits", c.grid_packet_bits);
  check(grid, "snr_db", !c.grid_snr_db.empty(), [] { return "grid.snr_db must not be empty"; });
  check(grid, "packet_bits", !c.grid_packet_bits.empty() &&
                                 *std::min_element(c.grid_packet_bits.begin(),
                                                   c.grid_packet_bits.end()) >= 1,
        [] { return "grid.packet_bits must be a nonempty list of sizes >= 1"; });
  grid.finish();

  Section fading = top.sub("fading");
  fading.get("base_snr_db", c.fading.base_snr_db);
  if (fading.get("shadow_sigma_db", c.fading.shadow_sigma_db))
    check(fading, "shadow_sigma_db", c.fading.shadow_sigma_db >= 0.0,
          [] { return "shadow_sigma_db must be >= 0"; });
  fading.get("rayleigh", c.fading.rayleigh_enabled);
  fading.get("fading_scale_db", c.fading.fading_scale_db);
  fading.get("independent", c.fading.ul_dl_independent);
  if (fading.get("runs", c.runs))
    check(fading, "runs", c.runs >= 1, [] { return "runs must be >= 1"; });
  if (fading.get("bootstrap", c.bootstrap))
    check(fading, "bootstrap", c.bootstrap == 0 || c.bootstrap >= 2,
          [] { return "bootstrap must be 0 (off) or >= 2 resamples"; });
  std::vector<std::string> strategies;
  if (fading.get_list("strategies", strategies)) {
    c.strategies.clear();
    for (const auto& s : strategies) {
      const auto st = parse_strategy(s);
      check(fading, "strategies", st.has_value(), [&] {
        return "unknown strategy '" + s + "' (expected optimal, one_shot, naive or lut)";
      });
      c.strategies.push_back(*st);
    }
    check(fading, "strategies", !c.strategies.empty(), [] { return "no strategies given"; });
  }
  fading.finish();

  Section lut = top.sub("lut");
  lut.get("snr_min_db", c.lut.snr_min_db);
  lut.get("snr_max_db", c.lut.snr_max_db);
  if (lut.get("step_db", c.lut.step_db))
    check(lut, "step_db", c.lut.step_db > 0.0, [] { return "lut.step_db must be positive"; });
  check(lut, "snr_max_db", c.lut.snr_min_db < c.lut.snr_max_db,
        [] { return "lut.snr_min_db must be below lut.snr_max_db"; });
  lut.get("diagonal", c.lut.diagonal);
  lut.get("file", c.lut_file);
  if (lut.get_list("steps_db", c.lut_steps)) {
    check(lut, "steps_db", !c.lut_steps.empty(), [] { return "lut.steps_db must not be empty"; });
    for (double s : c.lut_steps)
      check(lut, "steps_db", s > 0.0, [] { return "every LUT step must be positive"; });
  }
  lut.get("ul_snr_db", c.lookup_ul_db);
  lut.get("dl_snr_db", c.lookup_dl_db);
  lut.finish();
  c.lut.params = c.params;
  c.lut.n_max = c.n_max();

  Section apc = top.sub("apc");
  apc.get_list("power_levels", c.apc.power_levels);
  std::string mode;
  if (apc.get("budget_mode", mode)) {
    const auto m = parse_budget_mode(mode);
    check(apc, "budget_mode", m.has_value(), [&] {
      return "unknown budget mode '" + mode + "' (expected worst_case, expected or none)";
    });
    c.apc.budget_mode = *m;
  }
  double budget = 0.0;
  if (apc.get("energy_budget", budget)) {
    check(apc, "energy_budget", budget > 0.0, [] { return "energy_budget must be positive"; });
    c.apc_budget = budget;
  }
  apc.get("max_stages", c.apc.max_stages);
  int stages = 0;
  if (apc.get("stages", stages)) c.apc.fixed_stages = stages;
  c.apc.n_max = c.n_max();
  c.apc.symbol_energy = c.symbol_energy;
  c.apc.workers = c.workers;
  c.apc.energy_budget = c.apc_budget.value_or(1.0);
  try {
    c.apc.validate();
  } catch (const std::invalid_argument& e) {
    apc.error("power_levels", e.what());
  }
  apc.finish();

  Section sim = top.sub("simulate");
  if (sim.get("frames", c.sim.frames))
    check(sim, "frames", c.sim.frames >= 1, [] { return "frames must be >= 1"; });
  if (sim.get("source", c.sim.source))
    check(sim, "source",
          c.sim.source == "policy" || c.sim.source == "naive" || c.sim.source == "fixed",
          [] { return "source must be policy, naive or fixed"; });
  sim.get_list("schedule", c.sim.schedule);
  sim.get("keep_outcomes", c.sim.keep_outcomes);
  if (c.sim.source == "fixed")
    check(sim, "schedule", c.sim.schedule.size() >= 2,
          [] { return "a fixed source needs 'schedule': UL slots followed by the final DL slot"; });
  sim.finish();

  top.finish();

  if (c.experiment == "lut_lookup" && c.lut_file.empty())
    throw ConfigError(origin + ": lut_lookup needs lut.file");
  if (!c.lut_file.empty() && (c.experiment == "lut_lookup" || c.experiment == "fading_campaign") &&
      !std::filesystem::is_regular_file(c.lut_file))
    throw ConfigError(origin + ": lut.file '" + c.lut_file + "' does not exist");
  if (c.experiment == "lut_build" || c.experiment == "lut_lookup" ||
      (c.experiment == "fading_campaign" &&
       std::count(c.strategies.begin(), c.strategies.end(), Strategy::lut))) {
    try {
      c.lut.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(origin + ": lut: " + e.what());
    }
  }
  return c;
}

// Inserts value (parsed as YAML) at a dotted path, creating maps on the way.
void apply_override(YAML::Node& root, const std::string& path, const YAML::Node& value) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("--set " + path + ": malformed key");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("--set: empty key");
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      next = YAML::Node(YAML::NodeType::Map);
      chain.back()[parts[i]] = next;
    } else if (!next.IsMap()) {
      throw ConfigError("--set " + path + ": '" + parts[i] + "' is not a section");
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
}

}  // namespace

ExperimentConfig parse_config(const YAML::Node& root, const std::string& origin) {
  return parse(root, origin, {});
}

ExperimentConfig load_config(const std::filesystem::path& file, const Overrides& ov) {
  YAML::Node root(YAML::NodeType::Map);
  std::string origin = "<defaults>";
  if (!file.empty()) {
    origin = file.string();
    try {
      root = YAML::LoadFile(file.string());
    } catch (const YAML::BadFile&) {
      throw ConfigError(origin + ": cannot open config file");
    } catch (const YAML::ParserException& e) {
      throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError(origin + ":1: the config root must be a mapping");
  }

  OverridePaths paths;
  auto put = [&](const std::string& key, const YAML::Node& v) {
    apply_override(root, key, v);
    paths.insert(key);
  };
  for (const auto& kv : ov.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set " + kv + ": expected key=value");
    const std::string key = kv.substr(0, eq);
    YAML::Node value;
    try {
      value = YAML::Load(kv.substr(eq + 1));
    } catch (const YAML::Exception& e) {
      throw ConfigError("--set " + key + ": " + e.msg);
    }
    put(key, value);
  }
  if (ov.experiment) put("experiment", YAML::Node(*ov.experiment));
  if (ov.scenario) put("scenario", YAML::Node(*ov.scenario));
  if (ov.seed) put("seed", YAML::Node(*ov.seed));
  if (ov.workers) put("workers", YAML::Node(*ov.workers));
  if (ov.out) put("out", YAML::Node(*ov.out));
  return parse(root, origin, paths);
}

std::string config_json(const ExperimentConfig& c) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["experiment"] = c.experiment;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out.string();
  j["channel"] = {{"ul_snr_linear", c.ul.snr_linear}, {"dl_snr_linear", c.dl.snr_linear}};
  j["params"] = {{"packet_bits", c.params.packet_bits},
                 {"eps_max", c.params.eps_max},
                 {"symbol_energy", c.symbol_energy}};
  j["frame"] = {{"frame_time", c.frame.frame_time},
                {"symbol_time", c.frame.symbol_time},
                {"feedback_time", c.frame.feedback_time}};
  j["sweep"] = {{"from", c.sweep.from}, {"to", c.sweep.to}, {"step", c.sweep.step}};
  j["grid"] = {{"snr_db", c.grid_snr_db}, {"packet_bits", c.grid_packet_bits}};
  std::vector<std::string> strategies;
  for (Strategy s : c.strategies) strategies.push_back(to_string(s));
  j["fading"] = {{"base_snr_db", c.fading.base_snr_db},
                 {"shadow_sigma_db", c.fading.shadow_sigma_db},
                 {"rayleigh", c.fading.rayleigh_enabled},
                 {"fading_scale_db", c.fading.fading_scale_db},
                 {"independent", c.fading.ul_dl_independent},
                 {"runs", c.runs},
                 {"strategies", strategies},
                 {"bootstrap", c.bootstrap}};
  ordered_json lut = {{"snr_min_db", c.lut.snr_min_db},
                      {"snr_max_db", c.lut.snr_max_db},
                      {"step_db", c.lut.step_db},
                      {"diagonal", c.lut.diagonal}};
  if (!c.lut_file.empty()) lut["file"] = c.lut_file;
  lut["steps_db"] = c.lut_steps;
  lut["ul_snr_db"] = c.lookup_ul_db;
  lut["dl_snr_db"] = c.lookup_dl_db;
  j["lut"] = lut;
  ordered_json apc = {{"power_levels", c.apc.power_levels},
                      {"budget_mode", to_string(c.apc.budget_mode)},
                      {"max_stages", c.apc.max_stages}};
  if (c.apc_budget) apc["energy_budget"] = *c.apc_budget;
  if (c.apc.fixed_stages) apc["stages"] = *c.apc.fixed_stages;
  j["apc"] = apc;
  ordered_json sim = {{"frames", c.sim.frames}, {"source", c.sim.source}};
  if (!c.sim.schedule.empty()) sim["schedule"] = c.sim.schedule;
  sim["keep_outcomes"] = c.sim.keep_outcomes;
  j["simulate"] = sim;
  return j.dump(2);
}

}  // namespace clarq::cli
