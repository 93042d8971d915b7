#pragma once

#include "clarq/apc.hpp"
#include "clarq/channel_mc.hpp"
#include "clarq/fbl.hpp"
#include "clarq/lut.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace YAML {
class Node;
}

namespace clarq::cli {

// Raised for anything wrong with the configuration; the message already
// carries the location ("file:line:" or "--set key").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitInfeasible = 2;

const std::vector<std::string>& experiment_names();

struct SweepRange {
  int from = 644;
  int to = 2500;
  int step = 1;
};

struct SimSettings {
  long long frames = 1'000'000;
  std::string source = "policy";  // policy | naive | fixed
  std::vector<int> schedule;      // UL slots then the final DL slot, for "fixed"
  bool keep_outcomes = false;
};

struct ExperimentConfig {
  std::string experiment;
  std::string scenario;
  ChannelSpec ul;
  ChannelSpec dl;
  FblParams params;
  double symbol_energy = 1.0;
  FrameBudget frame;
  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path out = "results";

  SweepRange sweep;
  std::vector<double> grid_snr_db{-20, -17.5, -15, -12.5, -10, -7.5, -5};
  std::vector<int> grid_packet_bits{16, 32, 64, 128};

  FadingModel fading;
  int runs = 5000;
  std::vector<Strategy> strategies{Strategy::optimal, Strategy::one_shot, Strategy::naive};
  int bootstrap = 1000;

  LutSpec lut;
  std::string lut_file;
  std::vector<double> lut_steps{16, 8, 4, 2, 1};
  double lookup_ul_db = 0.0;
  double lookup_dl_db = 0.0;

  ApcConfig apc;
  std::optional<double> apc_budget;  // default: plain DP worst-case energy

  SimSettings sim;

  int n_max() const { return frame.n_max(); }
};

// Command-line overrides, applied on top of the config file. Each entry is
// "dotted.key=value"; the value is read as YAML so lists work too.
struct Overrides {
  std::optional<std::string> experiment;
  std::optional<std::string> scenario;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::vector<std::string> set;
};

// Reads the config file (empty path: defaults only), applies the overrides
// and validates everything. Throws ConfigError.
ExperimentConfig load_config(const std::filesystem::path& file, const Overrides& ov);
ExperimentConfig parse_config(const YAML::Node& root, const std::string& origin);

// Fully resolved config as JSON. It parses back to the same config, so the
// sidecar's "config" block can be fed to --config as is.
std::string config_json(const ExperimentConfig& cfg);

// Runs the experiment, writes its files under cfg.out and reports progress
// on `log`. Returns the process exit status.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace clarq::cli
