#include "experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace clarq::cli;

  CLI::App app{"Dynamic closed-loop ARQ planner and simulator"};
  app.set_version_flag("--version", CLARQ_VERSION);
  app.require_subcommand(0, 1);

  std::string config;
  Overrides ov;
  app.add_option("-c,--config", config, "YAML experiment config")->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { ov.seed = v; },
                                         "base seed");
  app.add_option_function<int>("--workers", [&](int v) { ov.workers = v; },
                               "worker threads (0 = all cores)");
  app.add_option_function<std::string>("-o,--out", [&](const std::string& v) { ov.out = v; },
                                       "output directory");
  app.add_option_function<std::string>("--scenario", [&](const std::string& v) { ov.scenario = v; },
                                       "scenario_a, scenario_b or custom");
  app.add_option("--set", ov.set, "override a config key, e.g. --set frame.n_max=1200")
      ->take_all();

  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->fallthrough();
    sub->callback([&ov, name] { ov.experiment = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = load_config(config, ov);
    return run_experiment(cfg, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
