// Command-line front end: simulate | analyze | learn | adapt | extrapolate.

#include <CLI11.hpp>
#include <chrono>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "coopmimo/errors.hpp"
#include "coopmimo/harness.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative data-assisted massive MIMO uplink simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> threads;
  std::string mode;
  std::string variance;
  std::string out_dir;
  std::string triple;
  bool validate = false;
  std::vector<std::string> overrides;

  app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "master seed");
  app.add_option("--trials", trials, "Monte Carlo trials per placement");
  app.add_option("--mode", mode, "scheme selection")->check(CLI::IsMember({"proposed", "baseline", "both"}));
  app.add_option("--variance", variance, "variance form")->check(CLI::IsMember({"campbell", "paper", "both"}));
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--validate", validate, "closed-loop outage check for adapt");
  app.add_option("--threads", threads, "worker threads (0: all cores)");
  app.add_option("--triple", triple, "JSON file with three users' learned statistics");
  app.add_option("--set", overrides, "extra key=value overrides");

  const std::vector<std::string> names{"simulate", "analyze", "learn", "adapt", "extrapolate"};
  for (const auto& n : names) app.add_subcommand(n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    coopmimo::ExperimentConfig config =
        config_path.empty() ? coopmimo::ExperimentConfig{} : coopmimo::load_config_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw coopmimo::ConfigError("--set expects key=value, got " + kv);
      coopmimo::apply_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) config.seed = *seed;
    if (trials) config.trials = *trials;
    if (threads) config.threads = *threads;
    if (!mode.empty()) coopmimo::apply_config_value(config, "mode", mode);
    if (!variance.empty()) coopmimo::apply_config_value(config, "variance", variance);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (!triple.empty()) config.triple_path = triple;
    if (validate) config.validate = true;
    config.finalize();

    const auto start = std::chrono::steady_clock::now();
    coopmimo::ResultBundle bundle;
    if (command == "simulate") {
      bundle = coopmimo::cmd_simulate(config);
    } else if (command == "analyze") {
      bundle = coopmimo::cmd_analyze(config);
    } else if (command == "learn") {
      bundle = coopmimo::cmd_learn(config);
    } else if (command == "adapt") {
      bundle = coopmimo::cmd_adapt(config);
    } else {
      bundle = coopmimo::cmd_extrapolate(config);
    }
    coopmimo::write_bundle(bundle, config.output_dir);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    std::cerr << command << ": wrote " << bundle.files.size() + 1 << " files to " << config.output_dir << " in "
              << elapsed.count() << " s (config " << coopmimo::config_hash(config) << ")\n";
  } catch (const coopmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const coopmimo::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
