#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "coopmimo/analysis.hpp"
#include "coopmimo/channel.hpp"
#include "coopmimo/detector.hpp"
#include "coopmimo/geometry.hpp"
#include "coopmimo/learning.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

enum class SchemeSelection { proposed, baseline, both };
enum class StatsSource { analytic, learned };

struct ExperimentConfig {
  FrameConfig frame;
  double transmit_power_dbm = 23.0;
  double noise_psd_dbm_hz = -174.0;
  double bandwidth_hz = 5e6;

  double cell_radius = 500.0;
  int rings = 2;
  double users_per_cell = 10.0;
  std::vector<double> target_distances{100.0};

  std::size_t trials = 500;
  std::uint64_t seed = 1;
  SchemeSelection mode = SchemeSelection::both;
  std::vector<VarianceForm> variance_forms{VarianceForm::campbell};
  std::vector<std::size_t> blocks{1, 2, 3, 4, 5};
  SinrEvaluation evaluation = SinrEvaluation::exact_conditional;
  double symbol_error_rate = 0.0;
  std::optional<double> assumed_out_of_cell_power;
  std::optional<double> assumed_out_of_coop_power;

  double epsilon = 0.05;
  StatsSource adapt_stats = StatsSource::learned;
  bool validate = false;
  std::size_t validate_drops = 2000;

  std::size_t learn_iterations = 500;
  ObservationModel observation = ObservationModel::lemma1;

  std::string triple_path;
  std::optional<double> target_rho;

  QuadratureOptions quadrature;
  double cdf_min_db = -20.0;
  double cdf_max_db = 50.0;
  double cdf_step_db = 0.25;

  std::size_t threads = 0;  // 0: hardware concurrency
  std::string output_dir = "results";

  // Recomputes the linear powers from the dBm fields and checks every field.
  void finalize();
  std::vector<Scheme> schemes() const;
  NetworkLayout layout() const;
  DensityMap density() const;
  std::vector<double> cdf_grid_db() const;
};

// Applies `key = value` lines ('#' starts a comment). Unknown keys and bad
// values throw ConfigError.
void apply_config_text(ExperimentConfig& config, const std::string& text);
void apply_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
ExperimentConfig load_config_file(const std::string& path);

// Canonical key=value text of every result-affecting field, sorted by key.
std::string canonical_config(const ExperimentConfig& config);
std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& config);

std::string format_double(double value);

// Runs f(0..n-1) on `threads` workers; results are stored by index, and the
// exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t n, std::size_t threads, F f) -> std::vector<decltype(f(std::size_t{}))> {
  using Result = decltype(f(std::size_t{}));
  std::vector<std::optional<Result>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<Result> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

struct TrialRecords {
  std::size_t trial = 0;
  std::uint64_t channel_seed = 0;
  std::size_t resamples = 0;
  std::map<Scheme, std::vector<BlockSinrRecord>> detector;
  std::map<Scheme, std::vector<LemmaSinr>> lemma;  // per block
};

DropSource make_drop_source(const ExperimentConfig& config, double target_distance, std::size_t distance_index,
                            std::uint64_t stream_id = stream::kDrop);

// Paired trials: every selected scheme sees the same drop and realization.
std::vector<TrialRecords> simulate_trials(const ExperimentConfig& config, double target_distance,
                                          std::size_t distance_index);

struct AnalyticPoint {
  SinrStats stats;
  double set_size = 0.0;  // expected |estimated set|
  std::size_t effective_length = 0;
  bool degenerate = false;       // no interference mass: the SINR is infinite
  bool variance_valid = true;    // false when the variance is not positive
};

// Large-scale gain of a target at `distance` with 0 dB shadowing.
double planted_rho(const ExperimentConfig& config, double distance);

AnalyticPoint analyze_point(const ExperimentConfig& config, double target_distance, std::size_t block,
                            Scheme scheme, VarianceForm form);

struct ResultBundle {
  std::map<std::string, std::string> files;  // file name -> contents
  nlohmann::json manifest;
};

void write_bundle(const ResultBundle& bundle, const std::string& directory);

ResultBundle cmd_simulate(const ExperimentConfig& config);
ResultBundle cmd_analyze(const ExperimentConfig& config);
ResultBundle cmd_learn(const ExperimentConfig& config);
ResultBundle cmd_adapt(const ExperimentConfig& config);
ResultBundle cmd_extrapolate(const ExperimentConfig& config);

}  // namespace coopmimo
