#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopmimo/analysis.hpp"
#include "coopmimo/channel.hpp"
#include "coopmimo/detector.hpp"
#include "coopmimo/geometry.hpp"

namespace coopmimo {

// Running statistics of the normalized interference for one block.
struct LearnerState {
  std::size_t block = 0;
  std::size_t count = 0;           // updates applied
  double mean = 0.0;
  std::optional<double> variance;  // defined once count >= 2
  double normalization = 1.0;      // |set|/L + 1 of the latest update
  double mean_normalization = 0.0; // running mean of the normalizations
};

// One step of the mean recursion for the n-th normalized sample.
double mean_step(double previous_mean, double sample, std::size_t n);
// One step of the variance recursion; throws ConfigError for n < 2.
double variance_step(double previous_variance, double previous_mean, double sample, std::size_t n);

// Applies observation I with normalization |set|/L + 1.
LearnerState learner_update(LearnerState state, double observation, double normalization);

// |s^H y|^2 for one silent symbol: every target-cell user is muted, all other
// users send fresh CN(0, P) symbols over the frame's channels, plus noise.
// s^H is the target user's row of the block's detector.
double measure_silent_interference(const UserDrop& drop, const FrameConfig& config, const DetectorState& state,
                                   const ChannelRealization& realization, std::uint64_t seed);

// What each campaign iteration observes.
//   lemma1:        (|set|/L + 1) times the interference functional of the drop.
//   silent_symbol: silent-symbol power through the detector, relative to the
//                  target's signal gain |s^H h_hat|^2 P.
enum class ObservationModel { lemma1, silent_symbol };

std::string to_string(ObservationModel model);
ObservationModel parse_observation_model(const std::string& name);

struct CampaignConfig {
  FrameConfig frame;
  Scheme scheme = Scheme::proposed;
  std::vector<std::size_t> blocks{1, 2, 3, 4, 5};
  std::size_t iterations = 200;
  ObservationModel model = ObservationModel::lemma1;
  std::uint64_t seed = 1;
};

struct TracePoint {
  std::size_t n = 0;
  std::size_t block = 0;
  double mean = 0.0;
  std::optional<double> variance;
};

struct CampaignResult {
  std::vector<SinrStats> stats;  // one per block, provenance learned
  std::vector<LearnerState> learners;
  std::vector<TracePoint> trace;
  std::size_t resamples = 0;
};

// One fresh drop (and, for silent_symbol, fresh channels) per iteration.
CampaignResult run_learning_campaign(const DropSource& drops, const CampaignConfig& config);

std::string trace_csv(const std::vector<TracePoint>& trace, const std::string& config_hash);

struct UserStatsRecord {
  std::size_t index = 0;
  double rho = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

// Learned statistics of three users of one cell.
struct UserStatsTriple {
  std::size_t cell = 0;
  std::size_t block = 0;
  std::array<UserStatsRecord, 3> users;
};

struct Extrapolation {
  SinrStats stats;  // provenance extrapolated
  double target_rho = 0.0;
  double mean_condition = 0.0;      // 2x2 system, columns scaled to unit norm
  double variance_condition = 0.0;  // 3x3 system, columns scaled to unit norm
  // Model coefficients: M(rho) = A/(M rho) + B/(L rho^2) and
  // V(rho) + M(rho)^2 = c2/rho^2 + c3/rho^3 + c4/rho^4.
  double first_moment = 0.0;   // A
  double second_moment = 0.0;  // B
  std::array<double, 3> second_order{};  // c2, c3, c4
};

inline constexpr double kMaxCondition = 1e12;

// The mean uses users 0 and 1 of the triple; the variance uses all three.
Extrapolation extrapolate_stats(const UserStatsTriple& triple, double target_rho, const FrameConfig& config,
                                std::size_t effective_length);

void to_json(nlohmann::json& j, const UserStatsRecord& r);
void from_json(const nlohmann::json& j, UserStatsRecord& r);
void to_json(nlohmann::json& j, const UserStatsTriple& t);
void from_json(const nlohmann::json& j, UserStatsTriple& t);
void to_json(nlohmann::json& j, const Extrapolation& e);

}  // namespace coopmimo
