#include "coopmimo/learning.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <sstream>

#include "coopmimo/errors.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

namespace {

// 2-norm condition number after scaling every column to unit norm.
double scaled_condition(Eigen::MatrixXd a) {
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c).normalize();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  return smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd scaled_solve(Eigen::MatrixXd a, const Eigen::VectorXd& b) {
  Eigen::VectorXd scale(a.cols());
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    scale(c) = a.col(c).norm();
    a.col(c) /= scale(c);
  }
  return a.colPivHouseholderQr().solve(b).cwiseQuotient(scale);
}

// Lagrange interpolation through (x_i, y_i), evaluated at x. Extrapolation
// cancels between terms, so the sum is carried in extended precision.
long double lagrange(std::span<const long double> xs, std::span<const long double> ys, long double x) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    long double term = ys[i];
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j != i) term *= (x - xs[j]) / (xs[i] - xs[j]);
    }
    sum += term;
  }
  return sum;
}

std::size_t block_length(const DetectorState& state, const FrameConfig& config) {
  return state.mode == DetectionMode::cooperative ? config.effective_length(state.block, Scheme::proposed)
                                                  : config.effective_length(state.block, Scheme::baseline);
}

}  // namespace

double mean_step(double previous_mean, double sample, std::size_t n) {
  if (n < 1) throw ConfigError("mean_step: n must be at least 1");
  const double nn = static_cast<double>(n);
  return (nn - 1.0) / nn * previous_mean + sample / nn;
}

double variance_step(double previous_variance, double previous_mean, double sample, std::size_t n) {
  if (n < 2) throw ConfigError("variance_step: the variance recursion needs n >= 2");
  const double nn = static_cast<double>(n);
  const double dev = sample - previous_mean;
  return (nn - 2.0) / (nn - 1.0) * previous_variance + dev * dev / (nn - 1.0);
}

LearnerState learner_update(LearnerState state, double observation, double normalization) {
  if (!(normalization > 0.0)) throw ConfigError("learner_update: normalization must be positive");
  const double sample = observation / normalization;
  const std::size_t n = state.count + 1;
  const double previous_mean = state.mean;
  state.mean = mean_step(previous_mean, sample, n);
  if (n >= 2) state.variance = variance_step(state.variance.value_or(0.0), previous_mean, sample, n);
  state.mean_normalization = mean_step(state.mean_normalization, normalization, n);
  state.count = n;
  state.normalization = normalization;
  return state;
}

double measure_silent_interference(const UserDrop& drop, const FrameConfig& config, const DetectorState& state,
                                   const ChannelRealization& realization, std::uint64_t seed) {
  const CVector w = state.target_row();
  if (w.size() != realization.channels.rows()) throw ConfigError("measure_silent_interference: dimension mismatch");
  Rng rng(seed);
  CVector y = CVector::Zero(w.size());
  for (std::size_t u = 0; u < drop.size(); ++u) {
    const cdouble x = complex_normal(rng, config.transmit_power);
    if (drop.users[u].cell == 0) continue;
    y += realization.channels.col(static_cast<Eigen::Index>(u)) * x;
  }
  if (config.noise_power > 0.0) {
    for (Eigen::Index m = 0; m < y.size(); ++m) y(m) += complex_normal(rng, config.noise_power);
  }
  return std::norm(w.dot(y));
}

std::string to_string(ObservationModel model) {
  return model == ObservationModel::lemma1 ? "lemma1" : "silent_symbol";
}

ObservationModel parse_observation_model(const std::string& name) {
  if (name == "lemma1") return ObservationModel::lemma1;
  if (name == "silent_symbol") return ObservationModel::silent_symbol;
  throw ConfigError("unknown observation model: " + name);
}

CampaignResult run_learning_campaign(const DropSource& drops, const CampaignConfig& config) {
  config.frame.validate();
  if (config.blocks.empty()) throw ConfigError("learning campaign needs at least one block");
  for (auto b : config.blocks) {
    if (b < 1 || b > config.frame.num_blocks()) throw ConfigError("learning campaign: block out of range");
  }
  CampaignResult result;
  for (auto b : config.blocks) {
    LearnerState learner;
    learner.block = b;
    result.learners.push_back(learner);
  }

  for (std::size_t n = 1; n <= config.iterations; ++n) {
    const PlantedDrop planted = drops.draw(n - 1);
    result.resamples += planted.resamples;
    const UserDrop& drop = planted.drop;

    if (config.model == ObservationModel::lemma1) {
      for (auto& learner : result.learners) {
        const LemmaSinr lemma = asymptotic_sinr(drop, config.frame, learner.block, config.scheme);
        const double norm =
            static_cast<double>(lemma.set_size) / static_cast<double>(lemma.effective_length) + 1.0;
        learner = learner_update(learner, norm * lemma.interference, norm);
      }
    } else {
      const PilotBook pilots = build_pilot_book(config.frame, drop);
      const ChannelRealization realization =
          sample_channels(config.frame, drop, pilots, derive_seed(config.seed, stream::kChannel, n - 1));
      DetectorOptions options;
      options.keep_states = true;
      const FrameResult frame = run_frame(drop, config.frame, realization, config.scheme, options);
      for (auto& learner : result.learners) {
        const DetectorState& state = frame.states.at(learner.block - 1);
        const double power = measure_silent_interference(
            drop, config.frame, state, realization,
            derive_seed(config.seed, stream::kSilent, (n - 1) * config.frame.num_blocks() + learner.block));
        const double gain = std::norm(state.target_row().dot(state.estimates.col(0)));
        const double norm = static_cast<double>(state.estimated_users.size()) /
                                static_cast<double>(block_length(state, config.frame)) +
                            1.0;
        learner = learner_update(learner, power / (config.frame.transmit_power * gain), norm);
      }
    }
    for (const auto& learner : result.learners) {
      result.trace.push_back({n, learner.block, learner.mean, learner.variance});
    }
  }

  for (const auto& learner : result.learners) {
    SinrStats s;
    s.block = learner.block;
    s.mean = learner.mean;
    s.variance = learner.variance.value_or(0.0);
    s.provenance = StatsProvenance::learned;
    result.stats.push_back(s);
  }
  return result;
}

std::string trace_csv(const std::vector<TracePoint>& trace, const std::string& config_hash) {
  std::ostringstream out;
  out.precision(17);
  out << "config_hash,n,block,mean,variance\n";
  for (const auto& p : trace) {
    out << config_hash << ',' << p.n << ',' << p.block << ',' << p.mean << ',';
    if (p.variance) out << *p.variance;
    out << '\n';
  }
  return out.str();
}

Extrapolation extrapolate_stats(const UserStatsTriple& triple, double target_rho, const FrameConfig& config,
                                std::size_t effective_length) {
  if (!(target_rho > 0.0)) throw ConfigError("extrapolate_stats: target rho must be positive");
  if (effective_length == 0) throw ConfigError("extrapolate_stats: L must be positive");
  const auto& u = triple.users;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(u[i].rho > 0.0)) throw ConfigError("extrapolate_stats: rho must be positive");
    for (std::size_t j = i + 1; j < 3; ++j) {
      if (u[i].rho == u[j].rho) throw ConfigError("extrapolate_stats: duplicate rho in the triple");
    }
  }

  // With s = 1/rho: M(s) = a s + b s^2 and V(s) + M(s)^2 = c2 s^2 + c3 s^3 + c4 s^4.
  const std::array<double, 3> s{1.0 / u[0].rho, 1.0 / u[1].rho, 1.0 / u[2].rho};
  Eigen::MatrixXd mean_system(2, 2);
  Eigen::MatrixXd var_system(3, 3);
  Eigen::VectorXd mean_rhs(2);
  Eigen::VectorXd var_rhs(3);
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double si = s[static_cast<std::size_t>(i)];
    const auto& rec = u[static_cast<std::size_t>(i)];
    if (i < 2) {
      mean_system.row(i) << si, si * si;
      mean_rhs(i) = rec.mean;
    }
    var_system.row(i) << si * si, si * si * si, si * si * si * si;
    var_rhs(i) = rec.variance + rec.mean * rec.mean;
  }

  Extrapolation out;
  out.target_rho = target_rho;
  out.mean_condition = scaled_condition(mean_system);
  out.variance_condition = scaled_condition(var_system);
  if (!(out.mean_condition <= kMaxCondition) || !(out.variance_condition <= kMaxCondition)) {
    std::ostringstream msg;
    msg << "extrapolate_stats: ill-conditioned system (condition " << std::max(out.mean_condition, out.variance_condition)
        << ")";
    throw NumericalError(msg.str());
  }
  const Eigen::VectorXd ab = scaled_solve(mean_system, mean_rhs);
  const Eigen::VectorXd c = scaled_solve(var_system, var_rhs);
  out.first_moment = ab(0) * static_cast<double>(config.antennas);
  out.second_moment = ab(1) * static_cast<double>(effective_length);
  out.second_order = {c(0), c(1), c(2)};

  // Evaluate through the interpolating polynomials M/s (linear) and
  // (V + M^2)/s^2 (quadratic), which reproduce a measured user exactly.
  using Wide = long double;
  const Wide sk = 1.0L / static_cast<Wide>(target_rho);
  std::array<Wide, 3> nodes{};
  std::array<Wide, 3> mean_values{};
  std::array<Wide, 3> second_values{};
  for (std::size_t i = 0; i < 3; ++i) {
    const Wide rho = u[i].rho;
    const Wide mean = u[i].mean;
    nodes[i] = 1.0L / rho;
    mean_values[i] = mean * rho;
    second_values[i] = (static_cast<Wide>(u[i].variance) + mean * mean) * rho * rho;
  }
  const Wide mean = lagrange(std::span(nodes).first(2), std::span(mean_values).first(2), sk) * sk;
  const Wide second = lagrange(nodes, second_values, sk) * sk * sk;

  out.stats.block = triple.block;
  out.stats.mean = static_cast<double>(mean);
  out.stats.variance = static_cast<double>(second - mean * mean);
  out.stats.provenance = StatsProvenance::extrapolated;
  return out;
}

void to_json(nlohmann::json& j, const UserStatsRecord& r) {
  j = {{"index", r.index}, {"rho", r.rho}, {"mean", r.mean}, {"variance", r.variance}};
}

void from_json(const nlohmann::json& j, UserStatsRecord& r) {
  r.index = j.value("index", std::size_t{0});
  r.rho = j.at("rho").get<double>();
  r.mean = j.at("mean").get<double>();
  r.variance = j.at("variance").get<double>();
}

void to_json(nlohmann::json& j, const UserStatsTriple& t) {
  j = {{"cell", t.cell}, {"block", t.block}, {"users", t.users}};
}

void from_json(const nlohmann::json& j, UserStatsTriple& t) {
  t.cell = j.value("cell", std::size_t{0});
  t.block = j.value("block", std::size_t{0});
  const auto& users = j.at("users");
  if (!users.is_array() || users.size() != 3) throw ConfigError("a stats triple needs exactly three users");
  for (std::size_t i = 0; i < 3; ++i) t.users[i] = users[i].get<UserStatsRecord>();
}

void to_json(nlohmann::json& j, const Extrapolation& e) {
  j = {{"block", e.stats.block},
       {"target_rho", e.target_rho},
       {"mean", e.stats.mean},
       {"variance", e.stats.variance},
       {"provenance", to_string(e.stats.provenance)},
       {"mean_condition", e.mean_condition},
       {"variance_condition", e.variance_condition},
       {"A", e.first_moment},
       {"B", e.second_moment},
       {"c2", e.second_order[0]},
       {"c3", e.second_order[1]},
       {"c4", e.second_order[2]}};
}

}  // namespace coopmimo
