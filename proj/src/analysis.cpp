#include "coopmimo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "coopmimo/errors.hpp"

namespace coopmimo {

namespace {

constexpr double kShadowingScale = std::numbers::ln10 / 10.0;

// E[chi^k] for chi = 10^(zeta/10), zeta ~ N(0, theta^2) in dB.
double lognormal_moment(double theta_db, int k) {
  const double s = kShadowingScale * theta_db;
  return std::exp(0.5 * k * k * s * s);
}

void check_tail(const FrameConfig& config) {
  if (!(config.pathloss_exponent > 2.0)) {
    throw ConfigError("interference integrals diverge for a pathloss exponent <= 2");
  }
}

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("q_inverse: p must lie in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  if (density > 0.0) {
    const double step = (q_function(x) - p) / density;
    if (std::abs(step) < 1e-12) x += step;
  }
  return x;
}

LemmaSinr asymptotic_sinr(double rho_target, std::span<const double> outside_rho, std::size_t set_size,
                          std::size_t effective_length, std::size_t antennas) {
  if (!(rho_target > 0.0) || effective_length == 0 || antennas == 0) {
    throw ConfigError("asymptotic_sinr: rho, L and M must be positive");
  }
  LemmaSinr out;
  out.set_size = set_size;
  out.effective_length = effective_length;
  const double M = static_cast<double>(antennas);
  const double L = static_cast<double>(effective_length);
  for (double rho : outside_rho) {
    const double ratio = rho / rho_target;
    out.interference += ratio / M + ratio * ratio / L;
  }
  if (out.interference <= 0.0) {
    out.sinr = std::numeric_limits<double>::infinity();
    out.infinite = true;
    return out;
  }
  out.sinr = 1.0 / ((static_cast<double>(set_size) / L + 1.0) * out.interference);
  return out;
}

bool uses_cooperation(const UserDrop& drop, const FrameConfig& config, std::size_t block, Scheme scheme) {
  if (!config.cooperative(block, scheme)) return false;
  return !partition_users(drop, config.cooperation_radius).cooperative.empty();
}

LemmaSinr asymptotic_sinr(const UserDrop& drop, const FrameConfig& config, std::size_t block, Scheme scheme) {
  if (drop.size() == 0) throw ConfigError("asymptotic_sinr: empty drop");
  const bool coop = uses_cooperation(drop, config, block, scheme);
  const UserPartition part =
      partition_users(drop, coop ? std::optional<double>(config.cooperation_radius) : std::nullopt);
  std::vector<double> outside;
  outside.reserve(part.outside.size());
  for (auto u : part.outside) outside.push_back(drop.rho_target(u));
  const std::size_t length = coop ? config.effective_length(block, Scheme::proposed)
                                  : config.effective_length(block, Scheme::baseline);
  return asymptotic_sinr(drop.rho_target(0), outside, part.in_cell.size() + part.cooperative.size(), length,
                         config.antennas);
}

std::string to_string(VarianceForm form) { return form == VarianceForm::campbell ? "campbell" : "paper"; }

std::string to_string(StatsProvenance provenance) {
  switch (provenance) {
    case StatsProvenance::analytic:
      return "analytic";
    case StatsProvenance::learned:
      return "learned";
    case StatsProvenance::extrapolated:
      return "extrapolated";
    case StatsProvenance::campbell_oracle:
      return "campbell_oracle";
  }
  return "unknown";
}

VarianceForm parse_variance_form(const std::string& name) {
  if (name == "campbell") return VarianceForm::campbell;
  if (name == "paper") return VarianceForm::paper;
  throw ConfigError("unknown variance form: " + name);
}

RegionSpec block_region(const NetworkLayout& layout, const FrameConfig& config, std::size_t block, Scheme scheme,
                        QuadratureOptions options) {
  if (config.cooperative(block, scheme)) {
    return integration_region(layout, RegionMode::outside_radius, layout.coverage_radius(),
                              config.cooperation_radius, options);
  }
  return integration_region(layout, RegionMode::outside_target_cell, layout.coverage_radius(), 0.0, options);
}

SinrStats interference_stats(double rho_target, const DensityMap& density, const RegionSpec& region,
                             const FrameConfig& config, std::size_t block, std::size_t effective_length,
                             VarianceForm form) {
  check_tail(config);
  if (!(rho_target > 0.0) || effective_length == 0) {
    throw ConfigError("interference_stats: rho and L must be positive");
  }
  const double sigma = config.pathloss_exponent;
  const double theta = config.shadowing_std_db;
  const double first = 1.0 / (static_cast<double>(config.antennas) * rho_target);
  const double second = 1.0 / (static_cast<double>(effective_length) * rho_target * rho_target);
  const double e1 = lognormal_moment(theta, 1);
  const double e2 = lognormal_moment(theta, 2);
  const double e3 = lognormal_moment(theta, 3);
  const double e4 = lognormal_moment(theta, 4);

  double mean = 0.0;
  double squared = 0.0;
  for (const auto& node : region.nodes()) {
    const double lambda = density(node.point);
    if (lambda == 0.0) continue;
    const double g = std::pow(node.point.norm(), -sigma);
    const double m = e1 * first * g + e2 * second * g * g;
    mean += node.weight * lambda * m;
    if (form == VarianceForm::campbell) {
      const double f2 = e2 * first * first * g * g + 2.0 * e3 * first * second * g * g * g +
                        e4 * second * second * g * g * g * g;
      squared += node.weight * lambda * f2;
    } else {
      squared += node.weight * lambda * m * m;
    }
  }

  SinrStats stats;
  stats.block = block;
  stats.mean = mean;
  stats.variance = form == VarianceForm::campbell ? squared : squared - mean * mean;
  stats.provenance = StatsProvenance::analytic;
  stats.region = region;
  const double r = region.r_max();
  stats.tail_bound = 2.0 * std::numbers::pi * density.upper() *
                     (e1 * first * std::pow(r, 2.0 - sigma) / (sigma - 2.0) +
                      e2 * second * std::pow(r, 2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0));
  return stats;
}

double expected_set_size(const DensityMap& density, const RegionSpec& region) {
  return 1.0 + region.integrate_interior([&](Point p) { return density(p); });
}

double sinr_cdf(double threshold, const SinrStats& stats, double set_size, std::size_t effective_length) {
  if (!(threshold > 0.0)) throw ConfigError("sinr_cdf: threshold must be positive");
  if (!(stats.variance > 0.0)) throw ConfigError("sinr_cdf: variance must be positive");
  if (effective_length == 0) throw ConfigError("sinr_cdf: L must be positive");
  const double scale = set_size / static_cast<double>(effective_length) + 1.0;
  return q_function((1.0 / (threshold * scale) - stats.mean) / std::sqrt(stats.variance));
}

RateEntry rate_threshold(const SinrStats& stats, double epsilon, double set_size, std::size_t effective_length) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("rate_threshold: epsilon must lie in (0, 1)");
  if (stats.variance < 0.0) throw NumericalError("rate_threshold: negative variance");
  if (effective_length == 0) throw ConfigError("rate_threshold: L must be positive");
  const double level = q_inverse(epsilon) * std::sqrt(stats.variance) + stats.mean;
  if (!(level > 0.0)) {
    throw NumericalError("rate_threshold: Q^-1(eps) sqrt(V) + M = " + std::to_string(level) +
                         " <= 0, threshold undefined");
  }
  RateEntry entry;
  entry.block = stats.block;
  entry.epsilon = epsilon;
  entry.threshold = 1.0 / (level * (set_size / static_cast<double>(effective_length) + 1.0));
  entry.rate = std::log2(1.0 + entry.threshold);
  return entry;
}

std::vector<CdfPoint> analytic_cdf(const SinrStats& stats, double set_size, std::size_t effective_length,
                                   std::span<const double> thresholds_db) {
  std::vector<CdfPoint> out;
  out.reserve(thresholds_db.size());
  for (double t : thresholds_db) out.push_back({t, sinr_cdf(from_db(t), stats, set_size, effective_length)});
  return out;
}

std::vector<CdfPoint> empirical_cdf(std::span<const double> samples_db, std::span<const double> thresholds_db) {
  std::vector<double> sorted(samples_db.begin(), samples_db.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(thresholds_db.size());
  const double n = static_cast<double>(sorted.size());
  for (double t : thresholds_db) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back({t, n > 0 ? static_cast<double>(below) / n : 0.0});
  }
  return out;
}

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("ks_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }
double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace coopmimo
