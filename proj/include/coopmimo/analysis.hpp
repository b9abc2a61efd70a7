#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coopmimo/channel.hpp"
#include "coopmimo/geometry.hpp"

namespace coopmimo {

// Standard normal tail probability and its inverse.
double q_function(double x);
double q_inverse(double p);

struct LemmaSinr {
  double sinr = 0.0;      // linear; +inf when no user is outside the set
  bool infinite = false;
  double interference = 0.0;  // sum over outside users of rho/(M rho_t) + (rho/rho_t)^2 / L
  std::size_t set_size = 0;
  std::size_t effective_length = 0;
};

// Large-M, large-L limit of the target user's SINR.
LemmaSinr asymptotic_sinr(double rho_target, std::span<const double> outside_rho, std::size_t set_size,
                          std::size_t effective_length, std::size_t antennas);

// Same, for user 0 of `drop` at data block `block`. The estimated set is the
// target cell, plus the cooperative users when the block is detected
// cooperatively and that set is non-empty.
LemmaSinr asymptotic_sinr(const UserDrop& drop, const FrameConfig& config, std::size_t block, Scheme scheme);

// Whether block `block` of `drop` runs the cooperative path.
bool uses_cooperation(const UserDrop& drop, const FrameConfig& config, std::size_t block, Scheme scheme);

enum class VarianceForm { campbell, paper };
enum class StatsProvenance { analytic, learned, extrapolated, campbell_oracle };

std::string to_string(VarianceForm form);
std::string to_string(StatsProvenance provenance);
VarianceForm parse_variance_form(const std::string& name);

struct SinrStats {
  std::size_t block = 0;
  double mean = 0.0;
  double variance = 0.0;
  StatsProvenance provenance = StatsProvenance::analytic;
  std::optional<RegionSpec> region;
  // Upper bound on the mean mass beyond r_max (density at its upper bound).
  double tail_bound = 0.0;
};

// The region outside the estimated set for a block: the target hex for
// non-cooperative blocks, the cooperation disk otherwise. r_max is the
// layout's coverage radius, the same disk the user sampler draws from.
RegionSpec block_region(const NetworkLayout& layout, const FrameConfig& config, std::size_t block, Scheme scheme,
                        QuadratureOptions options = {});

// Mean and variance of the interference functional over SPPP drops. The
// paper form subtracts the squared mean and can come out negative.
SinrStats interference_stats(double rho_target, const DensityMap& density, const RegionSpec& region,
                             const FrameConfig& config, std::size_t block, std::size_t effective_length,
                             VarianceForm form = VarianceForm::campbell);

// Mean of |estimated set|: the planted target plus the users inside the
// complement of the region.
double expected_set_size(const DensityMap& density, const RegionSpec& region);

// Pr[gamma < threshold] for the Gaussian approximation of the interference.
double sinr_cdf(double threshold, const SinrStats& stats, double set_size, std::size_t effective_length);

struct RateEntry {
  std::size_t block = 0;
  double epsilon = 0.0;
  double threshold = 0.0;  // linear SINR
  double rate = 0.0;       // bits/s/Hz
};

struct RatePlan {
  double epsilon = 0.0;
  std::vector<RateEntry> entries;
};

// Throws NumericalError when V < 0 or Q^{-1}(eps) sqrt(V) + M <= 0.
RateEntry rate_threshold(const SinrStats& stats, double epsilon, double set_size, std::size_t effective_length);

struct CdfPoint {
  double threshold_db = 0.0;
  double probability = 0.0;
};

std::vector<CdfPoint> analytic_cdf(const SinrStats& stats, double set_size, std::size_t effective_length,
                                   std::span<const double> thresholds_db);
std::vector<CdfPoint> empirical_cdf(std::span<const double> samples_db, std::span<const double> thresholds_db);

// sup_x |F_n(x) - F(x)| for the empirical CDF of `samples` against `cdf`.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

double to_db(double linear);
double from_db(double db);

}  // namespace coopmimo
