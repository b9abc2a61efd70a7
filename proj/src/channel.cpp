#include "coopmimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "coopmimo/errors.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

void FrameConfig::validate() const {
  if (antennas < 1) throw ConfigError("antennas must be >= 1");
  if (pilot_length < 1) throw ConfigError("pilot length must be >= 1");
  if (block_lengths.empty()) throw ConfigError("need at least one data block");
  if (backhaul_delay > block_lengths.size()) throw ConfigError("backhaul delay must satisfy 0 <= d <= N");
  if (!(transmit_power > 0.0)) throw ConfigError("transmit power must be positive");
  if (!(noise_power >= 0.0)) throw ConfigError("noise power must be nonnegative");
  if (!(cooperation_radius >= 0.0)) throw ConfigError("cooperation radius must be nonnegative");
  if (!(pathloss_exponent > 0.0)) throw ConfigError("pathloss exponent must be positive");
  if (!(shadowing_std_db >= 0.0)) throw ConfigError("shadowing std must be nonnegative");
}

std::size_t FrameConfig::columns_through(std::size_t n) const {
  if (n > block_lengths.size()) throw ConfigError("block index out of range");
  std::size_t total = pilot_length;
  for (std::size_t m = 0; m < n; ++m) total += block_lengths[m];
  return total;
}

std::size_t FrameConfig::effective_length(std::size_t block, Scheme scheme) const {
  if (block < 1 || block > num_blocks()) throw ConfigError("block index out of range");
  const std::size_t i = block - 1;
  return cooperative(block, scheme) ? columns_through(i - backhaul_delay) : columns_through(i);
}

bool is_prime(std::size_t n) {
  if (n < 2) return false;
  for (std::size_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

PilotBook::PilotBook(std::size_t length, double power, std::vector<std::size_t> users_per_cell)
    : length_(length), power_(power), users_per_cell_(std::move(users_per_cell)) {
  if (!is_prime(length) || length < 3) throw ConfigError("pilot length must be an odd prime");
  if (users_per_cell_.size() > length - 1) throw ConfigError("more cells than distinct Zadoff-Chu roots");
  for (auto n : users_per_cell_) {
    if (n > length) throw ConfigError("cell has more users than orthogonal pilots");
  }
}

Eigen::RowVectorXcd PilotBook::pilot(std::size_t cell, std::size_t k) const {
  const auto L = static_cast<long long>(length_);
  const auto u = static_cast<long long>(root(cell));
  const double amp = std::sqrt(power_);
  Eigen::RowVectorXcd x(static_cast<Eigen::Index>(length_));
  for (long long n = 0; n < L; ++n) {
    const long long m = (n + static_cast<long long>(k)) % L;
    // u*m*(m+1) is reduced mod 2L to keep the phase argument small.
    const long long arg = (u * ((m * (m + 1)) % (2 * L))) % (2 * L);
    const double phase = -std::numbers::pi * static_cast<double>(arg) / static_cast<double>(L);
    x(n) = std::polar(amp, phase);
  }
  return x;
}

double PilotBook::max_correlation_error() const {
  const double L = static_cast<double>(length_);
  const double auto_ref = L * power_;
  const double cross_ref = std::sqrt(L) * power_;
  std::vector<Eigen::RowVectorXcd> all;
  std::vector<std::size_t> cell_of;
  for (std::size_t c = 0; c < users_per_cell_.size(); ++c) {
    for (std::size_t k = 0; k < users_per_cell_[c]; ++k) {
      all.push_back(pilot(c, k));
      cell_of.push_back(c);
    }
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < all.size(); ++a) {
    for (std::size_t b = a; b < all.size(); ++b) {
      const double mag = std::abs(all[a].dot(all[b]));  // dot conjugates the first argument
      double target;
      if (a == b) {
        target = auto_ref;
      } else if (cell_of[a] == cell_of[b]) {
        target = 0.0;
      } else {
        target = cross_ref;
      }
      worst = std::max(worst, std::abs(mag - target) / auto_ref);
    }
  }
  return worst;
}

PilotBook build_pilot_book(const FrameConfig& config, const UserDrop& drop) {
  std::vector<std::size_t> counts;
  for (const auto& c : drop.cells) counts.push_back(c.size());
  return PilotBook(config.pilot_length, config.transmit_power, std::move(counts));
}

ChannelRealization sample_channels(const FrameConfig& config, const UserDrop& drop, const PilotBook& pilots,
                                   std::uint64_t seed) {
  config.validate();
  const auto M = static_cast<Eigen::Index>(config.antennas);
  const auto U = static_cast<Eigen::Index>(drop.size());
  const auto Lp = static_cast<Eigen::Index>(config.pilot_length);
  const auto total = static_cast<Eigen::Index>(config.total_columns());
  Rng rng(seed);
  std::normal_distribution<double> unit(0.0, std::sqrt(0.5));
  auto draw = [&](CMatrix& m, double scale) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        const double re = unit(rng);
        const double im = unit(rng);
        m(r, c) = scale * cdouble(re, im);
      }
    }
  };

  ChannelRealization out;
  out.channels.resize(M, U);
  draw(out.channels, 1.0);
  for (Eigen::Index u = 0; u < U; ++u) out.channels.col(u) *= std::sqrt(drop.rho(u, 0));

  out.symbols.resize(U, total);
  for (Eigen::Index u = 0; u < U; ++u) {
    const auto& user = drop.users[static_cast<std::size_t>(u)];
    out.symbols.row(u).head(Lp) = pilots.pilot(user.cell, user.in_cell_index);
  }
  CMatrix data(U, total - Lp);
  draw(data, std::sqrt(config.transmit_power));
  out.symbols.rightCols(total - Lp) = data;

  out.noise.resize(M, total);
  draw(out.noise, std::sqrt(config.noise_power));
  return out;
}

namespace {

std::pair<Eigen::Index, Eigen::Index> column_span(const FrameConfig& config, std::size_t first, std::size_t last) {
  if (first > last || last > config.num_blocks()) throw ConfigError("block range out of bounds");
  const auto start = static_cast<Eigen::Index>(config.block_offset(first));
  const auto stop = static_cast<Eigen::Index>(config.columns_through(last));
  return {start, stop - start};
}

}  // namespace

CMatrix received_signal(const ChannelRealization& r, const FrameConfig& config, std::size_t first, std::size_t last) {
  const auto [start, width] = column_span(config, first, last);
  return r.channels * r.symbols.middleCols(start, width) + r.noise.middleCols(start, width);
}

CMatrix received_signal(const ChannelRealization& r, const FrameConfig& config, std::size_t first, std::size_t last,
                        std::span<const std::size_t> users) {
  const auto [start, width] = column_span(config, first, last);
  CMatrix y = r.noise.middleCols(start, width);
  for (auto u : users) {
    const auto i = static_cast<Eigen::Index>(u);
    y.noalias() += r.channels.col(i) * r.symbols.row(i).segment(start, width);
  }
  return y;
}

}  // namespace coopmimo
