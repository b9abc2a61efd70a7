#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "coopmimo/geometry.hpp"

namespace coopmimo {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using cdouble = std::complex<double>;

// Constant added to the estimator's regularizer for thermal noise.
//   physical: M * sigma_z^2, the value that makes Q_in the exact LMMSE solution.
//   literal:  |Phi| * sigma_z^2 in the estimator and no noise in the error
//             covariance, as the estimator is printed in the source model.
enum class EstimatorNoise { physical, literal };

enum class Scheme { proposed, baseline };

// Frame structure and radio constants. Symbols (pilot and data) carry power
// `transmit_power` per symbol; noise has variance `noise_power` per element.
struct FrameConfig {
  std::size_t antennas = 200;
  std::size_t pilot_length = 31;
  std::vector<std::size_t> block_lengths{100, 100, 100, 100, 100};
  std::size_t backhaul_delay = 1;
  double cooperation_radius = 700.0;
  double transmit_power = 0.19952623149688797;   // 23 dBm
  double noise_power = 1.9905358527674863e-14;   // -174 dBm/Hz over 5 MHz
  double pathloss_exponent = 3.76;
  double shadowing_std_db = 3.0;
  EstimatorNoise estimator_noise = EstimatorNoise::physical;

  void validate() const;

  std::size_t num_blocks() const { return block_lengths.size(); }
  // L_p + B_1 + ... + B_n: symbols from the pilot through block n.
  std::size_t columns_through(std::size_t n) const;
  std::size_t total_columns() const { return columns_through(num_blocks()); }
  // First column of block b (block 0 is the pilot).
  std::size_t block_offset(std::size_t b) const { return b == 0 ? 0 : columns_through(b - 1); }
  std::size_t block_width(std::size_t b) const { return b == 0 ? pilot_length : block_lengths.at(b - 1); }

  // Whether data block `block` (1-based) is detected with cooperation.
  bool cooperative(std::size_t block, Scheme scheme) const {
    return scheme == Scheme::proposed && block - 1 >= backhaul_delay;
  }
  // |Phi|-normaliser length for block `block`: L_{i} or L'_{i} with i = block - 1.
  std::size_t effective_length(std::size_t block, Scheme scheme) const;

  PropagationParams propagation() const {
    return {pathloss_exponent, shadowing_std_db, pilot_length};
  }
};

// Cyclic shifts of one Zadoff-Chu root per cell, amplitude sqrt(P).
class PilotBook {
 public:
  PilotBook(std::size_t length, double power, std::vector<std::size_t> users_per_cell);

  std::size_t length() const { return length_; }
  std::size_t num_cells() const { return users_per_cell_.size(); }
  std::size_t root(std::size_t cell) const { return cell + 1; }
  Eigen::RowVectorXcd pilot(std::size_t cell, std::size_t k) const;

  // Maximum deviation from the two correlation invariants, relative to L_p*P.
  double max_correlation_error() const;

 private:
  std::size_t length_;
  double power_;
  std::vector<std::size_t> users_per_cell_;
};

bool is_prime(std::size_t n);

PilotBook build_pilot_book(const FrameConfig& config, const UserDrop& drop);

// Channels to the target BS, transmitted symbols and noise for one frame.
struct ChannelRealization {
  CMatrix channels;  // M x U, column u ~ CN(0, rho_u I)
  CMatrix symbols;   // U x (L_p + L); pilot columns first
  CMatrix noise;     // M x (L_p + L)
};

ChannelRealization sample_channels(const FrameConfig& config, const UserDrop& drop, const PilotBook& pilots,
                                   std::uint64_t seed);

// Y^{m,n}: columns of blocks first..last (inclusive) summed over all users.
CMatrix received_signal(const ChannelRealization& realization, const FrameConfig& config, std::size_t first,
                        std::size_t last);
// Same, restricted to a user subset; noise is always included.
CMatrix received_signal(const ChannelRealization& realization, const FrameConfig& config, std::size_t first,
                        std::size_t last, std::span<const std::size_t> users);

}  // namespace coopmimo
