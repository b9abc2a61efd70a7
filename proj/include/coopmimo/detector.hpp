#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "coopmimo/channel.hpp"
#include "coopmimo/geometry.hpp"

namespace coopmimo {

// Psi = (G G^H + beta I)^{-1} for an M x K matrix G of estimated channels.
// Products with G go through the K x K Gram factorization; the M x M matrix
// is only formed by dense().
class RegularizedInverse {
 public:
  RegularizedInverse(CMatrix columns, double beta);

  const CMatrix& columns() const { return g_; }
  double beta() const { return beta_; }
  Eigen::Index dimension() const { return g_.rows(); }

  CMatrix times_columns() const;  // Psi G = G (G^H G + beta I)^{-1}
  CMatrix detector_rows() const;  // G^H Psi = (G^H G + beta I)^{-1} G^H
  CMatrix dense() const;

 private:
  CMatrix g_;
  double beta_;
  Eigen::LLT<CMatrix> gram_;
};

struct ChannelEstimate {
  CMatrix estimate;          // M x K
  CMatrix estimator;         // Q, L x K: estimate = received * Q
  CMatrix error_covariance;  // K x K, E[dH^H dH]
  CMatrix error_precision;   // inverse of error_covariance

  // dR_j = E[dh_j dh_j^H] = (error_covariance_jj / M) I.
  Eigen::VectorXd error_coefficients(std::size_t antennas) const;
};

struct Detection {
  CMatrix symbols;  // detected symbols of the target-cell users, K x B
  RegularizedInverse psi;
};

// Data-assisted LMMSE estimate of the target-cell channels from Y^{0,i}
// (M x L_i) and the known pilot+data symbols X_1^{0,i} (K x L_i).
// `out_of_cell_power` is the sum of rho over every user outside the cell.
ChannelEstimate estimate_in_cell(const CMatrix& received, const CMatrix& symbols, const Eigen::VectorXd& rho,
                                 double out_of_cell_power, const FrameConfig& config);

Detection detect_block_in(const CMatrix& estimate, const Eigen::VectorXd& error_coefficients,
                          double out_of_cell_power, const FrameConfig& config, const CMatrix& received_block);

// Y_intf = Y^{0,i-d} - Hhat_1 X_1^{0,i-d}.
CMatrix cancel_residual(const CMatrix& received, const CMatrix& estimate, const CMatrix& symbols);

// LMMSE estimate of the cooperative interferers' channels from the residual.
// `cell_symbols` is X_1^{0,i-d}; the in-cell estimate supplies E[dH^H dH].
// An empty cooperative set yields an M x 0 estimate.
ChannelEstimate estimate_interferers(const CMatrix& residual, const CMatrix& coop_symbols,
                                     const Eigen::VectorXd& rho_coop, const CMatrix& cell_symbols,
                                     const ChannelEstimate& in_cell, double out_of_coop_power,
                                     const FrameConfig& config);

Detection detect_block_co(const CMatrix& cell_estimate, const CMatrix& coop_estimate,
                          const Eigen::VectorXd& cell_error_coefficients,
                          const Eigen::VectorXd& coop_error_coefficients, double out_of_coop_power,
                          const FrameConfig& config, const CMatrix& received_block);

enum class DetectionMode { non_cooperative, cooperative };

// How the expectations in the SINR denominator are evaluated.
//   model:             E|v^H h|^2 = rho |v|^2 for every unestimated channel and
//                      dR_j |v|^2 for every estimation error.
//   exact_conditional: Gaussian posterior of every channel given the estimates,
//                      which keeps the pilot-contamination correlation.
enum class SinrEvaluation { model, exact_conditional };

struct InterferenceTerms {
  double intra = 0.0;
  double estimation_error = 0.0;
  double inter = 0.0;
  double noise = 0.0;

  double total() const { return intra + estimation_error + inter + noise; }
};

inline constexpr double kSinrCap = 1e15;

struct BlockSinrRecord {
  std::size_t block = 0;
  double sinr = 0.0;
  double signal = 0.0;
  InterferenceTerms terms;
  DetectionMode mode = DetectionMode::non_cooperative;
  bool capped = false;  // zero denominator; sinr holds kSinrCap
};

BlockSinrRecord make_record(std::size_t block, double signal, InterferenceTerms terms, DetectionMode mode);

// Everything the detector knows when it detects block `block`.
struct DetectorState {
  std::size_t block = 0;  // 1-based; iteration i = block - 1
  DetectionMode mode = DetectionMode::non_cooperative;
  std::vector<std::size_t> estimated_users;  // drop indices, target user first
  std::size_t in_cell_count = 0;
  CMatrix estimates;                   // M x |estimated_users|
  Eigen::VectorXd error_coefficients;  // dR per estimated column
  CMatrix estimator_map;               // estimates = Y^{0,i} * estimator_map
  std::size_t observed_columns = 0;    // L_i
  double out_of_set_power = 0.0;       // sum of rho over unestimated users
  CMatrix detected;                    // target-cell symbols of this block
  RegularizedInverse psi;

  CVector target_row() const { return psi.times_columns().col(0); }
};

BlockSinrRecord sinr_decomposition(const DetectorState& state, const UserDrop& drop,
                                   const ChannelRealization& realization, const FrameConfig& config,
                                   SinrEvaluation evaluation);

struct DetectorOptions {
  SinrEvaluation evaluation = SinrEvaluation::exact_conditional;
  // Probability that a reconstructed data symbol is replaced by a fresh draw.
  double symbol_error_rate = 0.0;
  std::uint64_t symbol_error_seed = 0;
  // Mismatched statistics: replace the true sums of rho outside the cell and
  // outside the cooperative set.
  std::optional<double> assumed_out_of_cell_power;
  std::optional<double> assumed_out_of_coop_power;
  bool keep_states = false;
};

struct FrameResult {
  std::vector<BlockSinrRecord> records;  // one per data block
  std::vector<DetectorState> states;     // filled when keep_states is set
};

FrameResult run_frame(const UserDrop& drop, const FrameConfig& config, const ChannelRealization& realization,
                      Scheme scheme, const DetectorOptions& options = {});
FrameResult run_frame(const UserDrop& drop, const FrameConfig& config, Scheme scheme, std::uint64_t seed,
                      const DetectorOptions& options = {});

}  // namespace coopmimo
