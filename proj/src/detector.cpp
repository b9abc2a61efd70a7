#include "coopmimo/detector.hpp"

#include <cmath>
#include <random>

#include "coopmimo/errors.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

namespace {

CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }

double estimator_noise(const FrameConfig& config, std::size_t set_size) {
  const double n = config.estimator_noise == EstimatorNoise::physical ? static_cast<double>(config.antennas)
                                                                      : static_cast<double>(set_size);
  return n * config.noise_power;
}

double error_noise(const FrameConfig& config) {
  return config.estimator_noise == EstimatorNoise::physical
             ? static_cast<double>(config.antennas) * config.noise_power
             : 0.0;
}

// beta of Psi: unestimated power + estimation-error power + noise/P.
double regularizer(double out_power, double cell_error, double coop_error, const FrameConfig& config) {
  return out_power + cell_error + coop_error + config.noise_power / config.transmit_power;
}

Detection detect(CMatrix stacked, double beta, Eigen::Index cell_rows, const CMatrix& received_block) {
  if (received_block.rows() != stacked.rows()) throw ConfigError("detector: received block has wrong row count");
  RegularizedInverse psi(std::move(stacked), beta);
  CMatrix symbols = psi.detector_rows().topRows(cell_rows) * received_block;
  return {std::move(symbols), std::move(psi)};
}

}  // namespace

RegularizedInverse::RegularizedInverse(CMatrix columns, double beta) : g_(std::move(columns)), beta_(beta) {
  CMatrix gram = g_.adjoint() * g_;
  gram.diagonal().array() += beta_;
  gram_.compute(gram);
  if (gram_.info() != Eigen::Success) throw NumericalError("Psi: Gram matrix is not positive definite");
}

CMatrix RegularizedInverse::times_columns() const {
  // Psi G = G (G^H G + beta I)^{-1}; the Gram inverse is Hermitian.
  return g_ * gram_.solve(identity(g_.cols()));
}

CMatrix RegularizedInverse::detector_rows() const { return gram_.solve(g_.adjoint()); }

CMatrix RegularizedInverse::dense() const {
  CMatrix full = g_ * g_.adjoint();
  full.diagonal().array() += beta_;
  Eigen::LLT<CMatrix> llt(full);
  if (llt.info() != Eigen::Success) throw NumericalError("Psi: matrix is not positive definite");
  return llt.solve(identity(full.rows()));
}

Eigen::VectorXd ChannelEstimate::error_coefficients(std::size_t antennas) const {
  return error_covariance.diagonal().real() / static_cast<double>(antennas);
}

ChannelEstimate estimate_in_cell(const CMatrix& received, const CMatrix& symbols, const Eigen::VectorXd& rho,
                                 double out_of_cell_power, const FrameConfig& config) {
  const auto M = static_cast<double>(config.antennas);
  const Eigen::Index K = symbols.rows();
  if (received.rows() != static_cast<Eigen::Index>(config.antennas) || received.cols() != symbols.cols() ||
      rho.size() != K) {
    throw ConfigError("estimate_in_cell: dimension mismatch");
  }
  if ((rho.array() <= 0.0).any()) throw ConfigError("estimate_in_cell: rho must be positive");
  const double interference = M * config.transmit_power * out_of_cell_power;
  const double c_est = interference + estimator_noise(config, static_cast<std::size_t>(K));
  const double c_err = interference + error_noise(config);
  if (!(c_est > 0.0) || !(c_err > 0.0)) {
    throw NumericalError("estimate_in_cell: no interference or noise regularizes the estimator");
  }

  const CMatrix gram = symbols * symbols.adjoint();
  const Eigen::VectorXd r_inv = (M * rho).cwiseInverse();

  // Q = [X^H R X + c I]^{-1} X^H R = X^H [X X^H + c R^{-1}]^{-1}.
  CMatrix system = gram;
  system.diagonal() += (c_est * r_inv).cast<cdouble>();
  Eigen::LLT<CMatrix> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("estimate_in_cell: singular system matrix");

  ChannelEstimate out;
  out.estimator = llt.solve(symbols).adjoint();
  out.estimate = received * out.estimator;
  out.error_precision = gram / c_err;
  out.error_precision.diagonal() += r_inv.cast<cdouble>();
  Eigen::LLT<CMatrix> prec(out.error_precision);
  if (prec.info() != Eigen::Success) throw NumericalError("estimate_in_cell: error precision not positive definite");
  out.error_covariance = prec.solve(identity(K));
  return out;
}

Detection detect_block_in(const CMatrix& estimate, const Eigen::VectorXd& error_coefficients,
                          double out_of_cell_power, const FrameConfig& config, const CMatrix& received_block) {
  if (error_coefficients.size() != estimate.cols()) throw ConfigError("detect_block_in: dimension mismatch");
  const double beta = regularizer(out_of_cell_power, error_coefficients.sum(), 0.0, config);
  return detect(estimate, beta, estimate.cols(), received_block);
}

CMatrix cancel_residual(const CMatrix& received, const CMatrix& estimate, const CMatrix& symbols) {
  if (estimate.cols() != symbols.rows() || received.cols() != symbols.cols() || received.rows() != estimate.rows()) {
    throw ConfigError("cancel_residual: dimension mismatch");
  }
  return received - estimate * symbols;
}

ChannelEstimate estimate_interferers(const CMatrix& residual, const CMatrix& coop_symbols,
                                     const Eigen::VectorXd& rho_coop, const CMatrix& cell_symbols,
                                     const ChannelEstimate& in_cell, double out_of_coop_power,
                                     const FrameConfig& config) {
  const auto M = static_cast<double>(config.antennas);
  const Eigen::Index Kc = coop_symbols.rows();
  const Eigen::Index K = cell_symbols.rows();
  const Eigen::Index L = residual.cols();
  ChannelEstimate out;
  if (Kc == 0) {
    out.estimate = CMatrix::Zero(residual.rows(), 0);
    out.estimator = CMatrix::Zero(L, 0);
    out.error_covariance = CMatrix::Zero(0, 0);
    out.error_precision = CMatrix::Zero(0, 0);
    return out;
  }
  if (coop_symbols.cols() != L || cell_symbols.cols() != L || rho_coop.size() != Kc ||
      in_cell.error_precision.rows() != K) {
    throw ConfigError("estimate_interferers: dimension mismatch");
  }
  if ((rho_coop.array() <= 0.0).any()) throw ConfigError("estimate_interferers: rho must be positive");
  const double c = M * config.transmit_power * out_of_coop_power + estimator_noise(config, static_cast<std::size_t>(Kc));
  if (!(c > 0.0)) throw NumericalError("estimate_interferers: no interference or noise regularizes the estimator");

  // W = X_c^H R_c X_c + c I + X_1^H E X_1 = c I + G^H D G with G = [X_c; X_1],
  // D = blkdiag(R_c, E). Then Q_co = W^{-1} X_c^H R_c = G^H (c D^{-1} + G G^H)^{-1} [I; 0].
  CMatrix stacked(Kc + K, L);
  stacked.topRows(Kc) = coop_symbols;
  stacked.bottomRows(K) = cell_symbols;
  CMatrix system = stacked * stacked.adjoint();
  system.topLeftCorner(Kc, Kc).diagonal() += (c / M * rho_coop.cwiseInverse()).cast<cdouble>();
  system.bottomRightCorner(K, K) += c * in_cell.error_precision;
  Eigen::LLT<CMatrix> llt(system);
  if (llt.info() != Eigen::Success) throw NumericalError("estimate_interferers: singular system matrix");

  out.estimator = llt.solve(stacked).topRows(Kc).adjoint();
  out.estimate = residual * out.estimator;
  // (D^{-1} + G G^H / c)^{-1} = c (c D^{-1} + G G^H)^{-1}; keep the interferer block.
  CMatrix selector = CMatrix::Zero(Kc + K, Kc);
  selector.topRows(Kc) = identity(Kc);
  out.error_covariance = c * llt.solve(selector).topRows(Kc);
  out.error_covariance = 0.5 * (out.error_covariance + out.error_covariance.adjoint()).eval();
  Eigen::LLT<CMatrix> cov(out.error_covariance);
  if (cov.info() != Eigen::Success) throw NumericalError("estimate_interferers: error covariance not positive definite");
  out.error_precision = cov.solve(identity(Kc));
  return out;
}

Detection detect_block_co(const CMatrix& cell_estimate, const CMatrix& coop_estimate,
                          const Eigen::VectorXd& cell_error_coefficients,
                          const Eigen::VectorXd& coop_error_coefficients, double out_of_coop_power,
                          const FrameConfig& config, const CMatrix& received_block) {
  if (cell_error_coefficients.size() != cell_estimate.cols() ||
      coop_error_coefficients.size() != coop_estimate.cols() || cell_estimate.rows() != coop_estimate.rows()) {
    throw ConfigError("detect_block_co: dimension mismatch");
  }
  CMatrix stacked(cell_estimate.rows(), cell_estimate.cols() + coop_estimate.cols());
  stacked << cell_estimate, coop_estimate;
  const double beta =
      regularizer(out_of_coop_power, cell_error_coefficients.sum(), coop_error_coefficients.sum(), config);
  return detect(std::move(stacked), beta, cell_estimate.cols(), received_block);
}

BlockSinrRecord make_record(std::size_t block, double signal, InterferenceTerms terms, DetectionMode mode) {
  BlockSinrRecord rec;
  rec.block = block;
  rec.signal = signal;
  rec.terms = terms;
  rec.mode = mode;
  const double denom = terms.total();
  if (denom > 0.0) {
    rec.sinr = signal / denom;
  } else {
    rec.sinr = kSinrCap;
    rec.capped = true;
  }
  return rec;
}

BlockSinrRecord sinr_decomposition(const DetectorState& state, const UserDrop& drop,
                                   const ChannelRealization& realization, const FrameConfig& config,
                                   SinrEvaluation evaluation) {
  const CVector w = state.target_row();
  const CMatrix& est = state.estimates;
  const CVector g = est.adjoint() * w;  // g_k = conj(w^H hhat_k)
  const double wn = w.squaredNorm();

  InterferenceTerms terms;
  const double signal = std::norm(g(0));
  for (Eigen::Index k = 1; k < g.size(); ++k) terms.intra += std::norm(g(k));
  terms.noise = wn * config.noise_power / config.transmit_power;

  if (evaluation == SinrEvaluation::model) {
    terms.estimation_error = wn * state.error_coefficients.sum();
    terms.inter = wn * state.out_of_set_power;
    return make_record(state.block, signal, terms, state.mode);
  }

  // Every row of Hhat is y_r G with y_r = sum_u h_{r,u} x_u + z_r, so the
  // channels and the estimates are jointly Gaussian given the symbols.
  const auto L = static_cast<Eigen::Index>(state.observed_columns);
  const CMatrix& G = state.estimator_map;
  const CMatrix T = realization.symbols.leftCols(L) * G;  // U x K
  const Eigen::VectorXd rho = drop.rho.col(0);
  CMatrix C = T.adjoint() * rho.cast<cdouble>().asDiagonal() * T;
  C += config.noise_power * (G.adjoint() * G);
  Eigen::LLT<CMatrix> llt(C);
  if (llt.info() != Eigen::Success) throw NumericalError("sinr_decomposition: estimate covariance is singular");
  const CVector Tz = T * llt.solve(g);
  const CMatrix S = llt.solve(T.adjoint());  // K x U

  std::vector<Eigen::Index> column_of(drop.size(), -1);
  for (std::size_t k = 0; k < state.estimated_users.size(); ++k) {
    column_of[state.estimated_users[k]] = static_cast<Eigen::Index>(k);
  }
  for (Eigen::Index u = 0; u < static_cast<Eigen::Index>(drop.size()); ++u) {
    const double r = rho(u);
    const double var = std::max(0.0, r - r * r * (T.row(u) * S.col(u))(0).real());
    const cdouble mean = r * Tz(u);  // conj of w^H E[h_u | Hhat]
    const Eigen::Index k = column_of[static_cast<std::size_t>(u)];
    if (k >= 0) {
      terms.estimation_error += std::norm(g(k) - mean) + wn * var;
    } else {
      terms.inter += std::norm(mean) + wn * var;
    }
  }
  return make_record(state.block, signal, terms, state.mode);
}

FrameResult run_frame(const UserDrop& drop, const FrameConfig& config, const ChannelRealization& realization,
                      Scheme scheme, const DetectorOptions& options) {
  config.validate();
  const UserPartition part =
      partition_users(drop, scheme == Scheme::proposed ? std::optional<double>(config.cooperation_radius) : std::nullopt);
  if (part.in_cell.empty()) throw ConfigError("run_frame: the target cell has no users");
  const auto M = static_cast<Eigen::Index>(config.antennas);
  const auto K = static_cast<Eigen::Index>(part.in_cell.size());
  const auto Kc = static_cast<Eigen::Index>(part.cooperative.size());
  if (realization.channels.rows() != M || realization.channels.cols() != static_cast<Eigen::Index>(drop.size())) {
    throw ConfigError("run_frame: realization does not match drop/config");
  }

  auto rho_of = [&](const std::vector<std::size_t>& users) {
    Eigen::VectorXd r(static_cast<Eigen::Index>(users.size()));
    for (std::size_t k = 0; k < users.size(); ++k) r(static_cast<Eigen::Index>(k)) = drop.rho_target(users[k]);
    return r;
  };
  const Eigen::VectorXd rho_in = rho_of(part.in_cell);
  const Eigen::VectorXd rho_co = rho_of(part.cooperative);
  double out_cell = 0.0;
  for (std::size_t u = 0; u < drop.size(); ++u) {
    if (drop.users[u].cell != 0) out_cell += drop.rho_target(u);
  }
  double out_coop = 0.0;
  for (auto u : part.outside) out_coop += drop.rho_target(u);
  out_cell = options.assumed_out_of_cell_power.value_or(out_cell);
  out_coop = options.assumed_out_of_coop_power.value_or(out_coop);

  const CMatrix Y = realization.channels * realization.symbols + realization.noise;

  // Reconstructed symbols used as extended pilots (genie-aided by default).
  auto gather = [&](const std::vector<std::size_t>& users) {
    CMatrix x(static_cast<Eigen::Index>(users.size()), realization.symbols.cols());
    for (std::size_t k = 0; k < users.size(); ++k) {
      x.row(static_cast<Eigen::Index>(k)) = realization.symbols.row(static_cast<Eigen::Index>(users[k]));
    }
    return x;
  };
  CMatrix x_cell = gather(part.in_cell);
  CMatrix x_coop = gather(part.cooperative);
  if (options.symbol_error_rate > 0.0) {
    Rng rng(options.symbol_error_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto Lp = static_cast<Eigen::Index>(config.pilot_length);
    for (CMatrix* x : {&x_cell, &x_coop}) {
      for (Eigen::Index r = 0; r < x->rows(); ++r) {
        for (Eigen::Index c = Lp; c < x->cols(); ++c) {
          if (unit(rng) < options.symbol_error_rate) (*x)(r, c) = complex_normal(rng, config.transmit_power);
        }
      }
    }
  }

  std::vector<std::size_t> in_cell_and_coop = part.in_cell;
  in_cell_and_coop.insert(in_cell_and_coop.end(), part.cooperative.begin(), part.cooperative.end());

  FrameResult result;
  for (std::size_t block = 1; block <= config.num_blocks(); ++block) {
    const std::size_t i = block - 1;
    const auto Li = static_cast<Eigen::Index>(config.columns_through(i));
    const auto offset = static_cast<Eigen::Index>(config.block_offset(block));
    const auto width = static_cast<Eigen::Index>(config.block_width(block));
    const CMatrix y_block = Y.middleCols(offset, width);

    const ChannelEstimate cell =
        estimate_in_cell(Y.leftCols(Li), x_cell.leftCols(Li), rho_in, out_cell, config);
    const Eigen::VectorXd dr_cell = cell.error_coefficients(config.antennas);

    const bool coop = config.cooperative(block, scheme) && Kc > 0;
    if (!coop) {
      Detection det = detect_block_in(cell.estimate, dr_cell, out_cell, config, y_block);
      DetectorState state{block,        DetectionMode::non_cooperative, part.in_cell, part.in_cell.size(),
                          cell.estimate, dr_cell,                       cell.estimator, static_cast<std::size_t>(Li),
                          out_cell,     std::move(det.symbols),         std::move(det.psi)};
      result.records.push_back(sinr_decomposition(state, drop, realization, config, options.evaluation));
      if (options.keep_states) result.states.push_back(std::move(state));
      continue;
    }

    const auto Lco = static_cast<Eigen::Index>(config.columns_through(i - config.backhaul_delay));
    const CMatrix x_cell_co = x_cell.leftCols(Lco);
    const CMatrix residual = cancel_residual(Y.leftCols(Lco), cell.estimate, x_cell_co);
    const ChannelEstimate inter =
        estimate_interferers(residual, x_coop.leftCols(Lco), rho_co, x_cell_co, cell, out_coop, config);
    const Eigen::VectorXd dr_coop = inter.error_coefficients(config.antennas);
    Detection det = detect_block_co(cell.estimate, inter.estimate, dr_cell, dr_coop, out_coop, config, y_block);

    // Hhat_intf = (Y^{0,i-d} - Y^{0,i} Q_in X_1^{0,i-d}) Q_co, again linear in Y^{0,i}.
    CMatrix map(Li, K + Kc);
    map.leftCols(K) = cell.estimator;
    map.rightCols(Kc) = -cell.estimator * (x_cell_co * inter.estimator);
    map.topRightCorner(Lco, Kc) += inter.estimator;
    CMatrix estimates(M, K + Kc);
    estimates << cell.estimate, inter.estimate;
    Eigen::VectorXd dr(K + Kc);
    dr << dr_cell, dr_coop;

    DetectorState state{block,         DetectionMode::cooperative, in_cell_and_coop, part.in_cell.size(),
                        std::move(estimates), std::move(dr),       std::move(map),   static_cast<std::size_t>(Li),
                        out_coop,      std::move(det.symbols),     std::move(det.psi)};
    result.records.push_back(sinr_decomposition(state, drop, realization, config, options.evaluation));
    if (options.keep_states) result.states.push_back(std::move(state));
  }
  return result;
}

FrameResult run_frame(const UserDrop& drop, const FrameConfig& config, Scheme scheme, std::uint64_t seed,
                      const DetectorOptions& options) {
  const PilotBook pilots = build_pilot_book(config, drop);
  const ChannelRealization realization = sample_channels(config, drop, pilots, seed);
  return run_frame(drop, config, realization, scheme, options);
}

}  // namespace coopmimo
