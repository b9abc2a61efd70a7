// End-to-end acceptance run: one PASS/FAIL line per criterion.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coopmimo/analysis.hpp"
#include "coopmimo/channel.hpp"
#include "coopmimo/detector.hpp"
#include "coopmimo/errors.hpp"
#include "coopmimo/geometry.hpp"
#include "coopmimo/harness.hpp"
#include "coopmimo/learning.hpp"
#include "coopmimo/quadrature.hpp"
#include "coopmimo/rng.hpp"

using namespace coopmimo;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
double rel_err(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

int report(int id, const std::string& name, Outcome& o) {
  std::cout << "CRITERION " << id << " " << (o.pass ? "PASS" : "FAIL") << " " << name << ":" << o.detail.str()
            << std::endl;
  return o.pass ? 0 : 1;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.finalize();
  return c;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> csv_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string f;
  while (std::getline(in, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Criteria 1 and 2 share one paired simulation of both schemes.
struct SimulationRun {
  std::vector<double> distances;
  std::vector<std::vector<TrialRecords>> trials;
  double seconds = 0.0;
};

SimulationRun run_simulation() {
  auto config = default_config();
  config.mode = SchemeSelection::both;
  SimulationRun run;
  run.distances = {100.0, 300.0, 400.0};
  config.target_distances = run.distances;
  config.finalize();
  const auto start = Clock::now();
  for (std::size_t d = 0; d < run.distances.size(); ++d) {
    run.trials.push_back(simulate_trials(config, run.distances[d], d));
  }
  run.seconds = seconds_since(start);
  return run;
}

int criterion1(const SimulationRun& run) {
  Outcome o;
  const auto config = default_config();
  const std::size_t block = 5;
  for (std::size_t d = 0; d < run.distances.size(); ++d) {
    const auto point = analyze_point(config, run.distances[d], block, Scheme::proposed, VarianceForm::campbell);
    std::vector<double> samples;
    for (const auto& t : run.trials[d]) samples.push_back(t.lemma.at(Scheme::proposed).at(block - 1).sinr);
    const double ks = ks_distance(samples, [&](double x) {
      return sinr_cdf(x, point.stats, point.set_size, point.effective_length);
    });
    o.detail << " KS(" << run.distances[d] << " m)=" << fmt("%.4f", ks);
    o.require(ks <= 0.05, "KS at " + fmt("%g", run.distances[d]) + " m");
  }
  o.detail << " runtime=" << fmt("%.1f", run.seconds) << " s (both schemes, 3 placements, 500 trials)";
  o.require(run.seconds <= 600.0, "runtime");
  return report(1, "analytic vs Monte Carlo SINR CDF", o);
}

int criterion2(const SimulationRun& run) {
  Outcome o;
  const auto config = default_config();
  const auto grid = config.cdf_grid_db();
  auto sinr_db = [&](std::size_t d, Scheme s, std::size_t block) {
    std::vector<double> v;
    for (const auto& t : run.trials[d]) v.push_back(to_db(t.detector.at(s).at(block - 1).sinr));
    return v;
  };
  double worst = -1.0;
  for (std::size_t d = 0; d < run.distances.size(); ++d) {
    for (std::size_t block = 2; block <= config.frame.num_blocks(); ++block) {
      const auto p = empirical_cdf(sinr_db(d, Scheme::proposed, block), grid);
      const auto b = empirical_cdf(sinr_db(d, Scheme::baseline, block), grid);
      for (std::size_t k = 0; k < grid.size(); ++k) worst = std::max(worst, p[k].probability - b[k].probability);
    }
  }
  o.detail << " max(F_proposed - F_baseline)=" << fmt("%.4f", worst);
  o.require(worst <= 0.01, "dominance");
  auto gain = [&](std::size_t d) {
    return median(sinr_db(d, Scheme::proposed, 3)) - median(sinr_db(d, Scheme::baseline, 3));
  };
  const double center = gain(0);
  const double edge = gain(2);
  o.detail << " block-3 median gain: 100 m=" << fmt("%.2f", center) << " dB, 400 m=" << fmt("%.2f", edge) << " dB";
  o.require(edge > center, "edge gain above center gain");
  o.require(edge >= 2.0, "edge gain >= 2 dB");
  o.require(center >= 0.3, "center gain >= 0.3 dB");
  return report(2, "cooperative gain ordering", o);
}

int criterion3() {
  Outcome o;
  const auto config = default_config();
  const double r = 50.0;
  const DropSource source = make_drop_source(config, r, 0, stream::kLearn);
  CampaignConfig campaign;
  campaign.frame = config.frame;
  campaign.scheme = Scheme::proposed;
  campaign.iterations = 2000;
  campaign.seed = config.seed;
  const auto result = run_learning_campaign(source, campaign);
  for (std::size_t block : campaign.blocks) {
    const auto ref = analyze_point(config, r, block, Scheme::proposed, VarianceForm::campbell);
    for (std::size_t n : {std::size_t{200}, std::size_t{2000}}) {
      const TracePoint* hit = nullptr;
      for (const auto& p : result.trace) {
        if (p.n == n && p.block == block) hit = &p;
      }
      const double em = std::abs(hit->mean / ref.stats.mean - 1.0);
      const double ev = std::abs(*hit->variance / ref.stats.variance - 1.0);
      const double tm = n == 200 ? 0.10 : 0.03;
      const double tv = n == 200 ? 0.25 : 0.10;
      o.detail << " b" << block << "@" << n << ":" << fmt("%.3f", em) << "/" << fmt("%.3f", ev);
      o.require(em <= tm, "mean block " + std::to_string(block) + " n=" + std::to_string(n));
      o.require(ev <= tv, "variance block " + std::to_string(block) + " n=" + std::to_string(n));
    }
  }
  return report(3, "learner convergence (relative mean/variance error)", o);
}

int criterion4() {
  Outcome o;
  FrameConfig frame;
  const std::size_t length = frame.effective_length(5, Scheme::proposed);
  const double M = static_cast<double>(frame.antennas);
  const double L = static_cast<double>(length);
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> log_rho(-12.0, -6.0);
  std::uniform_real_distribution<double> log_coef(-1.0, 1.0);

  // Evaluated in extended precision so that the inputs are correctly rounded.
  struct Model {
    double a, b, v2, v3, v4;
    double mean(double rho) const {
      const long double s = 1.0L / rho;
      return static_cast<double>(a * s + b * s * s);
    }
    double variance(double rho) const {
      const long double s = 1.0L / rho;
      return static_cast<double>(v2 * s * s + v3 * s * s * s + v4 * s * s * s * s);
    }
  };
  auto draw_model = [&] {
    // Scales of the interference functional at realistic gains.
    const double A = 1e-9 * std::pow(10.0, log_coef(rng));
    const double B = 1e-17 * std::pow(10.0, log_coef(rng));
    const double a = A / M;
    const double b = B / L;
    return Model{a, b, a * a * std::pow(10.0, log_coef(rng)), a * b * std::pow(10.0, log_coef(rng)),
                 b * b * std::pow(10.0, log_coef(rng))};
  };
  auto triple_of = [](const Model& m, const std::array<double, 3>& rhos) {
    UserStatsTriple t;
    t.block = 5;
    for (std::size_t i = 0; i < 3; ++i) t.users[i] = {i, rhos[i], m.mean(rhos[i]), m.variance(rhos[i])};
    return t;
  };

  // Relative condition of evaluating the interpolant through (x_i, y_i) at x.
  auto lagrange_condition = [](const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    double amplified = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double basis = 1.0;
      for (std::size_t j = 0; j < xs.size(); ++j) {
        if (j != i) basis *= (x - xs[j]) / (xs[i] - xs[j]);
      }
      amplified += std::abs(basis * ys[i]);
      value += basis * ys[i];
    }
    return amplified / std::abs(value);
  };
  // Sensitivity of (M, V) at the target to relative perturbations of the inputs.
  auto problem_condition = [&](const Model& m, const std::array<double, 3>& rhos, double target) {
    std::vector<double> s;
    std::vector<double> ym;
    std::vector<double> ys;
    for (double r : rhos) {
      s.push_back(1 / r);
      ym.push_back(m.mean(r) * r);
      ys.push_back((m.variance(r) + m.mean(r) * m.mean(r)) * r * r);
    }
    const double km = lagrange_condition({s[0], s[1]}, {ym[0], ym[1]}, 1 / target);
    const double ks = lagrange_condition(s, ys, 1 / target);
    const double mean = m.mean(target);
    const double var = m.variance(target);
    return std::max(km, (ks * (var + mean * mean) + 2 * km * mean * mean) / var);
  };

  std::size_t accepted = 0;
  std::size_t skipped = 0;
  double worst = 0.0;
  double worst_scaled = 0.0;  // error over condition times unit roundoff
  std::size_t above = 0;
  double worst_consistency = 0.0;
  while (accepted < 1000) {
    const Model model = draw_model();
    const std::array<double, 3> rhos{std::pow(10.0, log_rho(rng)), std::pow(10.0, log_rho(rng)),
                                     std::pow(10.0, log_rho(rng))};
    const double target = std::pow(10.0, log_rho(rng));
    const auto triple = triple_of(model, rhos);
    Extrapolation e;
    try {
      e = extrapolate_stats(triple, target, frame, length);
    } catch (const NumericalError&) {
      ++skipped;
      continue;
    }
    const double condition = std::max({e.mean_condition, e.variance_condition, problem_condition(model, rhos, target)});
    if (condition > 1e8) {
      ++skipped;
      continue;
    }
    ++accepted;
    const double err = std::max(rel_err(e.stats.mean, model.mean(target)), rel_err(e.stats.variance, model.variance(target)));
    worst = std::max(worst, err);
    worst_scaled = std::max(worst_scaled, err / (condition * std::numeric_limits<double>::epsilon()));
    above += err > 1e-9 ? 1 : 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto self = extrapolate_stats(triple, rhos[k], frame, length);
      const double err = std::max(rel_err(self.stats.mean, triple.users[k].mean),
                                  rel_err(self.stats.variance, triple.users[k].variance));
      worst_consistency = std::max(worst_consistency, err);
    }
  }
  o.detail << " sets=" << accepted << " (redrawn " << skipped << " with condition > 1e8)"
           << " max rel err=" << fmt("%.2e", worst) << " (" << above << " above 1e-9, max err/(cond*eps)="
           << fmt("%.2f", worst_scaled) << ") k=m max rel err=" << fmt("%.2e", worst_consistency);
  o.require(worst <= 1e-9, "extrapolation error");
  o.require(worst_consistency <= 1e-9, "k = m consistency");
  return report(4, "extrapolation exactness", o);
}

int criterion5() {
  Outcome o;
  auto config = default_config();
  config.mode = SchemeSelection::proposed;
  config.blocks = {5};
  config.target_distances = {100.0, 300.0, 400.0};
  config.epsilon = 0.05;
  config.validate = true;
  config.validate_drops = 2000;
  config.learn_iterations = 2000;
  for (auto source : {StatsSource::analytic, StatsSource::learned}) {
    config.adapt_stats = source;
    config.finalize();
    const auto plan = cmd_adapt(config);
    const bool analytic = source == StatsSource::analytic;
    const double lo = analytic ? 0.03 : 0.025;
    const double hi = analytic ? 0.07 : 0.08;
    o.detail << (analytic ? " analytic:" : " learned:");
    for (const auto& line : csv_lines(plan.files.at("rate_plan.csv"))) {
      const auto f = csv_fields(line);
      const double outage = std::stod(f.back());
      o.detail << " " << f[1] << " m=" << fmt("%.4f", outage);
      o.require(outage >= lo && outage <= hi, std::string(analytic ? "analytic" : "learned") + " outage at " + f[1] + " m");
    }
  }
  return report(5, "outage closed loop (eps = 0.05, 2000 drops)", o);
}

int criterion6() {
  Outcome o;
  const auto layout = build_hex_layout(500, 2);
  std::vector<Point> positions{{200, 0}, {-150, 100}, {100, -250}};
  const double deg = std::numbers::pi / 180.0;
  const std::vector<std::pair<double, double>> interferers{{650, 0}, {700, 75}, {750, 150}, {800, 220}, {900, 290}};
  for (auto [r, a] : interferers) positions.push_back({r * std::cos(a * deg), r * std::sin(a * deg)});
  const auto n = static_cast<Eigen::Index>(positions.size());
  const UserDrop drop = build_user_drop(layout, positions, Eigen::MatrixXd::Zero(n, 19), {3.76, 0.0, 31});
  std::vector<double> medians;
  for (std::size_t antennas : {64, 128, 256}) {
    FrameConfig frame;
    frame.antennas = antennas;
    const std::size_t block = 5;
    const auto lemma = asymptotic_sinr(drop, frame, block, Scheme::baseline);
    std::vector<double> dev;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      const auto rec = run_frame(drop, frame, Scheme::baseline, derive_seed(99, stream::kChannel, seed));
      dev.push_back(std::abs(rec.records.at(block - 1).sinr / lemma.sinr - 1.0));
    }
    medians.push_back(median(dev));
    o.detail << " M=" << antennas << ":" << fmt("%.3f", medians.back());
    if (antennas == 64) o.detail << " (L=" << lemma.effective_length << ")";
  }
  o.require(medians[1] < medians[0] && medians[2] < medians[1], "monotone decrease");
  o.require(medians[2] <= 0.25, "median deviation at M = 256");
  return report(6, "detector SINR approaches the large-system limit", o);
}

CMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double var) {
  CMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal(rng, var);
  }
  return m;
}

int criterion7() {
  Outcome o;
  double worst = 0.0;
  double min_eigen = std::numeric_limits<double>::infinity();
  double worst_asym = 0.0;
  std::uniform_real_distribution<double> unit(0.05, 1.5);
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    Rng rng(seed);
    FrameConfig config;
    config.antennas = 2 + seed % 3;
    config.pilot_length = 3;
    config.block_lengths = {2};
    config.transmit_power = unit(rng);
    config.noise_power = 0.1 * unit(rng);
    config.estimator_noise = seed % 2 ? EstimatorNoise::physical : EstimatorNoise::literal;
    const auto M = static_cast<Eigen::Index>(config.antennas);
    const double Md = static_cast<double>(M);
    const Eigen::Index K = 2;
    const Eigen::Index Kc = 1;
    const CMatrix X1 = random_matrix(K, 5, rng, config.transmit_power);
    const CMatrix Xc = random_matrix(Kc, 3, rng, config.transmit_power);
    Eigen::VectorXd rho1(K);
    rho1 << unit(rng), unit(rng);
    Eigen::VectorXd rhoc(Kc);
    rhoc << 0.3 * unit(rng);
    const double out_coop = 0.05 * unit(rng);
    const double out_cell = rhoc.sum() + out_coop;
    const CMatrix Y = random_matrix(M, 5, rng, 1.0);

    // In-cell estimator as displayed: X^H (X X^H + c R^-1)^-1.
    const auto cell = estimate_in_cell(Y, X1, rho1, out_cell, config);
    const bool physical = config.estimator_noise == EstimatorNoise::physical;
    const double c_in = Md * config.transmit_power * out_cell + (physical ? Md : 2.0) * config.noise_power;
    const CMatrix Rinv = (Md * rho1).cwiseInverse().cast<cdouble>().asDiagonal();
    const CMatrix q_in = X1.adjoint() * (X1 * X1.adjoint() + c_in * Rinv).inverse();
    worst = std::max(worst, rel_err(cell.estimator, q_in));

    // Interferer estimator with the in-cell error folded into the regularizer.
    const CMatrix X1d = X1.leftCols(3);
    const CMatrix residual = cancel_residual(Y.leftCols(3), cell.estimate, X1d);
    const auto co = estimate_interferers(residual, Xc, rhoc, X1d, cell, out_coop, config);
    const CMatrix Rc = (Md * rhoc).cast<cdouble>().asDiagonal();
    const double c_co = Md * config.transmit_power * out_coop + (physical ? Md : 1.0) * config.noise_power;
    const double c_err = Md * config.transmit_power * out_cell + (physical ? Md * config.noise_power : 0.0);
    const CMatrix E = (Rinv + X1 * X1.adjoint() / c_err).inverse();
    worst = std::max(worst, rel_err(cell.error_covariance, E));
    const CMatrix W = Xc.adjoint() * Rc * Xc + c_co * CMatrix::Identity(3, 3) + X1d.adjoint() * E * X1d;
    const CMatrix q_co = W.inverse() * Xc.adjoint() * Rc;
    worst = std::max(worst, rel_err(co.estimator, q_co));

    const double noise_ratio = config.noise_power / config.transmit_power;
    const CMatrix I = CMatrix::Identity(M, M);
    const auto dr1 = cell.error_coefficients(config.antennas);
    const auto drc = co.error_coefficients(config.antennas);
    const CMatrix yb = Y.rightCols(2);
    const auto in = detect_block_in(cell.estimate, dr1, out_cell, config, yb);
    const CMatrix psi_in =
        (cell.estimate * cell.estimate.adjoint() + (dr1.sum() + out_cell + noise_ratio) * I).inverse();
    worst = std::max(worst, rel_err(in.psi.dense(), psi_in));

    const auto joint = detect_block_co(cell.estimate, co.estimate, dr1, drc, out_coop, config, yb);
    CMatrix stacked(M, K + Kc);
    stacked << cell.estimate, co.estimate;
    const CMatrix psi_co =
        (stacked * stacked.adjoint() + (dr1.sum() + drc.sum() + out_coop + noise_ratio) * I).inverse();
    worst = std::max(worst, rel_err(joint.psi.dense(), psi_co));

    for (const CMatrix& psi : {in.psi.dense(), joint.psi.dense()}) {
      worst_asym = std::max(worst_asym, rel_err(psi, CMatrix(psi.adjoint())));
      Eigen::SelfAdjointEigenSolver<CMatrix> es(psi);
      min_eigen = std::min(min_eigen, es.eigenvalues().minCoeff());
    }
  }
  o.detail << " 500 toys: max rel err=" << fmt("%.2e", worst) << " max asymmetry=" << fmt("%.2e", worst_asym)
           << " min eigenvalue=" << fmt("%.3e", min_eigen);
  o.require(worst <= 1e-12, "formula match");
  o.require(worst_asym <= 1e-12 && min_eigen > 0.0, "Hermitian positive definite");
  return report(7, "estimator and detector formula oracles", o);
}

int criterion8() {
  Outcome o;
  // Pilot book of a full 19-cell network.
  const PilotBook book(31, 0.19952623149688797, std::vector<std::size_t>(19, 31));
  const double pilot_err = book.max_correlation_error();
  o.detail << " pilot err=" << fmt("%.1e", pilot_err);
  o.require(pilot_err <= 1e-9, "pilot correlations");

  // Users inside the target hex over independent drops.
  const auto layout = build_hex_layout(500, 2);
  const auto density = DensityMap::per_cell(10, 500);
  const std::size_t drops = 10000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (std::size_t s = 0; s < drops; ++s) {
    const auto drop = sample_user_drop(layout, density, {3.76, 3.0, 1000}, derive_seed(8, stream::kDrop, s));
    double count = 0.0;
    for (const auto& u : drop.users) count += layout.in_hex(u.position, 0) ? 1.0 : 0.0;
    sum += count;
    sum2 += count * count;
  }
  const double n = static_cast<double>(drops);
  const double mean = sum / n;
  const double var = (sum2 - n * mean * mean) / (n - 1);
  const double lambda = 10.0;
  const double se_mean = std::sqrt(lambda / n);
  // Poisson fourth central moment: lambda (1 + 3 lambda).
  const double se_var = std::sqrt((lambda * (1 + 3 * lambda) - lambda * lambda * (n - 3) / (n - 1)) / n);
  o.detail << " count mean=" << fmt("%.3f", mean) << " var=" << fmt("%.3f", var);
  o.require(std::abs(mean - lambda) <= 3 * se_mean, "Poisson mean");
  o.require(std::abs(var - lambda) <= 3 * se_var, "Poisson variance");

  // Quadrature closed forms.
  double qerr = 0.0;
  const double sigma = 3.76;
  for (double r_max : {2232.0, 5000.0}) {
    const auto ring = integration_region(layout, RegionMode::outside_radius, r_max, 700);
    const double exact = 2 * std::numbers::pi * (std::pow(700.0, 2 - sigma) - std::pow(r_max, 2 - sigma)) / (sigma - 2);
    qerr = std::max(qerr, rel_err(ring.integrate([&](Point p) { return std::pow(p.norm(), -sigma); }), exact));
  }
  const auto hex = integration_region(layout, RegionMode::outside_target_cell, layout.coverage_radius());
  qerr = std::max(qerr, rel_err(hex.integrate_interior([](Point) { return 1.0; }), layout.hex_area()));
  const double disk = std::numbers::pi * std::pow(layout.coverage_radius(), 2);
  qerr = std::max(qerr, rel_err(hex.integrate([](Point) { return 1.0; }), disk - layout.hex_area()));
  o.detail << " quadrature err=" << fmt("%.1e", qerr);
  o.require(qerr <= 1e-8, "quadrature");

  // Byte-identical bundles across reruns and thread counts.
  ExperimentConfig c;
  apply_config_text(c, "rings = 1\nantennas = 32\nblock_lengths = 40, 40, 40\nblocks = 1, 2, 3\n"
                       "users_per_cell = 5\ntarget_distances_m = 100, 400\ntrials = 24\nvariance = both\n");
  c.threads = 1;
  c.finalize();
  const auto a = cmd_simulate(c);
  const auto b = cmd_simulate(c);
  c.threads = 4;
  const auto p = cmd_simulate(c);
  const bool same = a.files == b.files && a.files == p.files && a.manifest.dump() == p.manifest.dump();
  const auto x = cmd_analyze(c);
  c.threads = 1;
  const auto y = cmd_analyze(c);
  o.detail << " reruns identical=" << (same && x.files == y.files ? "yes" : "no");
  o.require(same && x.files == y.files, "byte-identical reruns");
  return report(8, "infrastructure properties", o);
}

}  // namespace

// Optional arguments select criteria by number; no arguments runs all of them.
int main(int argc, char** argv) {
  std::vector<bool> selected(9, argc == 1);
  for (int k = 1; k < argc; ++k) {
    const int id = std::atoi(argv[k]);
    if (id >= 1 && id <= 8) selected[static_cast<std::size_t>(id)] = true;
  }
  int failures = 0;
  if (selected[1] || selected[2]) {
    try {
      const SimulationRun run = run_simulation();
      if (selected[1]) failures += criterion1(run);
      if (selected[2]) failures += criterion2(run);
    } catch (const std::exception& e) {
      for (int id : {1, 2}) {
        if (!selected[static_cast<std::size_t>(id)]) continue;
        std::cout << "CRITERION " << id << " FAIL error: " << e.what() << std::endl;
        ++failures;
      }
    }
  }
  const std::vector<std::function<int()>> rest{criterion3, criterion4, criterion5, criterion6, criterion7, criterion8};
  for (std::size_t k = 0; k < rest.size(); ++k) {
    if (!selected[k + 3]) continue;
    try {
      failures += rest[k]();
    } catch (const std::exception& e) {
      std::cout << "CRITERION " << k + 3 << " FAIL error: " << e.what() << std::endl;
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "ALL SELECTED CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
