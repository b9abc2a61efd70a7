#include "coopmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "coopmimo/errors.hpp"
#include "coopmimo/quadrature.hpp"
#include "coopmimo/rng.hpp"

namespace coopmimo {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

}  // namespace

NetworkLayout::NetworkLayout(std::vector<Point> bs_positions, double cell_radius, int rings)
    : bs_(std::move(bs_positions)), radius_(cell_radius), rings_(rings) {
  if (bs_.empty()) throw ConfigError("layout needs at least one BS");
  if (!(cell_radius > 0.0)) throw ConfigError("cell radius must be positive");
}

double NetworkLayout::coverage_radius() const {
  double far = 0.0;
  for (const auto& p : bs_) far = std::max(far, p.norm());
  return far + radius_;
}

std::size_t NetworkLayout::nearest_bs(Point p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < bs_.size(); ++b) {
    const double d = distance(p, bs_[b]);
    if (d < best_d) {
      best_d = d;
      best = b;
    }
  }
  return best;
}

bool NetworkLayout::in_hex(Point p, std::size_t bs) const {
  const Point d = p - bs_.at(bs);
  const double ax = std::abs(d.x);
  const double ay = std::abs(d.y);
  return ay <= 0.5 * kSqrt3 * radius_ && kSqrt3 * ax + ay <= kSqrt3 * radius_;
}

double NetworkLayout::hex_boundary_distance(double cell_radius, double angle) {
  // Edge normals of a flat-topped hex point at 30 + 60k degrees.
  constexpr double sector = std::numbers::pi / 3.0;
  double psi = std::fmod(angle - sector / 2.0, sector);
  if (psi < 0.0) psi += sector;
  if (psi >= sector / 2.0) psi -= sector;
  return 0.5 * kSqrt3 * cell_radius / std::cos(psi);
}

NetworkLayout build_hex_layout(double cell_radius, int rings) {
  if (!(cell_radius > 0.0)) throw ConfigError("cell radius must be positive");
  if (rings < 0) throw ConfigError("rings must be nonnegative");
  if (rings > 20) throw ConfigError("rings > 20 rejected");
  std::vector<Point> bs{{0.0, 0.0}};
  // Axial coordinates of a flat-topped grid, ring by ring.
  for (int ring = 1; ring <= rings; ++ring) {
    for (int q = -ring; q <= ring; ++q) {
      for (int r = -ring; r <= ring; ++r) {
        const int s = -q - r;
        if (std::max({std::abs(q), std::abs(r), std::abs(s)}) != ring) continue;
        bs.push_back({1.5 * cell_radius * q, kSqrt3 * cell_radius * (r + 0.5 * q)});
      }
    }
  }
  return NetworkLayout(std::move(bs), cell_radius, rings);
}

DensityMap::DensityMap(Evaluator evaluator, double lower, double upper)
    : eval_(std::move(evaluator)), lower_(lower), upper_(upper) {
  if (!eval_) throw ConfigError("density evaluator is empty");
  if (lower < 0.0 || upper < lower) throw ConfigError("density bounds must satisfy 0 <= lower <= upper");
}

DensityMap DensityMap::uniform(double density) {
  return DensityMap([density](Point) { return density; }, density, density);
}

DensityMap DensityMap::per_cell(double users_per_cell, double cell_radius) {
  return uniform(users_per_cell / (1.5 * kSqrt3 * cell_radius * cell_radius));
}

double DensityMap::operator()(Point p) const {
  const double v = eval_(p);
  const double slack = 1e-12 * std::max(1.0, upper_);
  if (!(v >= lower_ - slack && v <= upper_ + slack)) {
    throw ConfigError("density evaluator left its declared bounds");
  }
  return v;
}

UserDrop build_user_drop(const NetworkLayout& layout, std::vector<Point> positions,
                         Eigen::MatrixXd shadowing_db, const PropagationParams& params) {
  const auto n_users = static_cast<Eigen::Index>(positions.size());
  const auto n_bs = static_cast<Eigen::Index>(layout.num_bs());
  if (shadowing_db.rows() != n_users || shadowing_db.cols() != n_bs) {
    throw ConfigError("shadowing matrix must be users x BSs");
  }
  UserDrop drop;
  drop.cells.assign(layout.num_bs(), {});
  drop.users.reserve(positions.size());
  drop.rho.resize(n_users, n_bs);
  drop.shadowing_db = std::move(shadowing_db);
  for (Eigen::Index u = 0; u < n_users; ++u) {
    const Point p = positions[static_cast<std::size_t>(u)];
    const std::size_t cell = layout.nearest_bs(p);
    auto& members = drop.cells[cell];
    drop.users.push_back({p, cell, members.size()});
    members.push_back(static_cast<std::size_t>(u));
    for (Eigen::Index b = 0; b < n_bs; ++b) {
      const double d = distance(p, layout.bs_positions()[static_cast<std::size_t>(b)]);
      if (!(d > 0.0)) throw NumericalError("user located exactly at a BS");
      const double chi = std::pow(10.0, drop.shadowing_db(u, b) / 10.0);
      drop.rho(u, b) = chi * std::pow(d, -params.pathloss_exponent);
    }
  }
  for (std::size_t c = 0; c < drop.cells.size(); ++c) {
    if (drop.cells[c].size() > params.max_users_per_cell) {
      throw CellOverflowError(c, drop.cells[c].size(), params.max_users_per_cell);
    }
  }
  return drop;
}

UserDrop sample_user_drop(const NetworkLayout& layout, const DensityMap& density,
                          const PropagationParams& params, std::uint64_t seed,
                          std::optional<double> sampling_radius) {
  const double radius = sampling_radius.value_or(layout.coverage_radius());
  if (!(radius > 0.0)) throw ConfigError("sampling radius must be positive");
  Rng rng(seed);
  std::vector<Point> positions;
  if (density.upper() > 0.0) {
    const double mean = density.upper() * std::numbers::pi * radius * radius;
    std::poisson_distribution<long long> count(mean);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const long long n = count(rng);
    for (long long i = 0; i < n; ++i) {
      const double r = radius * std::sqrt(unit(rng));
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const double keep = unit(rng);
      const Point p{r * std::cos(phi), r * std::sin(phi)};
      if (keep * density.upper() < density(p)) positions.push_back(p);
    }
  }
  Eigen::MatrixXd shadow(static_cast<Eigen::Index>(positions.size()),
                         static_cast<Eigen::Index>(layout.num_bs()));
  std::normal_distribution<double> zeta(0.0, params.shadowing_std_db);
  for (Eigen::Index u = 0; u < shadow.rows(); ++u) {
    for (Eigen::Index b = 0; b < shadow.cols(); ++b) {
      shadow(u, b) = params.shadowing_std_db > 0.0 ? zeta(rng) : 0.0;
    }
  }
  return build_user_drop(layout, std::move(positions), std::move(shadow), params);
}

UserDrop plant_target_user(const NetworkLayout& layout, const UserDrop& drop, double distance_m,
                           const PropagationParams& params, std::uint64_t seed) {
  if (!(distance_m > 0.0)) throw ConfigError("target distance must be positive");
  const Point target{distance_m, 0.0};
  if (layout.nearest_bs(target) != 0) throw ConfigError("planted target is not served by the target BS");
  std::vector<Point> positions{target};
  for (const auto& u : drop.users) positions.push_back(u.position);
  const auto n_bs = static_cast<Eigen::Index>(layout.num_bs());
  Eigen::MatrixXd shadow(static_cast<Eigen::Index>(positions.size()), n_bs);
  Rng rng(seed);
  std::normal_distribution<double> zeta(0.0, params.shadowing_std_db);
  shadow(0, 0) = 0.0;
  for (Eigen::Index b = 1; b < n_bs; ++b) shadow(0, b) = params.shadowing_std_db > 0.0 ? zeta(rng) : 0.0;
  if (drop.size() > 0) shadow.bottomRows(static_cast<Eigen::Index>(drop.size())) = drop.shadowing_db;
  return build_user_drop(layout, std::move(positions), std::move(shadow), params);
}

DropSource::DropSource(NetworkLayout layout, DensityMap density, PropagationParams params, double target_distance,
                       std::uint64_t master_seed, std::size_t max_attempts)
    : layout_(std::move(layout)),
      density_(std::move(density)),
      params_(params),
      target_distance_(target_distance),
      master_seed_(master_seed),
      max_attempts_(max_attempts) {
  if (!(target_distance_ > 0.0)) throw ConfigError("target distance must be positive");
  if (max_attempts_ == 0) throw ConfigError("max_attempts must be positive");
}

PlantedDrop DropSource::draw(std::uint64_t trial) const {
  const std::uint64_t drop_base = derive_seed(master_seed_, stream::kDrop, trial);
  const std::uint64_t plant_base = derive_seed(master_seed_, stream::kPlant, trial);
  for (std::size_t attempt = 0; attempt < max_attempts_; ++attempt) {
    try {
      UserDrop background = sample_user_drop(layout_, density_, params_, derive_seed(drop_base, 0, attempt));
      return {plant_target_user(layout_, background, target_distance_, params_, derive_seed(plant_base, 0, attempt)),
              attempt};
    } catch (const CellOverflowError&) {
    }
  }
  throw NumericalError("every drop attempt overflowed a cell; lower the user density");
}

UserPartition partition_users(const UserDrop& drop, std::optional<double> cooperation_radius) {
  UserPartition part;
  if (!drop.cells.empty()) part.in_cell = drop.cells[0];
  for (std::size_t u = 0; u < drop.size(); ++u) {
    const auto& user = drop.users[u];
    if (user.cell == 0) continue;
    if (cooperation_radius && user.position.norm() <= *cooperation_radius) {
      part.cooperative.push_back(u);
    } else {
      part.outside.push_back(u);
    }
  }
  return part;
}

RegionSpec::RegionSpec(RegionMode mode, double cell_radius, double inner_radius, double r_max,
                       QuadratureOptions options)
    : mode_(mode), cell_radius_(cell_radius), inner_radius_(inner_radius), r_max_(r_max), options_(options) {
  if (!(cell_radius > 0.0)) throw ConfigError("region: cell radius must be positive");
  if (mode == RegionMode::outside_radius && !(inner_radius > 0.0 && r_max > inner_radius)) {
    throw ConfigError("region: need r_max > r_co > 0");
  }
  if (mode == RegionMode::outside_target_cell && !(r_max > cell_radius)) {
    throw ConfigError("region: r_max must exceed the cell radius");
  }
  if (options.radial_nodes == 0 || options.angular_nodes == 0) throw ConfigError("region: node counts must be positive");
}

double RegionSpec::boundary_distance(double angle) const {
  return mode_ == RegionMode::outside_radius ? inner_radius_
                                             : NetworkLayout::hex_boundary_distance(cell_radius_, angle);
}

bool RegionSpec::contains(Point p) const {
  const double r = p.norm();
  return r <= r_max_ && r > boundary_distance(p.angle());
}

std::vector<QuadratureNode> RegionSpec::polar_nodes(bool interior) const {
  std::vector<double> angles;
  std::vector<double> angle_weights;
  if (mode_ == RegionMode::outside_radius) {
    // Periodic integrand in angle: the trapezoid rule is spectrally accurate.
    const std::size_t n = options_.angular_nodes;
    for (std::size_t k = 0; k < n; ++k) {
      angles.push_back(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
      angle_weights.push_back(2.0 * std::numbers::pi / static_cast<double>(n));
    }
  } else {
    // The hex boundary has kinks at the vertices; integrate sector by sector.
    const std::size_t per_sector = (options_.angular_nodes + 5) / 6;
    const auto rule = gauss_legendre(per_sector);
    std::vector<double> x;
    std::vector<double> w;
    for (int s = 0; s < 6; ++s) {
      map_rule(rule, s * std::numbers::pi / 3.0, (s + 1) * std::numbers::pi / 3.0, x, w);
      angles.insert(angles.end(), x.begin(), x.end());
      angle_weights.insert(angle_weights.end(), w.begin(), w.end());
    }
  }
  const auto radial = gauss_legendre(options_.radial_nodes);
  std::vector<QuadratureNode> out;
  out.reserve(angles.size() * options_.radial_nodes);
  std::vector<double> r;
  std::vector<double> wr;
  for (std::size_t a = 0; a < angles.size(); ++a) {
    const double inner = boundary_distance(angles[a]);
    if (interior) {
      map_rule(radial, 0.0, std::min(inner, r_max_), r, wr);
    } else {
      map_rule(radial, inner, r_max_, r, wr);
    }
    const double c = std::cos(angles[a]);
    const double s = std::sin(angles[a]);
    for (std::size_t k = 0; k < r.size(); ++k) {
      out.push_back({{r[k] * c, r[k] * s}, angle_weights[a] * wr[k] * r[k]});
    }
  }
  return out;
}

std::vector<QuadratureNode> RegionSpec::nodes() const { return polar_nodes(false); }
std::vector<QuadratureNode> RegionSpec::interior_nodes() const { return polar_nodes(true); }

double RegionSpec::integrate(const std::function<double(Point)>& f) const {
  double acc = 0.0;
  for (const auto& n : nodes()) acc += n.weight * f(n.point);
  return acc;
}

double RegionSpec::integrate_interior(const std::function<double(Point)>& f) const {
  double acc = 0.0;
  for (const auto& n : interior_nodes()) acc += n.weight * f(n.point);
  return acc;
}

RegionSpec integration_region(const NetworkLayout& layout, RegionMode mode, double r_max,
                              double cooperation_radius, QuadratureOptions options) {
  return RegionSpec(mode, layout.cell_radius(), mode == RegionMode::outside_radius ? cooperation_radius : 0.0,
                    r_max, options);
}

void to_json(nlohmann::json& j, const UserDrop& drop) {
  nlohmann::json users = nlohmann::json::array();
  for (const auto& u : drop.users) {
    users.push_back({{"x_m", u.position.x}, {"y_m", u.position.y}, {"cell", u.cell}, {"k", u.in_cell_index}});
  }
  auto matrix = [](const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(m.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      rows.push_back(row);
    }
    return rows;
  };
  j = {{"num_bs", drop.cells.size()}, {"users", users}, {"rho_linear", matrix(drop.rho)},
       {"shadowing_db", matrix(drop.shadowing_db)}};
}

void from_json(const nlohmann::json& j, UserDrop& drop) {
  const auto n_bs = j.at("num_bs").get<std::size_t>();
  const auto& users = j.at("users");
  drop = UserDrop{};
  drop.cells.assign(n_bs, {});
  const auto n = static_cast<Eigen::Index>(users.size());
  drop.rho.resize(n, static_cast<Eigen::Index>(n_bs));
  drop.shadowing_db.resize(n, static_cast<Eigen::Index>(n_bs));
  for (Eigen::Index u = 0; u < n; ++u) {
    const auto& ju = users.at(static_cast<std::size_t>(u));
    User user{{ju.at("x_m").get<double>(), ju.at("y_m").get<double>()}, ju.at("cell").get<std::size_t>(),
              ju.at("k").get<std::size_t>()};
    if (user.cell >= n_bs) throw ConfigError("drop json: cell index out of range");
    drop.users.push_back(user);
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(n_bs); ++b) {
      drop.rho(u, b) = j.at("rho_linear").at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(b)).get<double>();
      drop.shadowing_db(u, b) =
          j.at("shadowing_db").at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(b)).get<double>();
    }
  }
  for (std::size_t u = 0; u < drop.users.size(); ++u) {
    auto& members = drop.cells[drop.users[u].cell];
    if (members.size() <= drop.users[u].in_cell_index) members.resize(drop.users[u].in_cell_index + 1);
    members[drop.users[u].in_cell_index] = u;
  }
}

void to_json(nlohmann::json& j, const RegionSpec& region) {
  j = {{"mode", region.mode() == RegionMode::outside_radius ? "outside_radius" : "outside_target_cell"},
       {"cell_radius_m", region.cell_radius()},
       {"inner_radius_m", region.inner_radius()},
       {"r_max_m", region.r_max()},
       {"radial_nodes", region.options().radial_nodes},
       {"angular_nodes", region.options().angular_nodes}};
}

RegionSpec region_from_json(const nlohmann::json& j) {
  const auto mode_name = j.at("mode").get<std::string>();
  RegionMode mode;
  if (mode_name == "outside_radius") {
    mode = RegionMode::outside_radius;
  } else if (mode_name == "outside_target_cell") {
    mode = RegionMode::outside_target_cell;
  } else {
    throw ConfigError("region json: unknown mode " + mode_name);
  }
  return RegionSpec(mode, j.at("cell_radius_m").get<double>(), j.at("inner_radius_m").get<double>(),
                    j.at("r_max_m").get<double>(),
                    {j.at("radial_nodes").get<std::size_t>(), j.at("angular_nodes").get<std::size_t>()});
}

}  // namespace coopmimo
