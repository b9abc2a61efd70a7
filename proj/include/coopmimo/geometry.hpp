#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

namespace coopmimo {

struct Point {
  double x = 0.0;
  double y = 0.0;

  double norm() const { return std::hypot(x, y); }
  double angle() const { return std::atan2(y, x); }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend bool operator==(Point a, Point b) = default;
};

inline double distance(Point a, Point b) { return (a - b).norm(); }

// Flat-topped hexagonal cells; BS 0 (the target) sits at the origin.
class NetworkLayout {
 public:
  NetworkLayout(std::vector<Point> bs_positions, double cell_radius, int rings);

  const std::vector<Point>& bs_positions() const { return bs_; }
  std::size_t num_bs() const { return bs_.size(); }
  double cell_radius() const { return radius_; }
  int rings() const { return rings_; }

  // Radius of the smallest origin-centred disk covering every cell.
  double coverage_radius() const;
  double hex_area() const { return 1.5 * std::sqrt(3.0) * radius_ * radius_; }

  std::size_t nearest_bs(Point p) const;
  bool in_hex(Point p, std::size_t bs) const;

  // Distance from a hex centre to its boundary along direction `angle`.
  static double hex_boundary_distance(double cell_radius, double angle);

 private:
  std::vector<Point> bs_;
  double radius_;
  int rings_;
};

NetworkLayout build_hex_layout(double cell_radius, int rings);

// User density lambda(l) in users/m^2 with bounds lower <= lambda <= upper.
class DensityMap {
 public:
  using Evaluator = std::function<double(Point)>;

  DensityMap(Evaluator evaluator, double lower, double upper);
  static DensityMap uniform(double density);
  // Uniform density chosen so that each hex cell holds `users_per_cell` on average.
  static DensityMap per_cell(double users_per_cell, double cell_radius);

  // Throws ConfigError when the evaluator leaves [lower, upper].
  double operator()(Point p) const;
  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  Evaluator eval_;
  double lower_;
  double upper_;
};

struct PropagationParams {
  double pathloss_exponent = 3.76;
  double shadowing_std_db = 3.0;
  std::size_t max_users_per_cell = 31;
};

struct User {
  Point position;
  std::size_t cell = 0;
  std::size_t in_cell_index = 0;
};

struct UserDrop {
  std::vector<User> users;
  Eigen::MatrixXd rho;           // users x BSs, linear power gain
  Eigen::MatrixXd shadowing_db;  // users x BSs
  std::vector<std::vector<std::size_t>> cells;  // user indices per cell, ordered by in_cell_index

  std::size_t size() const { return users.size(); }
  std::size_t num_cells() const { return cells.size(); }
  // Large-scale gain from user u to the target BS.
  double rho_target(std::size_t u) const { return rho(static_cast<Eigen::Index>(u), 0); }
};

// Associates every position to its nearest BS and fills rho from the given
// shadowing (dB, users x BSs). Users keep their input order; in-cell indices
// follow first appearance. Throws CellOverflowError if a cell exceeds the limit.
UserDrop build_user_drop(const NetworkLayout& layout, std::vector<Point> positions,
                         Eigen::MatrixXd shadowing_db, const PropagationParams& params);

// One SPPP realization over the disk of radius `sampling_radius` (defaults to
// the layout's coverage radius), thinned against density.upper().
UserDrop sample_user_drop(const NetworkLayout& layout, const DensityMap& density,
                          const PropagationParams& params, std::uint64_t seed,
                          std::optional<double> sampling_radius = std::nullopt);

// Returns a copy of `drop` with a user at (distance, 0) inserted as user 0 and
// in-cell index 0 of the target cell. Its shadowing towards the target BS is
// 0 dB; shadowing towards other BSs is drawn from `seed`.
UserDrop plant_target_user(const NetworkLayout& layout, const UserDrop& drop, double distance,
                           const PropagationParams& params, std::uint64_t seed);

// Fresh drops with a planted target user, indexed by trial. A drop that
// overflows a cell is redrawn from the next attempt counter.
struct PlantedDrop {
  UserDrop drop;
  std::size_t resamples = 0;
};

class DropSource {
 public:
  DropSource(NetworkLayout layout, DensityMap density, PropagationParams params, double target_distance,
             std::uint64_t master_seed, std::size_t max_attempts = 100);

  PlantedDrop draw(std::uint64_t trial) const;
  const NetworkLayout& layout() const { return layout_; }
  const DensityMap& density() const { return density_; }
  double target_distance() const { return target_distance_; }

 private:
  NetworkLayout layout_;
  DensityMap density_;
  PropagationParams params_;
  double target_distance_;
  std::uint64_t master_seed_;
  std::size_t max_attempts_;
};

// Target cell, cooperative interferers (other cells, |l| <= r_co) and the rest.
struct UserPartition {
  std::vector<std::size_t> in_cell;
  std::vector<std::size_t> cooperative;
  std::vector<std::size_t> outside;
};

// With no cooperation radius every out-of-cell user lands in `outside`.
UserPartition partition_users(const UserDrop& drop, std::optional<double> cooperation_radius);

enum class RegionMode { outside_target_cell, outside_radius };

struct QuadratureOptions {
  std::size_t radial_nodes = 256;
  std::size_t angular_nodes = 128;
};

struct QuadratureNode {
  Point point;
  double weight;
};

// The interferer region: everything outside the target hex (or outside the
// cooperation radius) truncated at r_max, with a polar quadrature over it.
class RegionSpec {
 public:
  RegionSpec(RegionMode mode, double cell_radius, double inner_radius, double r_max,
             QuadratureOptions options = {});

  RegionMode mode() const { return mode_; }
  double cell_radius() const { return cell_radius_; }
  double inner_radius() const { return inner_radius_; }
  double r_max() const { return r_max_; }
  const QuadratureOptions& options() const { return options_; }

  double boundary_distance(double angle) const;
  bool contains(Point p) const;

  // Nodes over the region itself and over its complement inside r_max.
  std::vector<QuadratureNode> nodes() const;
  std::vector<QuadratureNode> interior_nodes() const;

  double integrate(const std::function<double(Point)>& f) const;
  double integrate_interior(const std::function<double(Point)>& f) const;

 private:
  std::vector<QuadratureNode> polar_nodes(bool interior) const;

  RegionMode mode_;
  double cell_radius_;
  double inner_radius_;
  double r_max_;
  QuadratureOptions options_;
};

RegionSpec integration_region(const NetworkLayout& layout, RegionMode mode, double r_max,
                              double cooperation_radius = 0.0, QuadratureOptions options = {});

void to_json(nlohmann::json& j, const UserDrop& drop);
void from_json(const nlohmann::json& j, UserDrop& drop);
void to_json(nlohmann::json& j, const RegionSpec& region);
RegionSpec region_from_json(const nlohmann::json& j);

}  // namespace coopmimo
