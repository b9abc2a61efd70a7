#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "coopmimo/channel.hpp"
#include "coopmimo/geometry.hpp"

namespace testing {

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double rel_err(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

// Users at fixed positions with zero shadowing.
inline coopmimo::UserDrop fixed_drop(const coopmimo::NetworkLayout& layout, std::vector<coopmimo::Point> positions,
                                     double pathloss = 3.76) {
  const auto n = static_cast<Eigen::Index>(positions.size());
  coopmimo::PropagationParams params{pathloss, 0.0, 31};
  return coopmimo::build_user_drop(layout, std::move(positions),
                                   Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(layout.num_bs())), params);
}

inline coopmimo::FrameConfig small_frame(std::size_t antennas = 8) {
  coopmimo::FrameConfig c;
  c.antennas = antennas;
  c.pilot_length = 11;
  c.block_lengths = {10, 10, 10};
  c.backhaul_delay = 1;
  return c;
}

}  // namespace testing
