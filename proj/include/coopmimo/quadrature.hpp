#pragma once

#include <cstddef>
#include <vector>

namespace coopmimo {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

// n-point Gauss-Legendre rule by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(std::size_t n);

// Maps a rule to [a, b]; returns (abscissae, weights).
void map_rule(const GaussLegendreRule& rule, double a, double b, std::vector<double>& x,
              std::vector<double>& w);

}  // namespace coopmimo
